#include <doctest.h>

#include <cmath>

#include "elixir/camproto.hpp"
#include "elixir/errors.hpp"
#include "elixir/harness.hpp"

using namespace elixir;

namespace {

ScenarioConfig proto_scenario() {
    ScenarioConfig s;
    s.name = "proto";
    s.seed = 424242;
    s.image_size = 16;
    s.steps_per_phase = 50;
    s.estimator_noise_sigma = 2.0;
    s.phases = {{"DAY", 1.0}, {"NIGHT", 0.5}};
    AuProfile a;
    a.name = "FD";
    a.width = 5.0;
    a.optimum = {{"DAY", CameraSettings{60, 40, 50, 50}},
                 {"NIGHT", CameraSettings{70, 50, 50, 50}}};
    AuProfile b = a;
    b.name = "PD";
    b.optimum = {{"DAY", CameraSettings{40, 60, 50, 50}},
                 {"NIGHT", CameraSettings{50, 70, 50, 50}}};
    s.au_profiles = {a, b};
    s.object_counts = {{5, 5}, {3, 3}};
    return s;
}

} // namespace

TEST_CASE("codec round-trips are bit-exact") {
    Request set;
    set.op = Op::SetParams;
    set.seq = 7;
    set.settings = CameraSettings{40, 90, 60, 100};
    CHECK(decode_request(encode(set)) == set);

    Request frame;
    frame.op = Op::GetFrame;
    frame.seq = 8;
    frame.advance_ms = 260.3;
    CHECK(decode_request(encode(frame)) == frame);

    Response resp;
    resp.seq = 8;
    resp.ok = true;
    resp.measurements = FrameMeasurements{0.1234567890123456, 1.0, 0.0, 0.5};
    resp.virtual_ms = 39.7; // must survive as decimal text exactly
    CHECK(decode_response(encode(resp)) == resp);
    CHECK(encode(resp).find("39.7") != std::string::npos);

    Response err;
    err.seq = -1;
    err.ok = false;
    err.error = "broken";
    CHECK(decode_response(encode(err)) == err);
}

TEST_CASE("codec rejects malformed lines") {
    CHECK_THROWS_AS(decode_request(""), ParseError);
    CHECK_THROWS_AS(decode_request("   "), ParseError);
    CHECK_THROWS_AS(decode_request("xyz"), ParseError);
    CHECK_THROWS_AS(decode_request("{\"op\":\"GET_PARAMS\",\"seq\":1}{}"),
                    ParseError); // trailing bytes
    CHECK_THROWS_AS(decode_request("{\"op\":\"GET_PARAMS\",\"seq\":1,\"seq\":2}"),
                    ParseError); // duplicate key
    CHECK_THROWS_AS(decode_request("{\"op\":\"FLY\",\"seq\":1}"), ParseError);
    CHECK_THROWS_AS(decode_request("{\"op\":\"GET_PARAMS\"}"), ParseError);
    CHECK_THROWS_AS(
        decode_request("{\"op\":\"SET_PARAMS\",\"seq\":1,\"settings\":[1,2,3]}"),
        ParseError);
    CHECK_THROWS_AS(decode_request(
                        "{\"op\":\"SET_PARAMS\",\"seq\":1,\"settings\":[0,0,0,101]}"),
                    ParseError);
    CHECK_THROWS_AS(
        decode_request("{\"op\":\"GET_FRAME\",\"seq\":1,\"advance_ms\":-5}"),
        ParseError);
    CHECK_THROWS_AS(decode_response("{\"seq\":1,\"status\":\"MAYBE\"}"), ParseError);
}

TEST_CASE("settings take effect exactly set_params_ms after SET_PARAMS") {
    VirtualCamera cam(proto_scenario());

    Request set;
    set.op = Op::SetParams;
    set.seq = 1;
    set.settings = CameraSettings{40, 90, 60, 100};
    const auto ack = cam.handle(set);
    CHECK(ack.ok);
    CHECK(*ack.effective_ms == 200.0);

    // fresh camera default, still before the apply point
    Request get;
    get.op = Op::GetParams;
    get.seq = 2;
    get.advance_ms = 100.0;
    auto r = cam.handle(get); // t = 100
    CHECK(*r.settings == CameraSettings{50, 50, 50, 50});

    get.seq = 3;
    get.advance_ms = 99.0; // t = 199
    r = cam.handle(get);
    CHECK(*r.settings == CameraSettings{50, 50, 50, 50});

    get.seq = 4;
    get.advance_ms = 1.0; // t = 200 exactly
    r = cam.handle(get);
    CHECK(*r.settings == CameraSettings{40, 90, 60, 100});
}

TEST_CASE("two pending SET_PARAMS: last writer wins at its own time") {
    VirtualCamera cam(proto_scenario());
    Request set;
    set.op = Op::SetParams;
    set.seq = 1;
    set.settings = CameraSettings{10, 10, 10, 10};
    cam.handle(set); // effective at 200

    Request advance;
    advance.op = Op::GetParams;
    advance.seq = 2;
    advance.advance_ms = 50.0;
    cam.handle(advance); // t = 50

    set.seq = 3;
    set.settings = CameraSettings{90, 90, 90, 90};
    const auto ack = cam.handle(set); // effective at 250
    CHECK(*ack.effective_ms == 250.0);

    Request get;
    get.op = Op::GetParams;
    get.seq = 4;
    get.advance_ms = 160.0; // t = 210: first apply active
    CHECK(*cam.handle(get).settings == CameraSettings{10, 10, 10, 10});

    get.seq = 5;
    get.advance_ms = 40.0; // t = 250: second apply wins
    CHECK(*cam.handle(get).settings == CameraSettings{90, 90, 90, 90});
}

TEST_CASE("GET_FRAME charges the upload latency and returns measurements") {
    VirtualCamera cam(proto_scenario());
    Request frame;
    frame.op = Op::GetFrame;
    frame.seq = 1;
    const auto r = cam.handle(frame);
    CHECK(r.ok);
    CHECK(*r.virtual_ms == doctest::Approx(39.7));
    for (const double v : r.measurements->as_array()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // missing settings payload on SET_PARAMS is an in-protocol error
    Request bad;
    bad.op = Op::SetParams;
    bad.seq = 2;
    const auto err = cam.handle(bad);
    CHECK(!err.ok);
    CHECK(err.seq == 2);
}

TEST_CASE("request processor survives garbage and enforces sequence order") {
    VirtualCamera cam(proto_scenario());
    RequestProcessor proc(cam);

    const auto err = proc.process("xyz");
    CHECK(!err.ok);
    CHECK(err.seq == -1);

    Request get;
    get.op = Op::GetParams;
    get.seq = 5;
    CHECK(proc.process(encode(get)).ok); // connection still usable

    get.seq = 5; // not strictly increasing
    const auto dup = proc.process(encode(get));
    CHECK(!dup.ok);
    CHECK(dup.seq == 5);

    get.seq = 6;
    CHECK(proc.process(encode(get)).ok);
}

TEST_CASE("TCP server: ops, malformed input robustness, concurrent clients") {
    VirtualCamera cam(proto_scenario());
    CameraServer server(cam);
    const int port = server.start("127.0.0.1", 0);
    REQUIRE(port > 0);

    ProtoClient c1;
    c1.connect("127.0.0.1", port);

    Request get;
    get.op = Op::GetParams;
    get.seq = 1;
    auto resp = c1.call(get);
    CHECK(resp.ok);
    CHECK(*resp.settings == CameraSettings{50, 50, 50, 50});

    // garbage then a healthy request on the same connection
    const auto raw = c1.exchange_line("this is not json");
    const auto err = decode_response(raw);
    CHECK(!err.ok);
    CHECK(err.seq == -1);

    get.seq = 2;
    CHECK(c1.call(get).ok);

    // a second client has its own sequence space
    ProtoClient c2;
    c2.connect("127.0.0.1", port);
    Request set;
    set.op = Op::SetParams;
    set.seq = 1;
    set.settings = CameraSettings{60, 60, 60, 60};
    CHECK(c2.call(set).ok);

    server.stop();
}

TEST_CASE("transport transparency: protocol traces equal in-process traces") {
    const auto sc = proto_scenario();
    const std::uint64_t seed = 2026;
    AgentConfig cfg;
    cfg.explore_episodes = 25;

    SimEnv sim(sc, seed);
    MorlAgent local(sim.au_names(), cfg, seed);
    const auto local_trace = local.run(sim, 25, 15);

    VirtualCamera cam(sc);
    CameraServer server(cam);
    const int port = server.start("127.0.0.1", 0);
    ProtoClient client;
    client.connect("127.0.0.1", port);
    LatencyModel lat;
    ProtoEnv remote_env(client, sc, seed, lat.control_step_ms() + 10.0, lat);
    MorlAgent remote(remote_env.au_names(), cfg, seed);
    const auto remote_trace = remote.run(remote_env, 25, 15);
    server.stop();

    REQUIRE(local_trace.size() == remote_trace.size());
    for (std::size_t i = 0; i < local_trace.size(); ++i) {
        const auto& a = local_trace[i];
        const auto& b = remote_trace[i];
        CHECK(a.action == b.action);
        CHECK(a.state == b.state);
        CHECK(a.next_state == b.next_state);
        CHECK(a.rewards == b.rewards);
        CHECK(a.estimates == b.estimates);
        CHECK(a.obs.applied == b.obs.applied);
        CHECK(a.obs.measurements == b.obs.measurements);
        CHECK(a.obs.phase == b.obs.phase);
    }
}

TEST_CASE("a step period below the apply latency lags the settings") {
    const auto sc = proto_scenario();
    VirtualCamera cam(sc);
    CameraServer server(cam);
    const int port = server.start("127.0.0.1", 0);
    ProtoClient client;
    client.connect("127.0.0.1", port);

    ProtoEnv env(client, sc, 1, 100.0); // 100 ms < 200 ms apply latency
    env.reset();
    const auto obs = env.step(CameraSettings{30, 30, 30, 30});
    CHECK(obs.applied == CameraSettings{50, 50, 50, 50}); // still the default
    const auto obs2 = env.step(CameraSettings{30, 30, 30, 30});
    CHECK(obs2.applied == CameraSettings{30, 30, 30, 30}); // caught up now
    server.stop();
}

TEST_CASE("wall clock mode serves requests") {
    VirtualCamera cam(proto_scenario(), LatencyModel{}, ClockMode::Wall);
    Request get;
    get.op = Op::GetParams;
    get.seq = 1;
    CHECK(cam.handle(get).ok);
    Request frame;
    frame.op = Op::GetFrame;
    frame.seq = 2;
    CHECK(cam.handle(frame).ok);
}

TEST_CASE("server survives a barrage of malformed lines") {
    VirtualCamera cam(proto_scenario());
    CameraServer server(cam);
    const int port = server.start("127.0.0.1", 0);
    ProtoClient client;
    client.connect("127.0.0.1", port);

    Rng rng(8080);
    const char* junk[] = {
        "{",           "}",      "[1,2,3]",
        "null",        "12.5",   "\"string\"",
        "{\"op\":42}", "\xff\xfe\xfd", "{\"op\":\"GET_FRAME\"}",
        "{\"seq\":1}", "",       "{\"op\":\"GET_PARAMS\",\"seq\":\"x\"}",
    };
    std::int64_t seq = 0;
    for (int round = 0; round < 30; ++round) {
        const auto& line = junk[rng.uniform_int(sizeof(junk) / sizeof(junk[0]))];
        const auto resp = decode_response(client.exchange_line(line));
        CHECK(!resp.ok);
        // the connection keeps working after every piece of junk
        Request ping;
        ping.op = Op::GetParams;
        ping.seq = ++seq;
        CHECK(client.call(ping).ok);
    }
    server.stop();
}

TEST_CASE("a live camera cannot be rewound through the protocol") {
    const auto sc = proto_scenario();
    VirtualCamera cam(sc);
    CameraServer server(cam);
    const int port = server.start("127.0.0.1", 0);
    ProtoClient client;
    client.connect("127.0.0.1", port);
    ProtoEnv env(client, sc, 1, 300.0);
    env.reset();
    env.step(CameraSettings{60, 60, 60, 60});
    CHECK_THROWS_AS(env.reset(), ConfigError);
    server.stop();
}
