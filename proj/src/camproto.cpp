#include "elixir/camproto.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <set>

#include <json.hpp>

#include "elixir/errors.hpp"
#include "elixir/estimators.hpp"

namespace elixir {

using nlohmann::json;

void LatencyModel::validate() const {
    if (set_params_ms < 0 || frame_upload_ms < 0 || estimator_ms < 0 ||
        aggregate_ms < 0)
        throw ConfigError("latency charges must be >= 0");
}

const char* op_name(Op op) {
    switch (op) {
        case Op::SetParams: return "SET_PARAMS";
        case Op::GetParams: return "GET_PARAMS";
        case Op::GetFrame: return "GET_FRAME";
    }
    return "?";
}

Op parse_op(std::string_view name) {
    if (name == "SET_PARAMS") return Op::SetParams;
    if (name == "GET_PARAMS") return Op::GetParams;
    if (name == "GET_FRAME") return Op::GetFrame;
    throw ParseError("unknown op: '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Codec
// ---------------------------------------------------------------------------

namespace {

// Strict single-object parse: duplicate keys and trailing bytes are errors.
json parse_strict(std::string_view line) {
    const auto end = line.find_last_not_of(" \t\r\n");
    if (end == std::string_view::npos) throw ParseError("empty line");
    line = line.substr(0, end + 1);

    std::vector<std::set<std::string>> key_stack;
    json::parser_callback_t cb = [&key_stack](int, json::parse_event_t event,
                                              json& parsed) {
        if (event == json::parse_event_t::object_start) {
            key_stack.emplace_back();
        } else if (event == json::parse_event_t::object_end) {
            key_stack.pop_back();
        } else if (event == json::parse_event_t::key) {
            if (!key_stack.back().insert(parsed.get<std::string>()).second)
                throw ParseError("duplicate key '" + parsed.get<std::string>() +
                                 "'");
        }
        return true;
    };
    try {
        return json::parse(line.begin(), line.end(), cb);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what());
    }
}

json settings_to_json(const CameraSettings& s) {
    return json::array({s[0], s[1], s[2], s[3]});
}

CameraSettings settings_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError("settings must be a 4-element array");
    CameraSettings s;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number_integer())
            throw ParseError("settings entries must be integers");
        const auto v = j[i].get<std::int64_t>();
        if (v < kSettingMin || v > kSettingMax)
            throw ParseError("settings value out of [0,100]");
        s[i] = static_cast<int>(v);
    }
    return s;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (std::find_if(allowed.begin(), allowed.end(), [&key](const char* a) {
                return key == a;
            }) == allowed.end())
            throw ParseError("unexpected key '" + key + "'");
    }
}

std::int64_t seq_from_json(const json& j) {
    if (!j.contains("seq") || !j["seq"].is_number_integer())
        throw ParseError("missing integer seq");
    return j["seq"].get<std::int64_t>();
}

} // namespace

namespace {

// Error payloads can quote arbitrary client bytes; never let bad UTF-8 take
// down the encoder.
std::string dump_line(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

} // namespace

std::string encode(const Request& request) {
    json j;
    j["op"] = op_name(request.op);
    j["seq"] = request.seq;
    if (request.settings) j["settings"] = settings_to_json(*request.settings);
    if (request.advance_ms != 0.0) j["advance_ms"] = request.advance_ms;
    return dump_line(j);
}

Request decode_request(std::string_view line) {
    const json j = parse_strict(line);
    if (!j.is_object()) throw ParseError("request must be a JSON object");
    check_keys(j, {"op", "seq", "settings", "advance_ms"});
    if (!j.contains("op") || !j["op"].is_string())
        throw ParseError("missing op");
    Request r;
    r.op = parse_op(j["op"].get<std::string>());
    r.seq = seq_from_json(j);
    if (j.contains("settings")) r.settings = settings_from_json(j["settings"]);
    if (j.contains("advance_ms")) {
        if (!j["advance_ms"].is_number())
            throw ParseError("advance_ms must be a number");
        r.advance_ms = j["advance_ms"].get<double>();
        if (r.advance_ms < 0) throw ParseError("advance_ms must be >= 0");
    }
    return r;
}

std::string encode(const Response& response) {
    json j;
    j["seq"] = response.seq;
    j["status"] = response.ok ? "OK" : "ERROR";
    if (response.settings) j["settings"] = settings_to_json(*response.settings);
    if (response.measurements) {
        json m;
        m["brightness"] = response.measurements->brightness;
        m["contrast"] = response.measurements->contrast;
        m["color"] = response.measurements->color;
        m["sharpness"] = response.measurements->sharpness;
        j["measurements"] = std::move(m);
    }
    if (response.virtual_ms) j["virtual_ms"] = *response.virtual_ms;
    if (response.effective_ms) j["effective_ms"] = *response.effective_ms;
    if (response.error) j["error"] = *response.error;
    return dump_line(j);
}

Response decode_response(std::string_view line) {
    const json j = parse_strict(line);
    if (!j.is_object()) throw ParseError("response must be a JSON object");
    check_keys(j, {"seq", "status", "settings", "measurements", "virtual_ms",
                   "effective_ms", "error"});
    Response r;
    r.seq = seq_from_json(j);
    if (!j.contains("status") || !j["status"].is_string())
        throw ParseError("missing status");
    const auto status = j["status"].get<std::string>();
    if (status == "OK") r.ok = true;
    else if (status == "ERROR") r.ok = false;
    else throw ParseError("unknown status '" + status + "'");
    if (j.contains("settings")) r.settings = settings_from_json(j["settings"]);
    if (j.contains("measurements")) {
        const auto& m = j["measurements"];
        check_keys(m, {"brightness", "contrast", "color", "sharpness"});
        FrameMeasurements fm;
        for (const char* k : {"brightness", "contrast", "color", "sharpness"})
            if (!m.contains(k) || !m[k].is_number())
                throw ParseError("incomplete measurements payload");
        fm.brightness = m["brightness"].get<double>();
        fm.contrast = m["contrast"].get<double>();
        fm.color = m["color"].get<double>();
        fm.sharpness = m["sharpness"].get<double>();
        r.measurements = fm;
    }
    if (j.contains("virtual_ms")) r.virtual_ms = j["virtual_ms"].get<double>();
    if (j.contains("effective_ms")) r.effective_ms = j["effective_ms"].get<double>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    return r;
}

// ---------------------------------------------------------------------------
// Camera state machine
// ---------------------------------------------------------------------------

VirtualCamera::VirtualCamera(ScenarioConfig scenario, LatencyModel latency,
                             ClockMode mode)
    : scenario_(std::move(scenario)), latency_(latency), mode_(mode),
      wall_start_(std::chrono::steady_clock::now()) {
    scenario_.validate();
    latency_.validate();
}

double VirtualCamera::clock_unlocked() {
    if (mode_ == ClockMode::Virtual) return virtual_ms_;
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - wall_start_)
        .count();
}

void VirtualCamera::drain_applies(double now) {
    std::size_t applied = 0;
    for (; applied < queue_.size(); ++applied) {
        if (queue_[applied].effective_ms > now) break;
        effective_ = queue_[applied].settings; // FIFO: last writer wins
    }
    queue_.erase(queue_.begin(),
                 queue_.begin() + static_cast<std::ptrdiff_t>(applied));
}

double VirtualCamera::now_ms() {
    std::lock_guard lock(mu_);
    return clock_unlocked();
}

Response VirtualCamera::handle(const Request& request) {
    std::lock_guard lock(mu_);
    Response resp;
    resp.seq = request.seq;

    if (mode_ == ClockMode::Virtual) virtual_ms_ += request.advance_ms;
    double now = clock_unlocked();

    switch (request.op) {
        case Op::SetParams: {
            if (!request.settings) {
                resp.error = "SET_PARAMS requires a settings payload";
                return resp;
            }
            drain_applies(now);
            const double effective_at = now + latency_.set_params_ms;
            queue_.push_back(PendingApply{effective_at, *request.settings});
            resp.ok = true;
            resp.effective_ms = effective_at;
            return resp;
        }
        case Op::GetParams: {
            drain_applies(now);
            resp.ok = true;
            resp.settings = effective_;
            return resp;
        }
        case Op::GetFrame: {
            if (mode_ == ClockMode::Virtual) virtual_ms_ += latency_.frame_upload_ms;
            now = clock_unlocked();
            drain_applies(now);
            const int pidx = scenario_.phase_index_at(frame_counter_);
            const Frame captured = capture(latent_.at(scenario_, pidx), effective_);
            ++frame_counter_;
            resp.ok = true;
            resp.measurements = measure(captured);
            resp.virtual_ms = now;
            return resp;
        }
    }
    resp.error = "unhandled op";
    return resp;
}

// ---------------------------------------------------------------------------
// Connection handling
// ---------------------------------------------------------------------------

Response RequestProcessor::process(std::string_view line) {
    std::int64_t seq = -1;
    try {
        const json j = parse_strict(line);
        if (j.is_object() && j.contains("seq") && j["seq"].is_number_integer())
            seq = j["seq"].get<std::int64_t>();
        const Request request = decode_request(line);
        if (last_seq_ && request.seq <= *last_seq_) {
            Response resp;
            resp.seq = request.seq;
            resp.error = "sequence numbers must strictly increase";
            return resp;
        }
        last_seq_ = request.seq;
        return camera_.handle(request);
    } catch (const ParseError& e) {
        Response resp;
        resp.seq = seq;
        resp.error = e.what();
        return resp;
    }
}

CameraServer::CameraServer(VirtualCamera& camera) : camera_(camera) {}

CameraServer::~CameraServer() { stop(); }

int CameraServer::start(const std::string& host, int port) {
    if (listen_fd_ >= 0) throw ConfigError("server already started");
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError("socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw ConfigError("bad listen address '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw IoError("cannot bind/listen on " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
}

void CameraServer::accept_loop() {
    while (true) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        std::lock_guard lock(conn_mu_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        conn_fds_.push_back(fd);
        conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void CameraServer::serve_connection(int fd) {
    RequestProcessor processor(camera_);
    std::string buffer;
    char chunk[4096];
    while (true) {
        const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            std::string out;
            try {
                out = encode(processor.process(line)) + "\n";
            } catch (const std::exception&) {
                out = "{\"seq\":-1,\"status\":\"ERROR\",\"error\":\"internal error\"}\n";
            }
            std::size_t sent = 0;
            while (sent < out.size()) {
                const auto w = ::send(fd, out.data() + sent, out.size() - sent, 0);
                if (w <= 0) return;
                sent += static_cast<std::size_t>(w);
            }
        }
    }
    ::close(fd);
}

void CameraServer::stop() {
    {
        std::lock_guard lock(conn_mu_);
        if (stopping_ && listen_fd_ < 0) return;
        stopping_ = true;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    {
        std::lock_guard lock(conn_mu_);
        for (const int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : conn_threads_) t.join();
    conn_threads_.clear();
    conn_fds_.clear();
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

ProtoClient::~ProtoClient() { close(); }

void ProtoClient::connect(const std::string& host, int port) {
    close();
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw IoError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
        ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw IoError("cannot connect to " + host + ":" + std::to_string(port));
    }
    buffer_.clear();
}

void ProtoClient::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::string ProtoClient::read_line() {
    while (true) {
        const std::size_t pos = buffer_.find('\n');
        if (pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            return line;
        }
        char chunk[4096];
        const auto n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0) throw IoError("connection closed by peer");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string ProtoClient::exchange_line(const std::string& line) {
    if (fd_ < 0) throw IoError("client not connected");
    std::string out = line;
    out += '\n';
    std::size_t sent = 0;
    while (sent < out.size()) {
        const auto w = ::send(fd_, out.data() + sent, out.size() - sent, 0);
        if (w <= 0) throw IoError("send failed");
        sent += static_cast<std::size_t>(w);
    }
    return read_line();
}

Response ProtoClient::call(const Request& request) {
    return decode_response(exchange_line(encode(request)));
}

// ---------------------------------------------------------------------------
// Protocol-backed control environment
// ---------------------------------------------------------------------------

ProtoEnv::ProtoEnv(ProtoClient& client, ScenarioConfig scenario,
                   std::uint64_t run_seed, double step_period_ms,
                   LatencyModel latency)
    : client_(client), scenario_(std::move(scenario)), latency_(latency),
      period_ms_(step_period_ms) {
    scenario_.validate();
    latency_.validate();
    if (period_ms_ < 0) throw ConfigError("step period must be >= 0");
    names_ = scenario_.au_names();
    for (const auto& name : names_)
        au_rngs_.emplace_back(Rng::derive(run_seed, "est:" + name));
}

Response ProtoEnv::call_checked(Request request) {
    request.seq = ++seq_;
    const Response resp = client_.call(request);
    if (!resp.ok)
        throw IoError("camera error: " + resp.error.value_or("unknown"));
    if (resp.seq != request.seq) throw IoError("sequence mismatch in response");
    return resp;
}

Observation ProtoEnv::observe(const FrameMeasurements& m,
                              const CameraSettings& applied) {
    const int pidx = scenario_.phase_index_at(t_);
    const PhaseSpec& phase = scenario_.phases[static_cast<std::size_t>(pidx)];
    Observation obs;
    obs.t = t_;
    obs.phase_index = pidx;
    obs.phase = phase.name;
    obs.applied = applied;
    obs.measurements = m;
    // estimators run client side off the shared scenario; the synthetic
    // surface never reads pixels, so no frame crosses the wire
    const Frame no_frame;
    for (std::size_t i = 0; i < scenario_.au_profiles.size(); ++i) {
        const auto& au = scenario_.au_profiles[i];
        obs.true_quality.push_back(true_accuracy(au, applied, phase));
        obs.estimates.push_back(estimate(au, no_frame, applied, phase,
                                         scenario_.estimator_noise_sigma,
                                         au_rngs_[i])
                                    .score);
    }
    obs.object_counts = scenario_.object_counts[static_cast<std::size_t>(pidx)];
    return obs;
}

Observation ProtoEnv::reset() {
    // the camera's scene index only moves forward; a second reset would
    // silently desynchronize client time from the server's frame counter
    if (seq_ > 0)
        throw ConfigError("ProtoEnv cannot rewind a live camera; reconnect to a fresh server");
    t_ = 0;
    Request frame_req;
    frame_req.op = Op::GetFrame;
    const Response frame = call_checked(frame_req);
    Request params_req;
    params_req.op = Op::GetParams;
    const Response params = call_checked(params_req);
    return observe(*frame.measurements, *params.settings);
}

Observation ProtoEnv::step(const CameraSettings& settings) {
    Request set_req;
    set_req.op = Op::SetParams;
    set_req.settings = settings;
    call_checked(set_req);

    Request frame_req;
    frame_req.op = Op::GetFrame;
    frame_req.advance_ms = std::max(0.0, period_ms_ - latency_.frame_upload_ms);
    const Response frame = call_checked(frame_req);

    Request params_req;
    params_req.op = Op::GetParams;
    const Response params = call_checked(params_req);

    ++t_;
    return observe(*frame.measurements, *params.settings);
}

} // namespace elixir
