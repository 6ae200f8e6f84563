#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "elixir/camsim.hpp"
#include "elixir/morl.hpp"
#include "elixir/scenario.hpp"
#include "elixir/settings.hpp"

namespace elixir {

// Mock camera control plane: newline-delimited JSON over TCP, one request
// per line, one response per line. Three operations:
//
//   SET_PARAMS — schedule new settings; they take effect set_params_ms later
//   GET_PARAMS — read the currently effective settings
//   GET_FRAME  — advance per the latency model, capture, return measurements
//
// Requests may carry `advance_ms` to move the virtual clock forward before
// the operation executes; that is how a client models its own think time and
// how tests position the clock deterministically. Wall-clock mode ignores it.

// Measured latencies of the real deployment, used as virtual-clock charges.
struct LatencyModel {
    double set_params_ms = 200.0;  // camera settings change
    double frame_upload_ms = 39.7; // frame upload per GET_FRAME
    double estimator_ms = 48.0;    // all AU estimators, client side
    double aggregate_ms = 1.0;     // aggregation update, client side

    double control_step_ms() const {
        return set_params_ms + frame_upload_ms + estimator_ms + aggregate_ms;
    }
    void validate() const; // throws ConfigError on negative charges
};

enum class Op { SetParams, GetParams, GetFrame };

const char* op_name(Op op);
Op parse_op(std::string_view name);

struct Request {
    Op op = Op::GetParams;
    std::int64_t seq = 0;
    std::optional<CameraSettings> settings; // SET_PARAMS payload
    double advance_ms = 0.0;

    bool operator==(const Request&) const = default;
};

struct Response {
    std::int64_t seq = -1;
    bool ok = false;
    std::optional<CameraSettings> settings;        // GET_PARAMS
    std::optional<FrameMeasurements> measurements; // GET_FRAME
    std::optional<double> virtual_ms;              // GET_FRAME
    std::optional<double> effective_ms;            // SET_PARAMS ack
    std::optional<std::string> error;

    bool operator==(const Response&) const = default;
};

// One JSON object per line, UTF-8, no embedded newlines; duplicate keys and
// trailing bytes are decode errors; decode(encode(m)) == m bit-exactly
// (numbers are shortest round-trip decimals).
std::string encode(const Request& request);
std::string encode(const Response& response);
Request decode_request(std::string_view line);   // throws ParseError
Response decode_response(std::string_view line); // throws ParseError

enum class ClockMode { Virtual, Wall };

// The camera state machine behind the protocol. All mutations are funneled
// through one mutex (the serialized apply queue); concurrent connections may
// call handle() freely.
class VirtualCamera {
public:
    VirtualCamera(ScenarioConfig scenario, LatencyModel latency = {},
                  ClockMode mode = ClockMode::Virtual);

    Response handle(const Request& request);

    // current virtual time, for tests and logging
    double now_ms();

private:
    void drain_applies(double now);
    double clock_unlocked();

    std::mutex mu_;
    ScenarioConfig scenario_;
    LatencyModel latency_;
    ClockMode mode_;
    double virtual_ms_ = 0.0;
    std::chrono::steady_clock::time_point wall_start_;
    CameraSettings effective_{};
    struct PendingApply {
        double effective_ms;
        CameraSettings settings;
    };
    std::vector<PendingApply> queue_;
    std::int64_t frame_counter_ = 0;
    LatentCache latent_;
};

// Per-connection request handling: decode, enforce strictly increasing
// sequence numbers, dispatch to the camera. Malformed input yields an ERROR
// response (seq -1) and leaves the connection usable.
class RequestProcessor {
public:
    explicit RequestProcessor(VirtualCamera& camera) : camera_(camera) {}

    Response process(std::string_view line);

private:
    VirtualCamera& camera_;
    std::optional<std::int64_t> last_seq_;
};

// Minimal TCP server: one accept loop, one thread per connection, shared
// VirtualCamera.
class CameraServer {
public:
    explicit CameraServer(VirtualCamera& camera);
    ~CameraServer();

    // Binds and starts serving; port 0 picks an ephemeral port. Returns the
    // bound port.
    int start(const std::string& host, int port);
    void stop();
    int port() const { return port_; }

private:
    void accept_loop();
    void serve_connection(int fd);

    VirtualCamera& camera_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::vector<int> conn_fds_;
    std::vector<std::thread> conn_threads_;
    bool stopping_ = false;
};

// Blocking line-oriented client.
class ProtoClient {
public:
    ProtoClient() = default;
    ~ProtoClient();
    ProtoClient(const ProtoClient&) = delete;
    ProtoClient& operator=(const ProtoClient&) = delete;

    void connect(const std::string& host, int port); // throws IoError
    void close();
    bool connected() const { return fd_ >= 0; }

    Response call(const Request& request); // throws IoError / ParseError

    // raw exchange, for robustness tests
    std::string exchange_line(const std::string& line);

private:
    int fd_ = -1;
    std::string buffer_;
    std::string read_line();
};

// Control environment speaking the camera protocol. Each step issues
// SET_PARAMS, advances the virtual clock by the step period, captures via
// GET_FRAME and confirms the effective settings via GET_PARAMS. Estimates
// are computed client side from the shared scenario (the wire carries
// measurements only). With step_period_ms >= LatencyModel::control_step_ms()
// the traces match the in-process environment exactly.
class ProtoEnv : public ControlEnv {
public:
    ProtoEnv(ProtoClient& client, ScenarioConfig scenario, std::uint64_t run_seed,
             double step_period_ms, LatencyModel latency = {});

    const std::vector<std::string>& au_names() const override { return names_; }
    // Valid once per camera lifetime: the remote scene cannot be rewound.
    Observation reset() override;
    Observation step(const CameraSettings& settings) override;

private:
    Observation observe(const FrameMeasurements& m, const CameraSettings& applied);
    Response call_checked(Request request);

    ProtoClient& client_;
    ScenarioConfig scenario_;
    std::vector<std::string> names_;
    std::vector<Rng> au_rngs_;
    LatencyModel latency_;
    double period_ms_;
    std::int64_t t_ = 0;
    std::int64_t seq_ = 0;
};

} // namespace elixir
