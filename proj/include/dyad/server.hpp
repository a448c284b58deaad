#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "dyad/config.hpp"
#include "dyad/devices.hpp"
#include "dyad/protocol.hpp"
#include "dyad/session.hpp"
#include "dyad/survey.hpp"

namespace dyad {

enum class Pacing {
    Realtime,  // ticks on a wall-clock timer, latest input per player wins
    Lockstep,  // tick T waits for every player's input with client_tick >= T
};

struct ServerOptions {
    std::string bind = "127.0.0.1:8765";  // host:port, port 0 picks a free one
    std::filesystem::path out_dir = "out";
    Pacing pacing = Pacing::Realtime;
    int state_decimation = 3;  // StateUpdate every n-th tick
    InstrumentSet instruments = default_instruments();
    std::function<void(unsigned short port)> on_listening;
};

/// DYAD_BIND and DYAD_OUT, when set, replace the bind address and output directory.
void apply_env_overrides(ServerOptions& options);

/// Splits "host:port". Throws ConfigError on a malformed address.
std::pair<std::string, unsigned short> parse_bind(const std::string& bind);

/// Exit statuses of serve_session.
inline constexpr int kServeComplete = 0;
inline constexpr int kServeAborted = 3;  // a player disconnected; rerun to resume

/// Hosts one dyad's session until every trial and checkpoint is done or a player drops.
/// Trials and survey answers already complete under options.out_dir are not repeated.
int serve_session(const SessionPlan& plan, const GameConfig& config, const ServerOptions& options);

/// Per-client device pipeline on the server. Raw IMU samples go through this client's Mahony state.
class InputTranslator {
public:
    InputTranslator(Device device, const GameConfig& config) : device_(device), config_(config) {}

    /// Throws InputError when the payload does not belong to the device or is out of range.
    LateralCommand translate(const wire::InputPayload& payload);

    Device device() const { return device_; }
    void set_device(Device d) { device_ = d; }
    const OrientationState& orientation() const { return orientation_; }

private:
    Device device_;
    GameConfig config_;
    OrientationState orientation_;
    std::optional<double> last_imu_t_;
};

LateralCommand translate_input(InputTranslator& translator, const wire::InputPayload& payload);

}  // namespace dyad
