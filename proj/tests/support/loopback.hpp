#pragma once

// Scripted websocket clients for loopback tests against serve_session.

#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "dyad/agents.hpp"
#include "dyad/protocol.hpp"
#include "dyad/record_io.hpp"
#include "dyad/server.hpp"

namespace loopback {

namespace beast = boost::beast;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class Client {
public:
    explicit Client(unsigned short port) : ws_(ioc_) {
        tcp::resolver resolver(ioc_);
        net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1", "/");
        ws_.text(true);
    }

    void send(dyad::wire::Body body) { send_raw(dyad::wire::encode({seq_.next(), std::move(body)})); }
    void send_raw(const std::string& text) { ws_.write(net::buffer(text)); }

    /// Next message, or nullopt once the server closed the connection.
    std::optional<dyad::wire::Message> receive() {
        beast::flat_buffer buffer;
        beast::error_code ec;
        ws_.read(buffer, ec);
        if (ec) return std::nullopt;
        return dyad::wire::decode(beast::buffers_to_string(buffer.data()));
    }

    void close() {
        beast::error_code ec;
        ws_.close(beast::websocket::close_code::normal, ec);
    }

    /// Drops the TCP connection without a websocket close handshake.
    void drop() {
        beast::error_code ec;
        ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
        ws_.next_layer().close(ec);
    }

private:
    net::io_context ioc_;
    beast::websocket::stream<tcp::socket> ws_;
    dyad::wire::SeqCounter seq_;
};

/// Server running on a background thread; the port is known once the constructor returns.
class ServerThread {
public:
    ServerThread(dyad::SessionPlan plan, dyad::GameConfig config, dyad::ServerOptions options)
        : plan_(std::move(plan)), config_(std::move(config)), options_(std::move(options)) {
        options_.bind = "127.0.0.1:0";
        std::promise<unsigned short> port;
        auto port_ready = port.get_future();
        options_.on_listening = [&port](unsigned short p) { port.set_value(p); };
        result_ = std::async(std::launch::async, [this] { return dyad::serve_session(plan_, config_, options_); });
        port_ = port_ready.get();
    }

    unsigned short port() const { return port_; }
    int wait() { return result_.get(); }

private:
    dyad::SessionPlan plan_;
    dyad::GameConfig config_;
    dyad::ServerOptions options_;
    std::future<int> result_;
    unsigned short port_ = 0;
};

struct ReplayScript {
    std::string dyad_id;
    dyad::Role role = dyad::Role::PPS;
    dyad::Device device = dyad::Device::Joystick;
    std::filesystem::path log_root;  // headless output root holding <dyad>/block*/trial*.jsonl and surveys
    std::optional<std::pair<int, int>> drop_at;  // (block, index): disconnect once this trial starts
};

struct ReplayOutcome {
    int trials_started = 0;
    int surveys_answered = 0;
    int state_updates = 0;
    int state_updates_before_start = 0;
    int errors = 0;
    bool dropped = false;
};

/// Joins as `role`, answers every prompt with the logged answer and sends the logged commands of
/// every trial as Inputs with client_tick 0..n-1. Returns when the server closes the connection.
inline ReplayOutcome run_replay(unsigned short port, const ReplayScript& script) {
    using namespace dyad;
    ReplayOutcome out;
    Client c(port);
    c.send(wire::ClientHello{script.dyad_id, script.role, script.device, wire::kProtocolVersion});
    const int avatar = script.role == Role::PPS ? 0 : 1;
    bool in_trial = false;
    while (auto m = c.receive()) {
        if (auto* prompt = std::get_if<wire::SurveyPrompt>(&m->body)) {
            SurveyRecord key{participant_id(script.dyad_id, script.role), prompt->position, prompt->instrument, {}};
            const auto logged =
                survey_from_json(nlohmann::json::parse(read_text(survey_path(script.log_root, script.dyad_id, key))));
            c.send(wire::SurveyAnswer{prompt->instrument, logged.item_scores});
            ++out.surveys_answered;
        } else if (auto* control = std::get_if<wire::TrialControl>(&m->body)) {
            if (control->action == wire::TrialControl::Action::End) {
                in_trial = false;
                continue;
            }
            in_trial = true;
            ++out.trials_started;
            const auto meta = meta_from_json(control->trial);
            if (script.drop_at && *script.drop_at == std::pair{meta.block, meta.index}) {
                c.drop();
                out.dropped = true;
                return out;
            }
            const auto logged = load_trial(trial_path(script.log_root, script.dyad_id, meta.block, meta.index));
            const auto commands = logged_commands(logged, avatar);
            for (std::size_t t = 0; t < commands.size(); ++t) {
                wire::InputPayload p;
                p.kind = wire::PayloadKind::Command;
                p.direction = commands[t];
                c.send(wire::Input{static_cast<int>(t), p});
            }
        } else if (std::holds_alternative<wire::StateUpdate>(m->body)) {
            ++out.state_updates;
            if (!in_trial) ++out.state_updates_before_start;
        } else if (std::holds_alternative<wire::Error>(m->body)) {
            ++out.errors;
        }
    }
    return out;
}

/// Relative path to contents for every regular file below `root`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = dyad::read_text(e.path());
    return out;
}

}  // namespace loopback
