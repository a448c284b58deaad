#include "dyad/server.hpp"

#include <array>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "dyad/metrics.hpp"
#include "dyad/record_io.hpp"

namespace dyad {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

void apply_env_overrides(ServerOptions& options) {
    if (const char* bind = std::getenv("DYAD_BIND"); bind && *bind) options.bind = bind;
    if (const char* out = std::getenv("DYAD_OUT"); out && *out) options.out_dir = out;
}

std::pair<std::string, unsigned short> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size())
        throw ConfigError("bind address must be host:port, got '" + bind + "'");
    const std::string port_text = bind.substr(colon + 1);
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw ConfigError("bad port in bind address '" + bind + "'");
    return {bind.substr(0, colon), static_cast<unsigned short>(port)};
}

namespace {

bool payload_matches(Device device, wire::PayloadKind kind) {
    switch (kind) {
        case wire::PayloadKind::Command: return true;
        case wire::PayloadKind::Pedal: return device == Device::Pedal;
        case wire::PayloadKind::Keys: return device == Device::Keyboard;
        case wire::PayloadKind::Imu:
        case wire::PayloadKind::Roll: return device == Device::Joystick;
    }
    return false;
}

}  // namespace

LateralCommand InputTranslator::translate(const wire::InputPayload& p) {
    if (!payload_matches(device_, p.kind))
        throw InputError("input payload does not match device " + std::string(to_string(device_)));
    switch (p.kind) {
        case wire::PayloadKind::Command:
            if (p.direction < -1 || p.direction > 1) throw InputError("direction must be -1, 0 or 1");
            return {p.direction, InputSource::Agent};
        case wire::PayloadKind::Pedal: return pedal_map(p.pedal);
        case wire::PayloadKind::Keys: return keyboard_map(p.keys);
        case wire::PayloadKind::Roll: return joystick_map(p.roll_deg, config_);
        case wire::PayloadKind::Imu: {
            double dt = config_.dt();
            if (last_imu_t_) {
                if (!(p.imu.t > *last_imu_t_)) throw InputError("IMU timestamps must be strictly increasing");
                dt = p.imu.t - *last_imu_t_;
            }
            orientation_ = mahony_update(orientation_, p.imu, dt);
            last_imu_t_ = p.imu.t;
            return joystick_map(roll_angle(orientation_.q), config_);
        }
    }
    throw InputError("unknown payload");
}

LateralCommand translate_input(InputTranslator& translator, const wire::InputPayload& payload) {
    return translator.translate(payload);
}

namespace {

struct Event {
    enum class Kind { Open, Text, Closed };
    Kind kind = Kind::Text;
    int conn = 0;
    std::string text;
};

// Connection handlers push here; the session loop is the only consumer.
class Inbox {
public:
    void push(Event e) {
        {
            std::lock_guard lock(mutex_);
            events_.push_back(std::move(e));
        }
        cv_.notify_one();
    }

    /// Next event, or nullopt once `deadline` passes with nothing queued.
    std::optional<Event> pop(std::optional<Clock::time_point> deadline) {
        std::unique_lock lock(mutex_);
        if (deadline) {
            if (!cv_.wait_until(lock, *deadline, [&] { return !events_.empty(); })) return std::nullopt;
        } else {
            cv_.wait(lock, [&] { return !events_.empty(); });
        }
        Event e = std::move(events_.front());
        events_.pop_front();
        return e;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Event> events_;
};

// Lives on the io thread.
class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, int id, Inbox& inbox) : ws_(std::move(socket)), id_(id), inbox_(inbox) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
    }

    void send(std::string text) {
        if (closing_) return;
        outbox_.push_back(std::move(text));
        if (!writing_) write_next();
    }

    void close() {
        close_requested_ = true;
        if (!writing_) do_close();
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        opened_ = true;
        inbox_.push({Event::Kind::Open, id_, {}});
        read();
    }

    void read() { ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            report_closed();
            return;
        }
        inbox_.push({Event::Kind::Text, id_, beast::buffers_to_string(buffer_.data())});
        buffer_.consume(buffer_.size());
        read();
    }

    void write_next() {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()),
                        beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        if (ec) {
            outbox_.clear();
            report_closed();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) write_next();
        else if (close_requested_) do_close();
    }

    void do_close() {
        if (closing_ || !opened_) return;
        closing_ = true;
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    }

    void report_closed() {
        if (opened_ && !closed_reported_) {
            closed_reported_ = true;
            inbox_.push({Event::Kind::Closed, id_, {}});
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    int id_;
    Inbox& inbox_;
    bool opened_ = false;
    bool writing_ = false;
    bool close_requested_ = false;
    bool closing_ = false;
    bool closed_reported_ = false;
};

// Lives on the io thread; the session loop reaches it only through net::post.
class Listener {
public:
    Listener(net::io_context& ioc, const tcp::endpoint& endpoint, Inbox& inbox)
        : ioc_(ioc), acceptor_(ioc), inbox_(inbox) {
        acceptor_.open(endpoint.protocol());
        acceptor_.set_option(net::socket_base::reuse_address(true));
        acceptor_.bind(endpoint);
        acceptor_.listen();
    }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void accept() {
        acceptor_.async_accept(ioc_, [this](beast::error_code ec, tcp::socket socket) {
            if (!ec) {
                auto conn = std::make_shared<Connection>(std::move(socket), next_id_, inbox_);
                connections_[next_id_++] = conn;
                conn->start();
            }
            if (acceptor_.is_open()) accept();
        });
    }

    void send(int id, std::string text) {
        if (auto conn = find(id)) conn->send(std::move(text));
    }

    void close(int id) {
        if (auto conn = find(id)) conn->close();
    }

    void shutdown() {
        beast::error_code ec;
        acceptor_.close(ec);
        for (auto& [id, weak] : connections_)
            if (auto conn = weak.lock()) conn->close();
    }

private:
    std::shared_ptr<Connection> find(int id) {
        auto it = connections_.find(id);
        return it == connections_.end() ? nullptr : it->second.lock();
    }

    net::io_context& ioc_;
    tcp::acceptor acceptor_;
    Inbox& inbox_;
    int next_id_ = 1;
    std::map<int, std::weak_ptr<Connection>> connections_;
};

struct ConnInfo {
    wire::SeqCounter out;
    wire::SeqChecker in;
    std::optional<Role> role;
    bool rejected = false;  // closing; later messages are ignored
};

struct Prompt {
    std::string position;
    Instrument instrument = Instrument::IMI;
};

struct Seat {
    int conn = -1;
    Device device = Device::Keyboard;
    std::optional<InputTranslator> translator;
    std::deque<std::pair<int, int>> pending;  // (client_tick, direction)
    int max_client_tick = -1;
    int direction = 0;
    std::optional<Prompt> prompt;
    std::optional<std::vector<int>> answer;

    bool joined() const { return conn >= 0; }
};

std::size_t seat_index(Role r) { return r == Role::PPS ? 0 : 1; }

// The session loop: sole owner of game state, seats and persistence.
class SessionHost {
public:
    SessionHost(const SessionPlan& plan, const GameConfig& config, const ServerOptions& options, Inbox& inbox,
                net::io_context& ioc, Listener& listener)
        : plan_(plan), config_(config), options_(options), inbox_(inbox), ioc_(ioc), listener_(listener) {}

    int run() {
        const auto& out = options_.out_dir;
        std::filesystem::create_directories(dyad_dir(out, plan_.dyad_id));
        write_text(plan_path(out, plan_.dyad_id), plan_to_json(plan_).dump(2) + "\n");
        write_text(dyad_dir(out, plan_.dyad_id) / "config.json", config_to_json(config_).dump(2) + "\n");

        while (!(seats_[0].joined() && seats_[1].joined())) handle(*inbox_.pop(std::nullopt));
        started_ = true;

        using K = CheckpointSpec::Kind;
        if (!checkpoints(K::SessionStart, 0)) return kServeAborted;
        for (const auto& block : plan_.blocks) {
            if (!checkpoints(K::BeforeBlock, block.number)) return kServeAborted;
            for (const auto& tp : block.trials) {
                const auto path = trial_path(out, plan_.dyad_id, tp.block, tp.index);
                if (std::filesystem::exists(path) && load_trial(path).complete) continue;
                if (!play(tp, path)) return kServeAborted;
            }
            if (!checkpoints(K::AfterBlock, block.number)) return kServeAborted;
        }
        if (!checkpoints(K::SessionEnd, 0)) return kServeAborted;
        return kServeComplete;
    }

    void close_all() {
        for (const auto& [id, info] : conns_) net::post(ioc_, [this, id = id] { listener_.close(id); });
    }

private:
    Seat& seat(Role r) { return seats_[seat_index(r)]; }

    void send(int conn, wire::Body body) {
        auto it = conns_.find(conn);
        if (it == conns_.end()) return;
        std::string text = wire::encode({it->second.out.next(), std::move(body)});
        net::post(ioc_, [this, conn, text = std::move(text)]() mutable { listener_.send(conn, std::move(text)); });
    }

    void send_error(int conn, std::string code, std::string message) {
        send(conn, wire::Error{std::move(code), std::move(message)});
    }

    void reject(int conn, std::string code, std::string message) {
        send_error(conn, std::move(code), std::move(message));
        if (auto it = conns_.find(conn); it != conns_.end()) it->second.rejected = true;
        net::post(ioc_, [this, conn] { listener_.close(conn); });
    }

    void broadcast(const wire::Body& body) {
        for (const auto& s : seats_)
            if (s.joined()) send(s.conn, body);
    }

    void handle(const Event& e) {
        switch (e.kind) {
            case Event::Kind::Open: conns_[e.conn]; break;
            case Event::Kind::Closed: {
                auto it = conns_.find(e.conn);
                if (it == conns_.end()) break;
                if (it->second.role) {
                    seat(*it->second.role) = Seat{};
                    if (started_) dropped_ = it->second.role;
                }
                conns_.erase(it);
                break;
            }
            case Event::Kind::Text: on_text(e.conn, e.text); break;
        }
    }

    void on_text(int conn, const std::string& text) {
        auto it = conns_.find(conn);
        if (it == conns_.end() || it->second.rejected) return;
        wire::Message m;
        try {
            m = wire::decode(text);
            it->second.in.accept(m.seq);
        } catch (const ProtocolError& err) {
            send_error(conn, "malformed", err.what());
            return;
        }
        if (auto* hello = std::get_if<wire::ClientHello>(&m.body)) on_hello(conn, it->second, *hello);
        else if (auto* input = std::get_if<wire::Input>(&m.body)) on_input(conn, it->second, *input);
        else if (auto* answer = std::get_if<wire::SurveyAnswer>(&m.body)) on_answer(conn, it->second, *answer);
        else send_error(conn, "unexpected_type", std::string(wire::type_name(m.body)) + " is not accepted by the server");
    }

    void on_hello(int conn, ConnInfo& info, const wire::ClientHello& h) {
        if (info.role) return send_error(conn, "already_joined", "this connection already joined");
        if (h.protocol_version != wire::kProtocolVersion)
            return reject(conn, "version_mismatch", "server speaks protocol version " +
                                                        std::to_string(wire::kProtocolVersion));
        if (h.dyad_id != plan_.dyad_id) return reject(conn, "wrong_dyad", "this server hosts dyad " + plan_.dyad_id);
        if (seats_[0].joined() && seats_[1].joined()) return reject(conn, "session_full", "both roles are taken");
        if (seat(h.role).joined())
            return reject(conn, "role_taken", std::string(to_string(h.role)) + " has already joined");
        const bool device_ok = h.role == Role::PPS ? h.device == Device::Joystick
                                                   : (h.device == Device::Pedal || h.device == Device::Keyboard);
        if (!device_ok)
            return reject(conn, "device_mismatch",
                          std::string(to_string(h.device)) + " is not a device of the " + std::string(to_string(h.role)));
        info.role = h.role;
        Seat& s = seat(h.role);
        s.conn = conn;
        s.device = h.device;
        s.translator.emplace(h.device, config_);
        send(conn, wire::make_hello_ack(plan_, config_));
    }

    void on_input(int conn, const ConnInfo& info, const wire::Input& in) {
        if (!info.role) return send_error(conn, "not_joined", "send ClientHello first");
        if (!trial_running_) return;
        Seat& s = seat(*info.role);
        if (!payload_matches(s.translator->device(), in.payload.kind))
            return send_error(conn, "device_mismatch",
                              "payload does not match device " + std::string(to_string(s.translator->device())));
        try {
            const auto cmd = s.translator->translate(in.payload);
            s.pending.emplace_back(in.client_tick, cmd.direction);
            s.max_client_tick = std::max(s.max_client_tick, in.client_tick);
        } catch (const InputError& err) {
            send_error(conn, "bad_input", err.what());
        }
    }

    void on_answer(int conn, const ConnInfo& info, const wire::SurveyAnswer& a) {
        if (!info.role) return send_error(conn, "not_joined", "send ClientHello first");
        Seat& s = seat(*info.role);
        if (!s.prompt || s.answer) return send_error(conn, "unexpected_answer", "no survey is pending");
        if (a.instrument != s.prompt->instrument)
            return send_error(conn, "bad_answer", "expected " + std::string(to_string(s.prompt->instrument)));
        try {
            validate_response({a.instrument, a.item_scores}, options_.instruments.at(a.instrument));
        } catch (const InputError& err) {
            return send_error(conn, "bad_answer", err.what());
        }
        s.answer = a.item_scores;
    }

    bool checkpoints(CheckpointSpec::Kind kind, int block) {
        for (const auto& cp : plan_.checkpoints)
            if (cp.kind == kind && cp.block == block && !administer(cp)) return false;
        return true;
    }

    // Both players answer their questionnaires concurrently, one instrument at a time.
    bool administer(const CheckpointSpec& cp) {
        std::array<std::deque<Instrument>, 2> todo;
        for (Role role : {Role::PPS, Role::PCG}) {
            for (Instrument inst : cp.instruments) {
                SurveyRecord rec{participant_id(plan_.dyad_id, role), cp.position(), inst, {}};
                if (!std::filesystem::exists(survey_path(options_.out_dir, plan_.dyad_id, rec)))
                    todo[seat_index(role)].push_back(inst);
            }
        }
        auto prompt_next = [&](Role role) {
            Seat& s = seat(role);
            auto& queue = todo[seat_index(role)];
            s.prompt.reset();
            s.answer.reset();
            if (queue.empty()) return;
            s.prompt = Prompt{cp.position(), queue.front()};
            send(s.conn, wire::make_survey_prompt(cp.position(), options_.instruments.at(queue.front())));
        };
        prompt_next(Role::PPS);
        prompt_next(Role::PCG);
        while (!todo[0].empty() || !todo[1].empty()) {
            handle(*inbox_.pop(std::nullopt));
            if (dropped_) return false;
            for (Role role : {Role::PPS, Role::PCG}) {
                Seat& s = seat(role);
                if (!s.answer) continue;
                SurveyRecord rec{participant_id(plan_.dyad_id, role), cp.position(), s.prompt->instrument, *s.answer};
                write_text(survey_path(options_.out_dir, plan_.dyad_id, rec), survey_to_json(rec).dump() + "\n");
                todo[seat_index(role)].pop_front();
                prompt_next(role);
            }
        }
        return true;
    }

    void pump_until(Clock::time_point deadline) {
        while (auto e = inbox_.pop(deadline)) {
            handle(*e);
            if (dropped_) return;
        }
    }

    bool play(const TrialPlan& tp, const std::filesystem::path& path) {
        TrialRunner runner(trial_meta(tp, config_), config_);
        for (auto& s : seats_) {
            s.pending.clear();
            s.max_client_tick = -1;
            s.direction = 0;
        }
        seat(Role::PCG).translator->set_device(tp.pcg_device);
        trial_running_ = true;
        broadcast(wire::TrialControl{wire::TrialControl::Action::Start, meta_to_json(runner.record().meta), false, {}});
        broadcast(wire::make_state_update(runner.state(), config_));

        const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.dt()));
        auto next = Clock::now();
        while (!runner.done()) {
            const int t = runner.state().tick;
            if (options_.pacing == Pacing::Realtime) {
                next += period;
                pump_until(next);
                for (auto& s : seats_) {
                    if (!s.pending.empty()) s.direction = s.pending.back().second;
                    s.pending.clear();
                }
            } else {
                auto ready = [&] { return seats_[0].max_client_tick >= t && seats_[1].max_client_tick >= t; };
                while (!dropped_ && !ready()) handle(*inbox_.pop(std::nullopt));
                for (auto& s : seats_) {
                    while (!s.pending.empty() && s.pending.front().first <= t) {
                        s.direction = s.pending.front().second;
                        s.pending.pop_front();
                    }
                }
            }
            if (dropped_) break;
            const std::array<int, 2> dirs{seats_[0].direction, seats_[1].direction};
            runner.step(dirs);
            if (runner.state().tick % options_.state_decimation == 0)
                broadcast(wire::make_state_update(runner.state(), config_));
        }
        trial_running_ = false;

        TrialRecord rec = runner.finish(dropped_.has_value());
        if (rec.complete) fill_area_errors(rec);
        write_text(path, trial_to_jsonl(rec));
        broadcast(wire::TrialControl{wire::TrialControl::Action::End, meta_to_json(rec.meta), rec.complete,
                                     rec.final_scores});
        return rec.complete;
    }

    const SessionPlan& plan_;
    const GameConfig& config_;
    const ServerOptions& options_;
    Inbox& inbox_;
    net::io_context& ioc_;
    Listener& listener_;
    std::map<int, ConnInfo> conns_;
    std::array<Seat, 2> seats_;
    bool started_ = false;
    bool trial_running_ = false;
    std::optional<Role> dropped_;
};

}  // namespace

int serve_session(const SessionPlan& plan, const GameConfig& config, const ServerOptions& options) {
    config.validate();
    validate_plan(plan);
    if (options.state_decimation < 1) throw ConfigError("state_decimation must be at least 1");
    const auto [host, port] = parse_bind(options.bind);

    net::io_context ioc;
    Inbox inbox;
    tcp::endpoint endpoint;
    try {
        endpoint = tcp::endpoint(net::ip::make_address(host), port);
    } catch (const std::exception& e) {
        throw ConfigError("bad bind host '" + host + "': " + e.what());
    }
    std::unique_ptr<Listener> listener;
    try {
        listener = std::make_unique<Listener>(ioc, endpoint, inbox);
    } catch (const boost::system::system_error& e) {
        throw ConfigError("cannot listen on " + options.bind + ": " + e.what());
    }
    listener->accept();
    if (options.on_listening) options.on_listening(listener->port());

    auto work = net::make_work_guard(ioc);
    std::promise<void> io_done;
    auto io_finished = io_done.get_future();
    std::thread io([&] {
        ioc.run();
        io_done.set_value();
    });

    SessionHost host_loop(plan, config, options, inbox, ioc, *listener);
    auto shutdown = [&] {
        host_loop.close_all();
        net::post(ioc, [&] { listener->shutdown(); });
        work.reset();
        if (io_finished.wait_for(std::chrono::seconds(2)) != std::future_status::ready) ioc.stop();
        io.join();
    };
    int status;
    try {
        status = host_loop.run();
    } catch (...) {
        shutdown();
        throw;
    }
    shutdown();
    return status;
}

}  // namespace dyad
