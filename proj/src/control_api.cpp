#include "clauseviz/control_api.hpp"

#include <httplib.h>

#include "clauseviz/json_io.hpp"

namespace clauseviz {

using nlohmann::json;

namespace {

CommandReply error_reply(int status, const std::string& code, const std::string& message) {
    return {status, {{"ok", false}, {"error", {{"code", code}, {"message", message}}}}};
}

std::int64_t integer_field(const json& request, const char* key) {
    auto it = request.find(key);
    if (it == request.end() || !it->is_number_integer()) {
        throw std::invalid_argument(std::string("'") + key + "' must be an integer");
    }
    return it->get<std::int64_t>();
}

}  // namespace

CommandReply execute_command(Session& session, const json& request) {
    if (!request.is_object() || !request.contains("cmd") || !request["cmd"].is_string()) {
        return error_reply(400, "bad_request", "expected a JSON object with a string 'cmd'");
    }
    const std::string cmd = request["cmd"].get<std::string>();
    try {
        session.poll_relayout();
    } catch (const std::exception&) {
        // Reported through the "relayout_failed" notice.
    }
    try {
        json extra;
        if (cmd == "play") {
            session.play();
        } else if (cmd == "pause") {
            session.pause();
        } else if (cmd == "stop") {
            session.stop();
        } else if (cmd == "seek") {
            const std::int64_t index = integer_field(request, "index");
            if (index < 0) return error_reply(400, "out_of_range", "seek index must be non-negative");
            session.seek(static_cast<std::size_t>(index));
        } else if (cmd == "step") {
            session.step(integer_field(request, "n"));
        } else if (cmd == "relayout") {
            session.trigger_relayout();
        } else if (cmd == "set_heat_config") {
            session.set_heat_config(heat_config_from_json(request, session.config().heat));
        } else if (cmd == "get_frame") {
            extra = frame_to_json(session.frame(), true, true);
        } else if (cmd != "get_state") {
            return error_reply(400, "unknown_command", "unknown command '" + cmd + "'");
        }
        CommandReply reply{200, {{"ok", true}, {"state", state_to_json(session)}}};
        if (!extra.is_null()) reply.body["frame"] = std::move(extra);
        return reply;
    } catch (const SessionError& e) {
        if (e.kind() == SessionError::Kind::AlreadyRunning) return error_reply(409, "already_running", e.what());
        return error_reply(400, "out_of_range", e.what());
    } catch (const std::invalid_argument& e) {
        return error_reply(400, "invalid_argument", e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "internal", e.what());
    }
}

SessionRunner::SessionRunner(Session& session) : session_(session) { publish(); }

SessionRunner::~SessionRunner() { stop(); }

void SessionRunner::start() {
    if (running_.exchange(true)) return;
    thread_ = std::thread([this] { loop(); });
}

void SessionRunner::stop() {
    if (!running_.exchange(false)) return;
    wake_.notify_all();
    if (thread_.joinable()) thread_.join();
    std::lock_guard lock(mutex_);
    for (Pending& p : queue_) p.reply.set_value(error_reply(503, "stopped", "session runner stopped"));
    queue_.clear();
    changed_.notify_all();
}

CommandReply SessionRunner::command(const json& request) {
    std::future<CommandReply> reply;
    {
        std::lock_guard lock(mutex_);
        if (!running_) return error_reply(503, "stopped", "session runner is not running");
        queue_.push_back({request, {}});
        reply = queue_.back().reply.get_future();
    }
    wake_.notify_all();
    return reply.get();
}

void SessionRunner::publish() {
    auto frame = std::make_shared<const FrameState>(session_.frame());
    auto notices = session_.take_notifications();
    std::lock_guard lock(mutex_);
    const bool fresh = !frame_ || frame_->frame_index != frame->frame_index || frame_->status != frame->status ||
                       frame_->layout_generation != frame->layout_generation || frame_->cursor != frame->cursor ||
                       !notices.empty();
    if (!fresh) return;
    frame_ = std::move(frame);
    for (auto& n : notices) notices_.push_back(std::move(n));
    while (notices_.size() > 1024) {
        notices_.pop_front();
        ++notice_base_;
    }
    ++serial_;
    changed_.notify_all();
}

void SessionRunner::loop() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / session_.config().frame_rate));
    auto next = std::chrono::steady_clock::now();
    while (running_) {
        std::deque<Pending> batch;
        {
            std::unique_lock lock(mutex_);
            wake_.wait_until(lock, next, [&] { return !running_ || !queue_.empty(); });
            batch.swap(queue_);
        }
        for (Pending& p : batch) {
            p.reply.set_value(execute_command(session_, p.request));
            publish();
        }
        if (std::chrono::steady_clock::now() < next) continue;
        next += period;
        if (next < std::chrono::steady_clock::now()) next = std::chrono::steady_clock::now() + period;
        try {
            session_.poll_relayout();
        } catch (const std::exception&) {
            // Surfaced as the "relayout_failed" notice.
        }
        session_.tick();
        publish();
    }
}

std::pair<std::shared_ptr<const FrameState>, std::uint64_t> SessionRunner::latest() const {
    std::lock_guard lock(mutex_);
    return {frame_, serial_};
}

std::uint64_t SessionRunner::wait_update(std::uint64_t serial, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    changed_.wait_for(lock, timeout, [&] { return serial_ > serial || !running_; });
    return serial_;
}

std::vector<std::string> SessionRunner::notices_since(std::uint64_t& from) const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    from = std::max(from, notice_base_);
    for (std::uint64_t i = from; i < notice_base_ + notices_.size(); ++i) out.push_back(notices_[i - notice_base_]);
    from = notice_base_ + notices_.size();
    return out;
}

PlaybackStatus SessionRunner::status() const {
    std::lock_guard lock(mutex_);
    return frame_->status;
}

struct ControlServer::Impl {
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

ControlServer::ControlServer(SessionRunner& runner, const Endpoint& bind_address) : impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;
    Impl* impl = impl_.get();

    server.Post("/api/command", [&runner](const httplib::Request& req, httplib::Response& res) {
        json request;
        try {
            request = json::parse(req.body);
        } catch (const json::parse_error& e) {
            const CommandReply r = error_reply(400, "bad_request", std::string("malformed JSON: ") + e.what());
            send_json(res, r.http_status, r.body);
            return;
        }
        const CommandReply r = runner.command(request);
        send_json(res, r.http_status, r.body);
    });
    server.Get("/api/state", [&runner](const httplib::Request&, httplib::Response& res) {
        const CommandReply r = runner.command({{"cmd", "get_state"}});
        send_json(res, r.http_status, r.body);
    });
    server.Get("/api/frame", [&runner](const httplib::Request&, httplib::Response& res) {
        const CommandReply r = runner.command({{"cmd", "get_frame"}});
        send_json(res, r.http_status, r.body);
    });
    server.Get("/api/stream", [&runner, impl](const httplib::Request&, httplib::Response& res) {
        struct Cursor {
            std::uint64_t serial = 0;
            std::uint64_t notice = 0;
            std::int64_t generation = -1;
            std::int64_t position = -1;
        };
        auto cursor = std::make_shared<Cursor>();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [&runner, impl, cursor](std::size_t, httplib::DataSink& sink) {
            if (impl->stopping || !runner.running()) return false;
            runner.wait_update(cursor->serial, std::chrono::milliseconds(250));
            if (impl->stopping) return false;
            std::string chunk;
            for (const std::string& n : runner.notices_since(cursor->notice)) {
                chunk += "event: notice\ndata: " + json{{"notice", n}}.dump() + "\n\n";
            }
            auto [frame, serial] = runner.latest();
            if (serial != cursor->serial) {
                cursor->serial = serial;
                const bool geometry = static_cast<std::int64_t>(frame->layout_generation) != cursor->generation;
                const bool edges = geometry || static_cast<std::int64_t>(frame->cursor) != cursor->position;
                cursor->generation = static_cast<std::int64_t>(frame->layout_generation);
                cursor->position = static_cast<std::int64_t>(frame->cursor);
                chunk += "event: frame\ndata: " + frame_to_json(*frame, geometry, edges).dump() + "\n\n";
            }
            if (chunk.empty()) chunk = ": keepalive\n\n";
            return sink.write(chunk.data(), chunk.size());
        });
    });

    if (bind_address.port == 0) {
        const int port = server.bind_to_any_port(bind_address.host);
        if (port < 0) throw TransportError(TransportError::Kind::BindFailure, "cannot bind control API on " + bind_address.host);
        port_ = static_cast<std::uint16_t>(port);
    } else {
        if (!server.bind_to_port(bind_address.host, bind_address.port)) {
            throw TransportError(TransportError::Kind::BindFailure, "cannot bind control API on " + bind_address.to_string());
        }
        port_ = bind_address.port;
    }
    impl_->thread = std::thread([impl] { impl->server.listen_after_bind(); });
}

ControlServer::~ControlServer() { stop(); }

void ControlServer::stop() {
    if (!impl_ || impl_->stopping.exchange(true)) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace clauseviz
