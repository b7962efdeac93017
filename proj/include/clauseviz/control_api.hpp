#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "clauseviz/session.hpp"
#include "clauseviz/transport.hpp"

namespace clauseviz {

/// Reply to a command plus the HTTP status it maps to.
struct CommandReply {
    int http_status = 200;
    nlohmann::json body;
};

/// Runs one control command ({"cmd": ...}) against the session. Malformed
/// requests produce {"ok": false, "error": {"code", "message"}} and leave the
/// session untouched.
CommandReply execute_command(Session& session, const nlohmann::json& request);

/// Drives a session at its frame rate on a dedicated thread. Commands from
/// other threads are queued and applied between ticks, so the loop thread is
/// the only one touching the session.
class SessionRunner {
public:
    explicit SessionRunner(Session& session);
    ~SessionRunner();
    SessionRunner(const SessionRunner&) = delete;
    SessionRunner& operator=(const SessionRunner&) = delete;

    void start();
    void stop();
    bool running() const { return running_; }

    /// Queues the command and waits for its reply.
    CommandReply command(const nlohmann::json& request);

    /// Latest published frame and its serial number (bumped on every change).
    std::pair<std::shared_ptr<const FrameState>, std::uint64_t> latest() const;
    /// Waits until the serial exceeds `serial`, the runner stops, or the
    /// timeout passes. Returns the current serial.
    std::uint64_t wait_update(std::uint64_t serial, std::chrono::milliseconds timeout) const;
    /// Notices with sequence >= from; `from` is advanced past the returned ones.
    std::vector<std::string> notices_since(std::uint64_t& from) const;
    /// Current playback status as last published.
    PlaybackStatus status() const;

private:
    struct Pending {
        nlohmann::json request;
        std::promise<CommandReply> reply;
    };

    void loop();
    void publish();

    Session& session_;
    std::thread thread_;
    std::atomic<bool> running_{false};
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::condition_variable wake_;
    std::deque<Pending> queue_;
    std::shared_ptr<const FrameState> frame_;
    std::uint64_t serial_ = 0;
    std::deque<std::string> notices_;
    std::uint64_t notice_base_ = 0;
};

/// HTTP control surface:
///   POST /api/command   JSON command, JSON reply
///   GET  /api/state     session summary
///   GET  /api/frame     full current frame
///   GET  /api/stream    Server-Sent Events: "frame" and "notice" events
class ControlServer {
public:
    ControlServer(SessionRunner& runner, const Endpoint& bind_address);
    ~ControlServer();
    ControlServer(const ControlServer&) = delete;
    ControlServer& operator=(const ControlServer&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_ = 0;
};

}  // namespace clauseviz
