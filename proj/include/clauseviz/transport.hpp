#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "clauseviz/cnf.hpp"
#include "clauseviz/wire.hpp"

namespace clauseviz {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// Parses "HOST:PORT"; throws std::invalid_argument.
    static Endpoint parse(const std::string& text);
    std::string to_string() const { return host + ":" + std::to_string(port); }
};

class TransportError : public std::runtime_error {
public:
    enum class Kind { ConnectionRefused, ConnectionLost, BindFailure, ProtocolError };

    TransportError(Kind kind, const std::string& what, std::optional<std::uint64_t> last_sequence = std::nullopt)
        : std::runtime_error(what), kind_(kind), last_sequence_(last_sequence) {}

    Kind kind() const { return kind_; }
    /// For ConnectionLost: sequence of the last event fully handed to the transport.
    std::optional<std::uint64_t> last_sequence() const { return last_sequence_; }

private:
    Kind kind_;
    std::optional<std::uint64_t> last_sequence_;
};

using EventSource = std::function<std::optional<ClauseEvent>()>;
using EventSink = std::function<void(ClauseEvent)>;

struct ProducerOptions {
    /// Events per second; 0 sends as fast as the transport accepts.
    double rate = 0.0;
    std::uint64_t num_variables_hint = 0;
    /// Bytes buffered before a flush; a flush also happens at least every 20 ms.
    std::size_t flush_bytes = 1 << 16;
};

struct ProducerOutcome {
    std::uint64_t events_sent = 0;
};

/// Sends Hello, every event of `source` in order, then Terminate. Blocking
/// sends give backpressure to the source; nothing is dropped.
ProducerOutcome run_producer(const EventSource& source, const Endpoint& endpoint, const ProducerOptions& options = {});

struct ConsumerOutcome {
    std::uint64_t events_received = 0;
    /// True when the producer sent Terminate; false when it just disconnected.
    bool terminated = false;
    std::uint64_t num_variables_hint = 0;
    std::uint64_t protocol_version = 0;
};

/// Accepts one producer at a time. The listening socket is closed for the
/// duration of a session, so concurrent connection attempts are refused by
/// the operating system; it is rebound to the same port afterwards.
class ConsumerListener {
public:
    explicit ConsumerListener(const Endpoint& bind_address);
    ~ConsumerListener();
    ConsumerListener(const ConsumerListener&) = delete;
    ConsumerListener& operator=(const ConsumerListener&) = delete;

    std::uint16_t port() const { return port_; }

    /// Serves a single producer session, delivering events in arrival order
    /// with dense sequence numbers starting at `first_sequence`. Returns
    /// nullopt if `stop` was raised before a producer connected.
    /// Throws TransportError(ProtocolError) on a decode failure; events
    /// delivered before the failure stay delivered.
    std::optional<ConsumerOutcome> serve_one(const EventSink& sink, std::uint64_t first_sequence = 0,
                                             const std::atomic<bool>* stop = nullptr);

private:
    void open_socket();

    std::string host_;
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Reads DRAT lines from a file path.
class ProofFileSource {
public:
    explicit ProofFileSource(const std::string& path);
    ~ProofFileSource();
    std::optional<ClauseEvent> operator()();

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Runs a solver command through the shell and reads DRAT-formatted lines
/// from its standard output. Lines starting with 'c', 's', 'v' or 'o' and
/// unparsable lines are skipped.
class SolverProcessSource {
public:
    explicit SolverProcessSource(const std::string& command);
    ~SolverProcessSource();
    SolverProcessSource(const SolverProcessSource&) = delete;
    SolverProcessSource& operator=(const SolverProcessSource&) = delete;

    std::optional<ClauseEvent> operator()();
    std::uint64_t skipped_lines() const { return skipped_; }
    /// Waits for the child; returns its exit status.
    int close();

private:
    std::FILE* pipe_ = nullptr;
    char* line_ = nullptr;
    std::size_t cap_ = 0;
    std::uint64_t skipped_ = 0;
};

/// Parses one DRAT text line; nullopt for blank, comment or solver status lines.
/// Throws ParseError for malformed lines.
std::optional<ClauseEvent> parse_drat_line(std::string_view line);

}  // namespace clauseviz
