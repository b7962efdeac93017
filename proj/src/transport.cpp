#include "clauseviz/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <fstream>
#include <thread>
#include <utility>

#include "clauseviz/formats.hpp"

namespace clauseviz {

namespace {

class Socket {
public:
    explicit Socket(int fd = -1) : fd_(fd) {}
    ~Socket() { reset(); }
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    int get() const { return fd_; }
    int release() { return std::exchange(fd_, -1); }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

std::string errno_text() { return std::strerror(errno); }

addrinfo* resolve(const Endpoint& ep, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string port = std::to_string(ep.port);
    const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
    if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
        throw TransportError(passive ? TransportError::Kind::BindFailure : TransportError::Kind::ConnectionRefused,
                             "cannot resolve " + ep.to_string() + ": " + ::gai_strerror(rc));
    }
    return res;
}

class SendBuffer {
public:
    explicit SendBuffer(int fd) : fd_(fd) {}

    std::vector<std::uint8_t>& bytes() { return buf_; }

    /// Returns false if the peer went away.
    bool flush() {
        std::size_t off = 0;
        while (off < buf_.size()) {
            ssize_t n = ::send(fd_, buf_.data() + off, buf_.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        buf_.clear();
        return true;
    }

private:
    int fd_;
    std::vector<std::uint8_t> buf_;
};

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected HOST:PORT, got '" + text + "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') ep.host = ep.host.substr(1, ep.host.size() - 2);
    unsigned port = 0;
    auto portText = std::string_view(text).substr(colon + 1);
    auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
    if (ec != std::errc() || ptr != portText.data() + portText.size() || port > 65535) {
        throw std::invalid_argument("bad port in '" + text + "'");
    }
    ep.port = static_cast<std::uint16_t>(port);
    return ep;
}

ProducerOutcome run_producer(const EventSource& source, const Endpoint& endpoint, const ProducerOptions& options) {
    addrinfo* res = resolve(endpoint, false);
    Socket sock;
    int last_errno = 0;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (s.get() < 0) continue;
        if (::connect(s.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
            sock = std::move(s);
            break;
        }
        last_errno = errno;
    }
    ::freeaddrinfo(res);
    if (sock.get() < 0) {
        throw TransportError(TransportError::Kind::ConnectionRefused,
                             "cannot connect to " + endpoint.to_string() + ": " + std::strerror(last_errno));
    }
    int one = 1;
    ::setsockopt(sock.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    using Clock = std::chrono::steady_clock;
    SendBuffer out(sock.get());
    ProducerOutcome outcome;
    std::optional<std::uint64_t> last_flushed;
    std::optional<std::uint64_t> last_buffered;

    auto flush_or_throw = [&] {
        if (!out.flush()) {
            throw TransportError(TransportError::Kind::ConnectionLost,
                                 "connection to " + endpoint.to_string() + " lost: " + errno_text(), last_flushed);
        }
        last_flushed = last_buffered;
    };

    wire::encode_message(out.bytes(), wire::Message::hello(options.num_variables_hint));
    flush_or_throw();

    const auto start = Clock::now();
    auto last_flush = start;
    while (auto ev = source()) {
        if (options.rate > 0) {
            auto due = start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(static_cast<double>(outcome.events_sent) / options.rate));
            if (due > Clock::now()) {
                flush_or_throw();
                last_flush = Clock::now();
                std::this_thread::sleep_until(due);
            }
        }
        wire::encode_message(out.bytes(), wire::Message::from_event(*ev));
        last_buffered = outcome.events_sent;
        ++outcome.events_sent;
        auto now = Clock::now();
        if (out.bytes().size() >= options.flush_bytes || now - last_flush >= std::chrono::milliseconds(20)) {
            flush_or_throw();
            last_flush = now;
        }
    }
    wire::encode_message(out.bytes(), wire::Message::terminate());
    flush_or_throw();
    ::shutdown(sock.get(), SHUT_WR);
    // Drain until the consumer closes so Terminate is not lost to a reset.
    std::uint8_t scratch[256];
    while (::recv(sock.get(), scratch, sizeof scratch, 0) > 0) {
    }
    return outcome;
}

ConsumerListener::ConsumerListener(const Endpoint& bind_address) : host_(bind_address.host), port_(bind_address.port) {
    open_socket();
}

ConsumerListener::~ConsumerListener() {
    if (fd_ >= 0) ::close(fd_);
}

void ConsumerListener::open_socket() {
    addrinfo* res = resolve(Endpoint{host_, port_}, true);
    int last_errno = 0;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (s.get() < 0) continue;
        int one = 1;
        ::setsockopt(s.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(s.get(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.get(), 4) == 0) {
            sockaddr_storage addr{};
            socklen_t len = sizeof addr;
            ::getsockname(s.get(), reinterpret_cast<sockaddr*>(&addr), &len);
            port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                               : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
            fd_ = s.release();
            break;
        }
        last_errno = errno;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) {
        throw TransportError(TransportError::Kind::BindFailure,
                             "cannot bind " + host_ + ":" + std::to_string(port_) + ": " + std::strerror(last_errno));
    }
}

std::optional<ConsumerOutcome> ConsumerListener::serve_one(const EventSink& sink, std::uint64_t first_sequence,
                                                           const std::atomic<bool>* stop) {
    auto stopped = [stop] { return stop && stop->load(); };
    if (fd_ < 0) open_socket();

    Socket client;
    while (client.get() < 0) {
        if (stopped()) return std::nullopt;
        pollfd pfd{fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, 100);
        if (rc < 0 && errno != EINTR) throw TransportError(TransportError::Kind::BindFailure, "poll: " + errno_text());
        if (rc > 0) client = Socket(::accept(fd_, nullptr, nullptr));
    }
    ::close(fd_);
    fd_ = -1;

    struct Rebind {
        ConsumerListener* self;
        ~Rebind() {
            try {
                self->open_socket();
            } catch (const TransportError&) {
                // Retried on the next serve_one call.
            }
        }
    } rebind{this};

    wire::StreamDecoder decoder;
    ConsumerOutcome outcome;
    bool hello_seen = false;
    std::uint64_t seq = first_sequence;
    std::vector<std::uint8_t> chunk(1 << 16);

    auto protocol_error = [&](const std::string& what) {
        return TransportError(TransportError::Kind::ProtocolError, what, seq == first_sequence ? std::nullopt : std::optional(seq - 1));
    };

    while (!stopped()) {
        pollfd pfd{client.get(), POLLIN, 0};
        int rc = ::poll(&pfd, 1, 100);
        if (rc == 0) continue;
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        ssize_t n = ::recv(client.get(), chunk.data(), chunk.size(), 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (n == 0) {
            try {
                decoder.finish();
            } catch (const wire::ProtocolError& e) {
                throw protocol_error(e.what());
            }
            break;
        }
        decoder.feed(std::span<const std::uint8_t>(chunk.data(), static_cast<std::size_t>(n)));
        try {
            while (auto msg = decoder.next()) {
                switch (msg->tag) {
                    case wire::Tag::Hello:
                        if (msg->version != wire::kProtocolVersion) {
                            throw protocol_error("unsupported protocol version " + std::to_string(msg->version));
                        }
                        hello_seen = true;
                        outcome.protocol_version = msg->version;
                        outcome.num_variables_hint = msg->num_variables_hint;
                        break;
                    case wire::Tag::AddClause:
                    case wire::Tag::DeleteClause: {
                        if (!hello_seen) throw protocol_error("clause message before Hello");
                        auto canon = canonicalize(std::move(msg->literals));
                        sink(ClauseEvent{msg->tag == wire::Tag::AddClause ? EventKind::Add : EventKind::Delete, canon.status,
                                         std::move(canon.clause), seq++});
                        ++outcome.events_received;
                        break;
                    }
                    case wire::Tag::Terminate:
                        outcome.terminated = true;
                        return outcome;
                }
            }
        } catch (const wire::ProtocolError& e) {
            throw protocol_error(e.what());
        }
    }
    return outcome;
}

struct ProofFileSource::Impl {
    std::ifstream in;
    std::unique_ptr<DratReader> reader;
};

ProofFileSource::ProofFileSource(const std::string& path) : impl_(std::make_shared<Impl>()) {
    impl_->in.open(path, std::ios::binary);
    if (!impl_->in) throw std::runtime_error("cannot open " + path);
    impl_->reader = std::make_unique<DratReader>(impl_->in);
}

ProofFileSource::~ProofFileSource() = default;

std::optional<ClauseEvent> ProofFileSource::operator()() { return impl_->reader->next_event(); }

std::optional<ClauseEvent> parse_drat_line(std::string_view line) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    std::size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i == line.size()) return std::nullopt;
    char first = line[i];
    if (first == 'c' || first == 's' || first == 'v' || first == 'o') return std::nullopt;

    EventKind kind = EventKind::Add;
    if (first == 'd') {
        kind = EventKind::Delete;
        ++i;
        if (i < line.size() && !is_space(line[i])) throw ParseError(ParseError::Kind::NonIntegerToken, 1, "bad deletion marker");
    }
    std::vector<std::int32_t> lits;
    for (;;) {
        while (i < line.size() && is_space(line[i])) ++i;
        if (i == line.size()) throw ParseError(ParseError::Kind::UnterminatedClause, 1, "line lacks terminating 0");
        std::int32_t v = 0;
        auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
        std::size_t end = static_cast<std::size_t>(ptr - line.data());
        if (ec != std::errc() || (end < line.size() && !is_space(line[end]))) {
            throw ParseError(ParseError::Kind::NonIntegerToken, 1, "expected integer in '" + std::string(line) + "'");
        }
        i = end;
        if (v == 0) break;
        lits.push_back(v);
    }
    return make_event(kind, std::span<const std::int32_t>(lits));
}

SolverProcessSource::SolverProcessSource(const std::string& command) : pipe_(::popen(command.c_str(), "r")) {
    if (!pipe_) throw std::runtime_error("cannot start solver: " + errno_text());
}

SolverProcessSource::~SolverProcessSource() {
    close();
    std::free(line_);
}

std::optional<ClauseEvent> SolverProcessSource::operator()() {
    if (!pipe_) return std::nullopt;
    for (;;) {
        ssize_t n = ::getline(&line_, &cap_, pipe_);
        if (n < 0) return std::nullopt;
        try {
            if (auto ev = parse_drat_line(std::string_view(line_, static_cast<std::size_t>(n)))) return ev;
        } catch (const ParseError&) {
            ++skipped_;
        }
    }
}

int SolverProcessSource::close() {
    if (!pipe_) return 0;
    int status = ::pclose(pipe_);
    pipe_ = nullptr;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace clauseviz
