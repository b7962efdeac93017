#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "clauseviz/transport.hpp"
#include "clauseviz/wire.hpp"
#include "support.hpp"

using namespace clauseviz;
using namespace clauseviz::wire;
using Bytes = std::vector<std::uint8_t>;

namespace {

// Independent LEB128 reference.
Bytes leb128(std::uint64_t v) {
    Bytes out;
    do {
        std::uint8_t b = v & 0x7f;
        v >>= 7;
        if (v) b |= 0x80;
        out.push_back(b);
    } while (v);
    return out;
}

Message random_message(std::mt19937_64& gen) {
    switch (gen() % 6) {
        case 0:
            return Message::hello(gen() % 100000);
        case 1:
            return Message::terminate();
        default: {
            std::vector<Literal> lits;
            for (auto l : testing_support::random_raw_clause(gen, 1 << 20, 0, 12)) lits.emplace_back(l);
            return Message::clause(gen() % 2 ? EventKind::Add : EventKind::Delete, lits);
        }
    }
}

}  // namespace

TEST(Wire, LiteralEncodings) {
    EXPECT_EQ(encode_literal(Literal(3)), (Bytes{0x06}));
    EXPECT_EQ(encode_literal(Literal(-3)), (Bytes{0x07}));
    EXPECT_EQ(encode_literal(Literal(100)), (Bytes{0xC8, 0x01}));
}

TEST(Wire, LiteralCodesMatchReference) {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 10000; ++i) {
        std::int32_t v = static_cast<std::int32_t>(gen() % 0x7fffffff) + 1;
        if (gen() % 2) v = -v;
        const std::uint64_t code = 2 * static_cast<std::uint64_t>(std::abs(static_cast<std::int64_t>(v))) + (v < 0);
        ASSERT_EQ(encode_literal(Literal(v)), leb128(code));
    }
}

TEST(Wire, DecodeAddClause) {
    const Message m = decode_message(Bytes{0x01, 0x02, 0x05, 0x00});
    EXPECT_EQ(m.tag, Tag::AddClause);
    ASSERT_EQ(m.literals.size(), 2u);
    EXPECT_EQ(m.literals[0].value(), 1);
    EXPECT_EQ(m.literals[1].value(), -2);
}

TEST(Wire, DecodeTerminateAndHello) {
    EXPECT_EQ(decode_message(Bytes{0x03}).tag, Tag::Terminate);
    const Message h = decode_message(Bytes{0x04, 0x01, 0xC8, 0x01});
    EXPECT_EQ(h.tag, Tag::Hello);
    EXPECT_EQ(h.version, 1u);
    EXPECT_EQ(h.num_variables_hint, 200u);
}

TEST(Wire, EncodedMessageLayout) {
    const std::vector<Literal> lits{Literal(1), Literal(-2)};
    EXPECT_EQ(encode_message(Message::clause(EventKind::Delete, lits)), (Bytes{0x02, 0x02, 0x05, 0x00}));
    EXPECT_EQ(encode_message(Message::terminate()), (Bytes{0x03}));
}

TEST(Wire, Errors) {
    auto kind_of = [](const Bytes& b, std::size_t max = kDefaultMaxClauseLiterals) {
        try {
            decode_message(b, max);
        } catch (const ProtocolError& e) {
            return e.kind();
        }
        ADD_FAILURE() << "no error";
        return ProtocolError::Kind::UnknownTag;
    };
    EXPECT_EQ(kind_of({0x09}), ProtocolError::Kind::UnknownTag);
    EXPECT_EQ(kind_of({0x01, 0x80}), ProtocolError::Kind::TruncatedVarint);
    EXPECT_EQ(kind_of({0x01, 0x02, 0x04}), ProtocolError::Kind::TruncatedVarint);
    EXPECT_EQ(kind_of({0x01, 0x01, 0x00}), ProtocolError::Kind::InvalidLiteral);
    EXPECT_EQ(kind_of({0x01, 0x02, 0x04, 0x06, 0x00}, 2), ProtocolError::Kind::OversizedClause);
    // Versions are checked during the handshake, not by the codec.
    EXPECT_EQ(decode_message(Bytes{0x04, 0x02, 0x00}).version, 2u);
}

TEST(Wire, RandomRoundTrip) {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 5000; ++i) {
        const Message m = random_message(gen);
        ASSERT_EQ(decode_message(encode_message(m)), m);
    }
}

TEST(Wire, PrefixIsIncompleteNotWrong) {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 500; ++i) {
        const Bytes b = encode_message(random_message(gen));
        for (std::size_t cut = 0; cut < b.size(); ++cut) {
            ASSERT_FALSE(try_decode(std::span(b).first(cut)).has_value());
        }
        auto full = try_decode(b);
        ASSERT_TRUE(full);
        EXPECT_EQ(full->consumed, b.size());
    }
}

TEST(Wire, StreamDecoderAcceptsArbitrarySplits) {
    std::mt19937_64 gen(29);
    std::vector<Message> sent;
    Bytes stream;
    for (int i = 0; i < 400; ++i) {
        sent.push_back(random_message(gen));
        encode_message(stream, sent.back());
    }
    StreamDecoder dec;
    std::vector<Message> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        const std::size_t n = std::min<std::size_t>(1 + gen() % 7, stream.size() - pos);
        dec.feed(std::span(stream).subspan(pos, n));
        pos += n;
        while (auto m = dec.next()) got.push_back(*m);
    }
    EXPECT_NO_THROW(dec.finish());
    EXPECT_EQ(got, sent);

    StreamDecoder partial;
    partial.feed(Bytes{0x01, 0x02});
    EXPECT_FALSE(partial.next());
    EXPECT_THROW(partial.finish(), ProtocolError);
}

TEST(Endpoint, Parse) {
    const Endpoint e = Endpoint::parse("10.0.0.1:9000");
    EXPECT_EQ(e.host, "10.0.0.1");
    EXPECT_EQ(e.port, 9000);
    EXPECT_THROW(Endpoint::parse("nocolon"), std::invalid_argument);
    EXPECT_THROW(Endpoint::parse("h:99999"), std::invalid_argument);
}

TEST(Transport, LoopbackDeliversInOrder) {
    ConsumerListener listener(Endpoint{"127.0.0.1", 0});
    std::mt19937_64 gen(31);
    std::vector<ClauseEvent> sent;
    for (int i = 0; i < 2000; ++i) {
        const auto raw = testing_support::random_raw_clause(gen, 50, 0, 6);
        sent.push_back(make_event(gen() % 3 ? EventKind::Add : EventKind::Delete, std::span<const std::int32_t>(raw),
                                  static_cast<std::uint64_t>(i)));
    }
    std::vector<ClauseEvent> got;
    std::optional<ConsumerOutcome> outcome;
    std::thread consumer([&] { outcome = listener.serve_one([&](ClauseEvent e) { got.push_back(std::move(e)); }); });
    std::size_t next = 0;
    ProducerOptions options;
    options.num_variables_hint = 50;
    const auto produced = run_producer(
        [&]() -> std::optional<ClauseEvent> {
            if (next == sent.size()) return std::nullopt;
            return sent[next++];
        },
        Endpoint{"127.0.0.1", listener.port()}, options);
    consumer.join();
    EXPECT_EQ(produced.events_sent, sent.size());
    ASSERT_TRUE(outcome);
    EXPECT_TRUE(outcome->terminated);
    EXPECT_EQ(outcome->num_variables_hint, 50u);
    EXPECT_EQ(outcome->protocol_version, 1u);
    EXPECT_EQ(got, sent);
}

TEST(Transport, RefusedConnection) {
    std::uint16_t port;
    {
        ConsumerListener probe(Endpoint{"127.0.0.1", 0});
        port = probe.port();
    }
    try {
        run_producer([] { return std::optional<ClauseEvent>(); }, Endpoint{"127.0.0.1", port});
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.kind(), TransportError::Kind::ConnectionRefused);
    }
}

TEST(Transport, StopBeforeConnectReturnsNothing) {
    ConsumerListener listener(Endpoint{"127.0.0.1", 0});
    std::atomic<bool> stop{true};
    EXPECT_FALSE(listener.serve_one([](ClauseEvent) {}, 0, &stop));
}

TEST(Transport, ParseDratLine) {
    EXPECT_FALSE(parse_drat_line("c comment"));
    EXPECT_FALSE(parse_drat_line(""));
    auto e = parse_drat_line("d 2 -1 0");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->kind, EventKind::Delete);
    EXPECT_EQ(e->clause.size(), 2u);
}

namespace {

/// Sends raw bytes to a listener and reports what the consumer saw.
std::pair<std::vector<ClauseEvent>, std::optional<TransportError::Kind>> feed_raw(const Bytes& bytes) {
    ConsumerListener listener(Endpoint{"127.0.0.1", 0});
    std::vector<ClauseEvent> got;
    std::optional<TransportError::Kind> failure;
    std::thread consumer([&] {
        try {
            listener.serve_one([&](ClauseEvent e) { got.push_back(std::move(e)); });
        } catch (const TransportError& e) {
            failure = e.kind();
        }
    });
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(listener.port());
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    int attempts = 0;
    while (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 && attempts++ < 100) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    EXPECT_EQ(::send(fd, bytes.data(), bytes.size(), 0), static_cast<ssize_t>(bytes.size()));
    ::shutdown(fd, SHUT_WR);
    consumer.join();
    ::close(fd);
    return {got, failure};
}

}  // namespace

TEST(Transport, MalformedStreamRaisesProtocolErrorAfterDeliveredEvents) {
    const auto [got, failure] = feed_raw({0x04, 0x01, 0x00, 0x01, 0x02, 0x00, 0x7f});
    ASSERT_TRUE(failure);
    EXPECT_EQ(*failure, TransportError::Kind::ProtocolError);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].clause.size(), 1u);
}

TEST(Transport, UnsupportedVersionIsRejected) {
    const auto [got, failure] = feed_raw({0x04, 0x02, 0x00, 0x01, 0x02, 0x00, 0x03});
    ASSERT_TRUE(failure);
    EXPECT_EQ(*failure, TransportError::Kind::ProtocolError);
    EXPECT_TRUE(got.empty());
}

TEST(Transport, ClauseBeforeHelloIsRejected) {
    const auto [got, failure] = feed_raw({0x01, 0x02, 0x00, 0x03});
    ASSERT_TRUE(failure);
    EXPECT_TRUE(got.empty());
}
