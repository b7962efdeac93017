#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "clauseviz/cnf.hpp"

namespace clauseviz::wire {

inline constexpr std::uint64_t kProtocolVersion = 1;
inline constexpr std::size_t kDefaultMaxClauseLiterals = 1'000'000;

enum class Tag : std::uint8_t {
    AddClause = 0x01,
    DeleteClause = 0x02,
    Terminate = 0x03,
    Hello = 0x04,
};

struct Message {
    Tag tag = Tag::Terminate;
    /// AddClause / DeleteClause payload, in wire order (not canonicalized).
    std::vector<Literal> literals;
    /// Hello payload.
    std::uint64_t version = 0;
    std::uint64_t num_variables_hint = 0;

    static Message hello(std::uint64_t num_variables_hint, std::uint64_t version = kProtocolVersion);
    static Message terminate();
    static Message clause(EventKind kind, std::span<const Literal> literals);
    static Message from_event(const ClauseEvent& event);

    bool operator==(const Message&) const = default;
};

class ProtocolError : public std::runtime_error {
public:
    enum class Kind { UnknownTag, TruncatedVarint, OversizedClause, InvalidLiteral };
    ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// 2|l| + sign, so 0 stays free for the clause terminator.
constexpr std::uint64_t literal_code(Literal lit) {
    return 2 * static_cast<std::uint64_t>(lit.variable()) + (lit.negative() ? 1 : 0);
}

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t value);
std::vector<std::uint8_t> encode_literal(Literal lit);
void encode_message(std::vector<std::uint8_t>& out, const Message& msg);
std::vector<std::uint8_t> encode_message(const Message& msg);

/// Decodes one complete message from the front of `bytes`.
/// Returns nullopt when `bytes` holds only an incomplete prefix.
struct Decoded {
    Message message;
    std::size_t consumed = 0;
};
std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes,
                                  std::size_t max_clause_literals = kDefaultMaxClauseLiterals);

/// Decodes exactly one message; an incomplete input is a TruncatedVarint error.
Message decode_message(std::span<const std::uint8_t> bytes,
                       std::size_t max_clause_literals = kDefaultMaxClauseLiterals);

/// Incremental decoder for a byte stream that arrives in arbitrary pieces.
class StreamDecoder {
public:
    explicit StreamDecoder(std::size_t max_clause_literals = kDefaultMaxClauseLiterals)
        : max_literals_(max_clause_literals) {}

    void feed(std::span<const std::uint8_t> bytes);
    /// Next complete message, or nullopt if only a partial tail is buffered.
    std::optional<Message> next();
    /// Bytes of an incomplete trailing message.
    std::size_t pending() const { return buffer_.size() - head_; }
    /// Call at end of stream; throws TruncatedVarint if a partial tail remains.
    void finish() const;

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t head_ = 0;
    std::size_t max_literals_;
};

}  // namespace clauseviz::wire
