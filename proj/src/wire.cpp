#include "clauseviz/wire.hpp"

#include <limits>
#include <string>

namespace clauseviz::wire {

Message Message::hello(std::uint64_t num_variables_hint, std::uint64_t version) {
    Message m;
    m.tag = Tag::Hello;
    m.version = version;
    m.num_variables_hint = num_variables_hint;
    return m;
}

Message Message::terminate() { return Message{}; }

Message Message::clause(EventKind kind, std::span<const Literal> literals) {
    Message m;
    m.tag = kind == EventKind::Add ? Tag::AddClause : Tag::DeleteClause;
    m.literals.assign(literals.begin(), literals.end());
    return m;
}

Message Message::from_event(const ClauseEvent& event) { return clause(event.kind, event.clause.literals()); }

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t value) {
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

std::vector<std::uint8_t> encode_literal(Literal lit) {
    std::vector<std::uint8_t> out;
    append_varint(out, literal_code(lit));
    return out;
}

void encode_message(std::vector<std::uint8_t>& out, const Message& msg) {
    out.push_back(static_cast<std::uint8_t>(msg.tag));
    switch (msg.tag) {
        case Tag::AddClause:
        case Tag::DeleteClause:
            for (Literal lit : msg.literals) append_varint(out, literal_code(lit));
            out.push_back(0x00);
            break;
        case Tag::Hello:
            append_varint(out, msg.version);
            append_varint(out, msg.num_variables_hint);
            break;
        case Tag::Terminate:
            break;
    }
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
    std::vector<std::uint8_t> out;
    encode_message(out, msg);
    return out;
}

namespace {

enum class VarintStatus { Ok, Incomplete };

/// Reads a varint at `pos`; advances pos on success.
VarintStatus read_varint(std::span<const std::uint8_t> bytes, std::size_t& pos, std::uint64_t& value) {
    value = 0;
    std::size_t p = pos;
    for (unsigned shift = 0;; shift += 7) {
        if (p == bytes.size()) return VarintStatus::Incomplete;
        if (shift >= 64) throw ProtocolError(ProtocolError::Kind::TruncatedVarint, "varint longer than 64 bits");
        std::uint8_t b = bytes[p++];
        value |= static_cast<std::uint64_t>(b & 0x7f) << shift;
        if ((b & 0x80) == 0) break;
    }
    pos = p;
    return VarintStatus::Ok;
}

}  // namespace

std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes, std::size_t max_clause_literals) {
    if (bytes.empty()) return std::nullopt;
    Decoded out;
    std::size_t pos = 1;
    std::uint8_t tag = bytes[0];
    switch (tag) {
        case static_cast<std::uint8_t>(Tag::Terminate):
            out.message = Message::terminate();
            break;
        case static_cast<std::uint8_t>(Tag::Hello): {
            std::uint64_t version = 0;
            std::uint64_t hint = 0;
            if (read_varint(bytes, pos, version) == VarintStatus::Incomplete) return std::nullopt;
            if (read_varint(bytes, pos, hint) == VarintStatus::Incomplete) return std::nullopt;
            out.message = Message::hello(hint, version);
            break;
        }
        case static_cast<std::uint8_t>(Tag::AddClause):
        case static_cast<std::uint8_t>(Tag::DeleteClause): {
            Message& m = out.message;
            m.tag = static_cast<Tag>(tag);
            for (;;) {
                std::uint64_t code = 0;
                if (read_varint(bytes, pos, code) == VarintStatus::Incomplete) return std::nullopt;
                if (code == 0) break;
                if (code / 2 > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()) || code < 2) {
                    throw ProtocolError(ProtocolError::Kind::InvalidLiteral, "literal code " + std::to_string(code) + " out of range");
                }
                if (m.literals.size() >= max_clause_literals) {
                    throw ProtocolError(ProtocolError::Kind::OversizedClause,
                                        "clause exceeds " + std::to_string(max_clause_literals) + " literals");
                }
                auto var = static_cast<std::int32_t>(code / 2);
                m.literals.emplace_back(code & 1 ? -var : var);
            }
            break;
        }
        default:
            throw ProtocolError(ProtocolError::Kind::UnknownTag, "unknown message tag " + std::to_string(tag));
    }
    out.consumed = pos;
    return out;
}

Message decode_message(std::span<const std::uint8_t> bytes, std::size_t max_clause_literals) {
    auto d = try_decode(bytes, max_clause_literals);
    if (!d) throw ProtocolError(ProtocolError::Kind::TruncatedVarint, "stream ends inside a message");
    return std::move(d->message);
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
    if (head_ > 0 && head_ * 2 >= buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
        head_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> StreamDecoder::next() {
    auto d = try_decode(std::span<const std::uint8_t>(buffer_).subspan(head_), max_literals_);
    if (!d) return std::nullopt;
    head_ += d->consumed;
    return std::move(d->message);
}

void StreamDecoder::finish() const {
    if (pending() != 0) {
        throw ProtocolError(ProtocolError::Kind::TruncatedVarint,
                            "stream ends with " + std::to_string(pending()) + " bytes of an incomplete message");
    }
}

}  // namespace clauseviz::wire
