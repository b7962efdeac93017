#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace clauseviz {

/// A signed, nonzero DIMACS literal. Positive asserts the variable, negative
/// negates it.
class Literal {
public:
    constexpr Literal() = default;
    constexpr explicit Literal(std::int32_t value) : value_(value) {}

    constexpr std::int32_t value() const { return value_; }
    constexpr std::uint32_t variable() const {
        return static_cast<std::uint32_t>(value_ < 0 ? -static_cast<std::int64_t>(value_) : value_);
    }
    constexpr bool negative() const { return value_ < 0; }
    constexpr Literal operator-() const { return Literal(-value_); }

    constexpr bool operator==(const Literal&) const = default;

private:
    std::int32_t value_ = 0;
};

/// Canonical ordering: by variable index, negative before positive.
struct LiteralOrder {
    constexpr bool operator()(Literal a, Literal b) const {
        if (a.variable() != b.variable()) return a.variable() < b.variable();
        return a.negative() && !b.negative();
    }
};

/// Sorted, duplicate-free set of literals. Construct through canonicalize();
/// the raw constructor trusts its input.
class Clause {
public:
    Clause() = default;
    explicit Clause(std::vector<Literal> sorted_literals) : literals_(std::move(sorted_literals)) {}

    std::span<const Literal> literals() const { return literals_; }
    std::size_t size() const { return literals_.size(); }
    bool empty() const { return literals_.empty(); }
    std::uint32_t max_variable() const { return literals_.empty() ? 0 : literals_.back().variable(); }

    auto begin() const { return literals_.begin(); }
    auto end() const { return literals_.end(); }

    bool operator==(const Clause&) const = default;

private:
    std::vector<Literal> literals_;
};

struct ClauseHash {
    std::size_t operator()(const Clause& c) const noexcept;
};

/// Stable 64-bit hash of a canonical clause, identical on every platform.
std::uint64_t clause_fingerprint(const Clause& c) noexcept;

enum class ClauseStatus : std::uint8_t { Ok, Tautology, Empty };

struct CanonicalClause {
    ClauseStatus status = ClauseStatus::Empty;
    /// Deduplicated and sorted; for a tautology it still holds both polarities.
    Clause clause;
};

CanonicalClause canonicalize(std::vector<Literal> literals);
CanonicalClause canonicalize(std::span<const std::int32_t> raw);
CanonicalClause canonicalize(std::initializer_list<std::int32_t> raw);

struct CnfFormula {
    std::uint32_t num_variables = 0;
    std::vector<Clause> clauses;

    bool operator==(const CnfFormula&) const = default;
};

enum class EventKind : std::uint8_t { Add, Delete };

struct ClauseEvent {
    EventKind kind = EventKind::Add;
    ClauseStatus status = ClauseStatus::Empty;
    Clause clause;
    std::uint64_t sequence = 0;

    bool operator==(const ClauseEvent&) const = default;
};

ClauseEvent make_event(EventKind kind, std::span<const std::int32_t> raw, std::uint64_t sequence = 0);
ClauseEvent make_event(EventKind kind, std::initializer_list<std::int32_t> raw, std::uint64_t sequence = 0);

}  // namespace clauseviz
