#include "clauseviz/cnf.hpp"

#include <algorithm>

namespace clauseviz {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

std::uint64_t clause_fingerprint(const Clause& c) noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ c.size();
    for (Literal lit : c) h = mix64(h ^ static_cast<std::uint32_t>(lit.value())) + 0x9e3779b97f4a7c15ULL;
    return h;
}

std::size_t ClauseHash::operator()(const Clause& c) const noexcept {
    return static_cast<std::size_t>(clause_fingerprint(c));
}

CanonicalClause canonicalize(std::vector<Literal> literals) {
    if (literals.empty()) return {ClauseStatus::Empty, Clause{}};
    std::sort(literals.begin(), literals.end(), LiteralOrder{});
    literals.erase(std::unique(literals.begin(), literals.end()), literals.end());

    ClauseStatus status = ClauseStatus::Ok;
    for (std::size_t i = 1; i < literals.size(); ++i) {
        if (literals[i].variable() == literals[i - 1].variable()) {
            status = ClauseStatus::Tautology;
            break;
        }
    }
    return {status, Clause(std::move(literals))};
}

CanonicalClause canonicalize(std::span<const std::int32_t> raw) {
    std::vector<Literal> lits;
    lits.reserve(raw.size());
    for (std::int32_t v : raw) lits.emplace_back(v);
    return canonicalize(std::move(lits));
}

CanonicalClause canonicalize(std::initializer_list<std::int32_t> raw) {
    return canonicalize(std::span<const std::int32_t>(raw.begin(), raw.size()));
}

ClauseEvent make_event(EventKind kind, std::span<const std::int32_t> raw, std::uint64_t sequence) {
    auto canon = canonicalize(raw);
    return ClauseEvent{kind, canon.status, std::move(canon.clause), sequence};
}

ClauseEvent make_event(EventKind kind, std::initializer_list<std::int32_t> raw, std::uint64_t sequence) {
    return make_event(kind, std::span<const std::int32_t>(raw.begin(), raw.size()), sequence);
}

}  // namespace clauseviz
