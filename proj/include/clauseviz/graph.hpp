#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clauseviz/cnf.hpp"

namespace clauseviz {

/// Dense 0-based node index. At level 0, node i is variable i + 1.
using NodeId = std::uint32_t;

constexpr NodeId node_of(Literal lit) { return lit.variable() - 1; }

inline constexpr double kWeightEpsilon = 1e-9;

struct Edge {
    NodeId u = 0;  // u < v
    NodeId v = 0;
    double weight = 0.0;

    bool operator==(const Edge&) const = default;
};

/// Undirected graph with accumulated positive edge weights and no self-loops.
/// Edges whose weight drops to kWeightEpsilon or below are removed.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(std::size_t node_count) : node_count_(node_count) {}

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return weights_.size(); }
    /// Grows the node set; never shrinks it.
    void ensure_nodes(std::size_t count) {
        if (count > node_count_) node_count_ = count;
    }

    /// Adds `delta` (possibly negative) to edge {a, b}. a != b.
    void add_weight(NodeId a, NodeId b, double delta);
    /// Weight of {a, b}, 0 if absent.
    double weight(NodeId a, NodeId b) const;
    bool has_edge(NodeId a, NodeId b) const { return weight(a, b) != 0.0; }

    /// All edges sorted by (u, v).
    std::vector<Edge> edges() const;
    double total_weight() const;

    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (const auto& [key, w] : weights_) fn(static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), w);
    }

private:
    static std::uint64_t key(NodeId a, NodeId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    std::size_t node_count_ = 0;
    std::unordered_map<std::uint64_t, double> weights_;
};

/// Largest absolute per-edge difference between two graphs (missing edges count as 0).
double max_weight_difference(const WeightedGraph& a, const WeightedGraph& b);

enum class ReductionKind { CliqueExpansion, RingReduction };

enum class WeightFunction { InverseSizeMinusOne, InverseSize, ExponentialDecay };

/// Per-pair contribution of a clause of `clause_size` literals (size >= 2).
double clause_weight(WeightFunction wf, std::size_t clause_size);

ReductionKind parse_reduction(const std::string& name);
WeightFunction parse_weight_function(const std::string& name);
std::string to_string(ReductionKind kind);
std::string to_string(WeightFunction wf);

using NodePair = std::pair<NodeId, NodeId>;

/// Invokes fn(u, v) with u < v once for every pair the reduction produces.
template <typename Fn>
void for_each_reduced_pair(const Clause& clause, ReductionKind kind, Fn&& fn) {
    auto lits = clause.literals();
    const std::size_t n = lits.size();
    if (n < 2) return;
    if (kind == ReductionKind::CliqueExpansion || n == 2) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) fn(node_of(lits[i]), node_of(lits[j]));
        return;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) fn(node_of(lits[i]), node_of(lits[i + 1]));
    fn(node_of(lits.front()), node_of(lits.back()));
}

std::vector<NodePair> reduce_clause(const Clause& clause, ReductionKind kind);

struct TransformConfig {
    ReductionKind reduction = ReductionKind::RingReduction;
    WeightFunction weight_function = WeightFunction::InverseSizeMinusOne;
};

WeightedGraph build_initial(const CnfFormula& formula, const TransformConfig& config);

/// Live count per canonical clause, plus an order-independent digest of the
/// whole multiset (sum of clause fingerprints times counts, modulo 2^64).
class LiveClauseMultiset {
public:
    /// Returns the new count.
    std::uint32_t increment(const Clause& c);
    /// Returns false (and changes nothing) when the clause is not live.
    bool decrement(const Clause& c);
    std::uint32_t count(const Clause& c) const;

    std::uint64_t digest() const { return digest_; }
    std::size_t distinct() const { return counts_.size(); }
    std::uint64_t total() const { return total_; }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [c, n] : counts_) fn(c, n);
    }

private:
    std::unordered_map<Clause, std::uint32_t, ClauseHash> counts_;
    std::uint64_t digest_ = 0;
    std::uint64_t total_ = 0;
};

/// Result of applying one event, recorded so the event can be undone exactly.
enum class EventEffect : std::uint8_t { None, Added, Removed, UnknownDelete };

/// The live Variable Interaction Graph: formula clauses plus the effect of
/// every applied event. Single writer.
class InteractionGraph {
public:
    InteractionGraph() = default;
    InteractionGraph(const CnfFormula& formula, const TransformConfig& config);

    EventEffect apply(const ClauseEvent& event);
    /// Exact inverse of a previous apply() that returned `effect`.
    void revert(const ClauseEvent& event, EventEffect effect);

    /// Rebuilds edge weights from the live multiset, dropping accumulated drift.
    WeightedGraph rebuild() const;

    const WeightedGraph& graph() const { return graph_; }
    const LiveClauseMultiset& live() const { return live_; }
    LiveClauseMultiset& live() { return live_; }
    const TransformConfig& config() const { return config_; }
    std::uint64_t unknown_deletes() const { return unknown_deletes_; }

    /// Replaces graph and counters, keeping the multiset (used by checkpoint restore).
    void restore(WeightedGraph graph, std::uint64_t unknown_deletes) {
        graph_ = std::move(graph);
        unknown_deletes_ = unknown_deletes;
    }

private:
    void add_clause_weight(const Clause& c, double sign);

    TransformConfig config_;
    WeightedGraph graph_;
    LiveClauseMultiset live_;
    std::uint64_t unknown_deletes_ = 0;
};

/// "u v w" per line, nodes printed with `id_offset` added (1 turns level-0
/// nodes back into variable numbers).
void write_edge_list(std::ostream& out, const WeightedGraph& graph, std::uint32_t id_offset = 1);
WeightedGraph read_edge_list(std::istream& in, std::uint32_t id_offset = 1);
void write_dot(std::ostream& out, const WeightedGraph& graph, std::uint32_t id_offset = 1);

}  // namespace clauseviz
