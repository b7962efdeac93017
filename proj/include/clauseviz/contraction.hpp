#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "clauseviz/graph.hpp"
#include "clauseviz/rng.hpp"

namespace clauseviz {

/// Compressed adjacency (CSR) snapshot of a WeightedGraph; neighbors sorted by id.
struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> targets;
    std::vector<double> weights;

    static Adjacency from(const WeightedGraph& graph);
    std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t degree(NodeId v) const { return offsets[v + 1] - offsets[v]; }
};

enum class VoteMode {
    /// Sum of incident edge weights per neighbor label.
    Weighted,
    /// Number of neighbors per label.
    Count,
};

enum class TieBreak {
    /// Keep the current label if it is among the best; otherwise draw
    /// uniformly among the best labels from the round's generator.
    KeepCurrentThenRandom,
    /// Always the smallest best label.
    SmallestLabel,
};

struct PropagationOptions {
    VoteMode vote = VoteMode::Weighted;
    TieBreak tie_break = TieBreak::KeepCurrentThenRandom;
};

/// One asynchronous label-propagation round visiting nodes in `order`.
/// Each node adopts the neighbor label with the highest vote; isolated nodes
/// keep theirs. `rng` is only drawn from to break ties. Returns how many
/// labels changed.
std::size_t propagate_round(const Adjacency& adj, std::vector<NodeId>& labels, std::span<const NodeId> order, Rng& rng,
                            const PropagationOptions& options = {});

/// As above, visiting nodes in a fresh permutation drawn from `rng`.
std::size_t propagate_round(const Adjacency& adj, std::vector<NodeId>& labels, Rng& rng,
                            const PropagationOptions& options = {});

struct Contraction {
    /// Fine node -> coarse node. Coarse ids are dense, numbered in order of
    /// each group's smallest fine node.
    std::vector<NodeId> node_map;
    WeightedGraph coarse;
    std::size_t rounds = 0;
};

/// Collapses `labels` groups into supernodes; inter-group weights are summed,
/// intra-group weights dropped.
Contraction collapse(const WeightedGraph& graph, std::span<const NodeId> labels);

/// Label propagation until no label changes or `max_rounds`, then collapse.
Contraction contract_once(const WeightedGraph& graph, std::size_t max_rounds, Rng& rng,
                          const PropagationOptions& options = {});

struct ContractionConfig {
    std::size_t target_size = 30000;
    /// Maximum number of contraction steps on top of level 0.
    std::size_t max_levels = 10;
    std::size_t max_rounds = 10;
    std::uint64_t seed = 1;
    PropagationOptions propagation;
};

class ContractionHierarchy {
public:
    struct Level {
        WeightedGraph graph;
        /// Node -> node of the next coarser level; empty on the top level.
        std::vector<NodeId> to_coarser;
        /// Number of level-0 nodes each node stands for.
        std::vector<std::uint32_t> members;
    };

    ContractionHierarchy() = default;
    /// Single-level hierarchy over `graph`.
    explicit ContractionHierarchy(WeightedGraph graph);

    std::size_t level_count() const { return levels_.size(); }
    const Level& level(std::size_t i) const { return levels_.at(i); }
    const Level& top() const { return levels_.back(); }
    std::size_t base_node_count() const { return levels_.empty() ? 0 : levels_.front().graph.node_count(); }

    /// Level-0 node -> node of `level` (composition of the level maps).
    std::vector<NodeId> map_to(std::size_t level) const;
    std::vector<NodeId> map_to_top() const { return map_to(levels_.size() - 1); }

    void push(Contraction step);

private:
    std::vector<Level> levels_;
};

/// Contracts recursively until the graph has at most target_size nodes, a
/// step shrinks it by less than 1 %, or max_levels steps were taken.
ContractionHierarchy build_hierarchy(const WeightedGraph& graph, const ContractionConfig& config);

/// "fine_id coarse_id" per line for the map from `level` to `level + 1`.
void write_level_map(std::ostream& out, const ContractionHierarchy& hierarchy, std::size_t level);

}  // namespace clauseviz
