#include "clauseviz/contraction.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace clauseviz {

Adjacency Adjacency::from(const WeightedGraph& graph) {
    const std::size_t n = graph.node_count();
    const std::vector<Edge> edges = graph.edges();
    Adjacency adj;
    adj.offsets.assign(n + 1, 0);
    for (const Edge& e : edges) {
        ++adj.offsets[e.u + 1];
        ++adj.offsets[e.v + 1];
    }
    std::partial_sum(adj.offsets.begin(), adj.offsets.end(), adj.offsets.begin());
    adj.targets.resize(adj.offsets[n]);
    adj.weights.resize(adj.offsets[n]);
    std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
    // Edges arrive sorted by (u, v), so each neighbor list ends up sorted.
    for (const Edge& e : edges) {
        adj.targets[fill[e.v]] = e.u;
        adj.weights[fill[e.v]++] = e.weight;
    }
    for (const Edge& e : edges) {
        adj.targets[fill[e.u]] = e.v;
        adj.weights[fill[e.u]++] = e.weight;
    }
    return adj;
}

namespace {

class Ballot {
public:
    explicit Ballot(std::size_t n) : score_(n, 0.0) {}

    void vote(NodeId label, double amount) {
        if (score_[label] == 0.0) touched_.push_back(label);
        score_[label] += amount;
    }

    /// Winning label, clearing the ballot. Requires at least one vote.
    NodeId winner(NodeId current, TieBreak tie_break, Rng& rng) {
        double best_score = 0.0;
        for (NodeId l : touched_) best_score = std::max(best_score, score_[l]);
        best_.clear();
        for (NodeId l : touched_) {
            if (score_[l] == best_score) best_.push_back(l);
            score_[l] = 0.0;
        }
        touched_.clear();

        if (best_.size() == 1) return best_.front();
        std::sort(best_.begin(), best_.end());
        if (tie_break == TieBreak::SmallestLabel) return best_.front();
        if (std::binary_search(best_.begin(), best_.end(), current)) return current;
        return best_[rng.below(best_.size())];
    }

private:
    std::vector<double> score_;
    std::vector<NodeId> touched_;
    std::vector<NodeId> best_;
};

}  // namespace

std::size_t propagate_round(const Adjacency& adj, std::vector<NodeId>& labels, std::span<const NodeId> order, Rng& rng,
                            const PropagationOptions& options) {
    if (labels.size() != adj.node_count()) throw std::invalid_argument("label vector does not match graph");
    Ballot ballot(adj.node_count());
    std::size_t changed = 0;
    for (NodeId v : order) {
        const std::size_t begin = adj.offsets[v];
        const std::size_t end = adj.offsets[v + 1];
        if (begin == end) continue;
        for (std::size_t i = begin; i < end; ++i) {
            ballot.vote(labels[adj.targets[i]], options.vote == VoteMode::Weighted ? adj.weights[i] : 1.0);
        }
        const NodeId next = ballot.winner(labels[v], options.tie_break, rng);
        if (next != labels[v]) {
            labels[v] = next;
            ++changed;
        }
    }
    return changed;
}

std::size_t propagate_round(const Adjacency& adj, std::vector<NodeId>& labels, Rng& rng,
                            const PropagationOptions& options) {
    std::vector<NodeId> order(adj.node_count());
    std::iota(order.begin(), order.end(), NodeId{0});
    rng.shuffle(std::span<NodeId>(order));
    return propagate_round(adj, labels, order, rng, options);
}

Contraction collapse(const WeightedGraph& graph, std::span<const NodeId> labels) {
    const std::size_t n = graph.node_count();
    constexpr NodeId kUnassigned = ~NodeId{0};
    std::vector<NodeId> coarse_of_label(n, kUnassigned);
    Contraction out;
    out.node_map.resize(n);
    NodeId next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        NodeId& id = coarse_of_label[labels[v]];
        if (id == kUnassigned) id = next++;
        out.node_map[v] = id;
    }
    out.coarse = WeightedGraph(next);
    for (const Edge& e : graph.edges()) {
        const NodeId a = out.node_map[e.u];
        const NodeId b = out.node_map[e.v];
        if (a != b) out.coarse.add_weight(a, b, e.weight);
    }
    return out;
}

Contraction contract_once(const WeightedGraph& graph, std::size_t max_rounds, Rng& rng,
                          const PropagationOptions& options) {
    const Adjacency adj = Adjacency::from(graph);
    std::vector<NodeId> labels(graph.node_count());
    std::iota(labels.begin(), labels.end(), NodeId{0});
    std::size_t rounds = 0;
    while (rounds < std::max<std::size_t>(max_rounds, 1)) {
        ++rounds;
        if (propagate_round(adj, labels, rng, options) == 0) break;
    }
    Contraction out = collapse(graph, labels);
    out.rounds = rounds;
    return out;
}

ContractionHierarchy::ContractionHierarchy(WeightedGraph graph) {
    Level base;
    base.members.assign(graph.node_count(), 1);
    base.graph = std::move(graph);
    levels_.push_back(std::move(base));
}

void ContractionHierarchy::push(Contraction step) {
    Level& fine = levels_.back();
    if (step.node_map.size() != fine.graph.node_count()) throw std::invalid_argument("contraction does not match top level");
    Level coarse;
    coarse.members.assign(step.coarse.node_count(), 0);
    for (std::size_t v = 0; v < step.node_map.size(); ++v) coarse.members[step.node_map[v]] += fine.members[v];
    coarse.graph = std::move(step.coarse);
    fine.to_coarser = std::move(step.node_map);
    levels_.push_back(std::move(coarse));
}

std::vector<NodeId> ContractionHierarchy::map_to(std::size_t level) const {
    std::vector<NodeId> map(base_node_count());
    std::iota(map.begin(), map.end(), NodeId{0});
    for (std::size_t l = 0; l < level; ++l) {
        const auto& step = levels_.at(l).to_coarser;
        for (NodeId& v : map) v = step[v];
    }
    return map;
}

ContractionHierarchy build_hierarchy(const WeightedGraph& graph, const ContractionConfig& config) {
    ContractionHierarchy h(graph);
    const std::size_t target = std::max<std::size_t>(config.target_size, 1);
    for (std::size_t step = 0; step < config.max_levels; ++step) {
        const WeightedGraph& top = h.top().graph;
        const std::size_t n = top.node_count();
        if (n <= target) break;
        Rng rng(mix_seed(config.seed, step));
        Contraction c = contract_once(top, config.max_rounds, rng, config.propagation);
        // Require a shrink of at least 1 %.
        if (c.coarse.node_count() * 100 > n * 99) break;
        h.push(std::move(c));
    }
    return h;
}

void write_level_map(std::ostream& out, const ContractionHierarchy& hierarchy, std::size_t level) {
    const auto& map = hierarchy.level(level).to_coarser;
    for (std::size_t v = 0; v < map.size(); ++v) out << v << ' ' << map[v] << '\n';
}

}  // namespace clauseviz
