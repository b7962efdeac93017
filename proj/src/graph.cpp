#include "clauseviz/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace clauseviz {

void WeightedGraph::add_weight(NodeId a, NodeId b, double delta) {
    if (a == b) return;
    ensure_nodes(static_cast<std::size_t>(std::max(a, b)) + 1);
    auto [it, inserted] = weights_.try_emplace(key(a, b), 0.0);
    it->second += delta;
    if (it->second <= kWeightEpsilon) weights_.erase(it);
}

double WeightedGraph::weight(NodeId a, NodeId b) const {
    if (a == b) return 0.0;
    auto it = weights_.find(key(a, b));
    return it == weights_.end() ? 0.0 : it->second;
}

std::vector<Edge> WeightedGraph::edges() const {
    std::vector<std::pair<std::uint64_t, double>> sorted(weights_.begin(), weights_.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Edge> out;
    out.reserve(sorted.size());
    for (const auto& [k, w] : sorted) out.push_back({static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu), w});
    return out;
}

double WeightedGraph::total_weight() const {
    double sum = 0.0;
    for (const Edge& e : edges()) sum += e.weight;
    return sum;
}

double max_weight_difference(const WeightedGraph& a, const WeightedGraph& b) {
    double worst = 0.0;
    a.for_each_edge([&](NodeId u, NodeId v, double w) { worst = std::max(worst, std::abs(w - b.weight(u, v))); });
    b.for_each_edge([&](NodeId u, NodeId v, double w) { worst = std::max(worst, std::abs(w - a.weight(u, v))); });
    return worst;
}

double clause_weight(WeightFunction wf, std::size_t clause_size) {
    const double n = static_cast<double>(clause_size);
    switch (wf) {
        case WeightFunction::InverseSizeMinusOne:
            return 1.0 / (n - 1.0);
        case WeightFunction::InverseSize:
            return 1.0 / n;
        case WeightFunction::ExponentialDecay:
            return std::ldexp(1.0, 1 - static_cast<int>(std::min<std::size_t>(clause_size, 1100)));
    }
    return 0.0;
}

ReductionKind parse_reduction(const std::string& name) {
    if (name == "ring") return ReductionKind::RingReduction;
    if (name == "clique") return ReductionKind::CliqueExpansion;
    throw std::invalid_argument("unknown reduction '" + name + "' (expected ring|clique)");
}

WeightFunction parse_weight_function(const std::string& name) {
    if (name == "inv-size-minus-one") return WeightFunction::InverseSizeMinusOne;
    if (name == "inv-size") return WeightFunction::InverseSize;
    if (name == "exp-decay") return WeightFunction::ExponentialDecay;
    throw std::invalid_argument("unknown weight function '" + name + "' (expected inv-size-minus-one|inv-size|exp-decay)");
}

std::string to_string(ReductionKind kind) { return kind == ReductionKind::RingReduction ? "ring" : "clique"; }

std::string to_string(WeightFunction wf) {
    switch (wf) {
        case WeightFunction::InverseSizeMinusOne:
            return "inv-size-minus-one";
        case WeightFunction::InverseSize:
            return "inv-size";
        case WeightFunction::ExponentialDecay:
            return "exp-decay";
    }
    return "?";
}

std::vector<NodePair> reduce_clause(const Clause& clause, ReductionKind kind) {
    std::vector<NodePair> pairs;
    for_each_reduced_pair(clause, kind, [&](NodeId u, NodeId v) { pairs.emplace_back(u, v); });
    return pairs;
}

WeightedGraph build_initial(const CnfFormula& formula, const TransformConfig& config) {
    WeightedGraph g(formula.num_variables);
    for (const Clause& c : formula.clauses) {
        if (c.size() < 2) continue;
        const double w = clause_weight(config.weight_function, c.size());
        for_each_reduced_pair(c, config.reduction, [&](NodeId u, NodeId v) { g.add_weight(u, v, w); });
    }
    return g;
}

std::uint32_t LiveClauseMultiset::increment(const Clause& c) {
    auto& n = counts_[c];
    ++n;
    ++total_;
    digest_ += clause_fingerprint(c);
    return n;
}

bool LiveClauseMultiset::decrement(const Clause& c) {
    auto it = counts_.find(c);
    if (it == counts_.end()) return false;
    if (--it->second == 0) counts_.erase(it);
    --total_;
    digest_ -= clause_fingerprint(c);
    return true;
}

std::uint32_t LiveClauseMultiset::count(const Clause& c) const {
    auto it = counts_.find(c);
    return it == counts_.end() ? 0 : it->second;
}

InteractionGraph::InteractionGraph(const CnfFormula& formula, const TransformConfig& config)
    : config_(config), graph_(build_initial(formula, config)) {
    for (const Clause& c : formula.clauses) live_.increment(c);
}

void InteractionGraph::add_clause_weight(const Clause& c, double sign) {
    graph_.ensure_nodes(c.max_variable());
    if (c.size() < 2) return;
    const double w = sign * clause_weight(config_.weight_function, c.size());
    for_each_reduced_pair(c, config_.reduction, [&](NodeId u, NodeId v) { graph_.add_weight(u, v, w); });
}

EventEffect InteractionGraph::apply(const ClauseEvent& event) {
    if (event.status != ClauseStatus::Ok) return EventEffect::None;
    if (event.kind == EventKind::Add) {
        live_.increment(event.clause);
        add_clause_weight(event.clause, +1.0);
        return EventEffect::Added;
    }
    if (live_.decrement(event.clause)) {
        add_clause_weight(event.clause, -1.0);
        return EventEffect::Removed;
    }
    ++unknown_deletes_;
    return EventEffect::UnknownDelete;
}

void InteractionGraph::revert(const ClauseEvent& event, EventEffect effect) {
    switch (effect) {
        case EventEffect::None:
            break;
        case EventEffect::Added:
            live_.decrement(event.clause);
            add_clause_weight(event.clause, -1.0);
            break;
        case EventEffect::Removed:
            live_.increment(event.clause);
            add_clause_weight(event.clause, +1.0);
            break;
        case EventEffect::UnknownDelete:
            --unknown_deletes_;
            break;
    }
}

WeightedGraph InteractionGraph::rebuild() const {
    // Fixed accumulation order so equal multisets give bit-identical graphs.
    std::vector<std::pair<const Clause*, std::uint32_t>> clauses;
    clauses.reserve(live_.distinct());
    live_.for_each([&](const Clause& c, std::uint32_t n) { clauses.emplace_back(&c, n); });
    std::sort(clauses.begin(), clauses.end(), [](const auto& x, const auto& y) {
        auto a = x.first->literals();
        auto b = y.first->literals();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](Literal l, Literal r) { return l.value() < r.value(); });
    });
    WeightedGraph g(graph_.node_count());
    for (const auto& [c, n] : clauses) {
        if (c->size() < 2) continue;
        const double w = clause_weight(config_.weight_function, c->size()) * n;
        for_each_reduced_pair(*c, config_.reduction, [&](NodeId u, NodeId v) { g.add_weight(u, v, w); });
    }
    return g;
}

void write_edge_list(std::ostream& out, const WeightedGraph& graph, std::uint32_t id_offset) {
    char buf[96];
    for (const Edge& e : graph.edges()) {
        std::snprintf(buf, sizeof buf, "%u %u %.17g\n", e.u + id_offset, e.v + id_offset, e.weight);
        out << buf;
    }
}

WeightedGraph read_edge_list(std::istream& in, std::uint32_t id_offset) {
    WeightedGraph g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t u = 0, v = 0;
        double w = 0;
        if (!(ls >> u >> v >> w) || u < id_offset || v < id_offset) {
            throw std::runtime_error("edge list line " + std::to_string(lineno) + ": expected 'u v w'");
        }
        g.add_weight(static_cast<NodeId>(u - id_offset), static_cast<NodeId>(v - id_offset), w);
    }
    return g;
}

void write_dot(std::ostream& out, const WeightedGraph& graph, std::uint32_t id_offset) {
    out << "graph vig {\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) out << "  " << i + id_offset << ";\n";
    char buf[96];
    for (const Edge& e : graph.edges()) {
        std::snprintf(buf, sizeof buf, "  %u -- %u [weight=%.17g];\n", e.u + id_offset, e.v + id_offset, e.weight);
        out << buf;
    }
    out << "}\n";
}

}  // namespace clauseviz
