#include "clauseviz/layout.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "clauseviz/rng.hpp"

namespace clauseviz {

void LayoutConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("layout iterations must be >= 1");
    if (!(theta > 0.0 && theta <= 1.5)) throw std::invalid_argument("layout theta must be in (0, 1.5]");
    if (!(attraction > 0.0)) throw std::invalid_argument("layout attraction must be positive");
    if (!(cooling > 0.0)) throw std::invalid_argument("layout cooling must be positive");
    if (!(gravity >= 0.0)) throw std::invalid_argument("layout gravity must be non-negative");
}

namespace {

constexpr double kMinDistanceSq = 1e-4;
constexpr std::size_t kLeafCapacity = 8;
constexpr int kMaxDepth = 40;

/// Barnes-Hut quadtree over a fixed point set, rebuilt every iteration.
class QuadTree {
public:
    struct Cell {
        Eigen::Vector2d center;
        double half = 0.0;
        Eigen::Vector2d mass_center = Eigen::Vector2d::Zero();
        double mass = 0.0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t child = -1;  // index of first of four consecutive children
    };

    void build(const Positions& pos) {
        const auto n = static_cast<std::uint32_t>(pos.cols());
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0u);
        cells_.clear();
        const Eigen::Vector2d lo = pos.rowwise().minCoeff();
        const Eigen::Vector2d hi = pos.rowwise().maxCoeff();
        Cell root;
        root.center = (lo + hi) * 0.5;
        root.half = std::max((hi - lo).maxCoeff() * 0.5, 1e-6) * (1.0 + 1e-9);
        root.begin = 0;
        root.end = n;
        cells_.push_back(root);
        split(0, pos, 0);
    }

    /// Sum of repulsive forces on point `self`, strength * d / |d|^2 per pair.
    /// Closer than the minimum distance the magnitude stays at its value there.
    Eigen::Vector2d repulsion(std::uint32_t self, const Positions& pos, double theta, double strength) const {
        const Eigen::Vector2d p = pos.col(self);
        const double theta_sq = theta * theta;
        Eigen::Vector2d force = Eigen::Vector2d::Zero();
        std::int32_t stack[4 * kMaxDepth + 8];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Cell& c = cells_[static_cast<std::size_t>(stack[--top])];
            if (c.child < 0) {
                for (std::uint32_t k = c.begin; k < c.end; ++k) {
                    const std::uint32_t j = order_[k];
                    if (j != self) force += pair_force(self, j, p - pos.col(j), strength);
                }
                continue;
            }
            const Eigen::Vector2d d = p - c.mass_center;
            const double d2 = d.squaredNorm();
            const double width = 2.0 * c.half;
            const bool inside = (p - c.center).cwiseAbs().maxCoeff() <= c.half;
            if (!inside && d2 >= kMinDistanceSq && width * width < theta_sq * d2) {
                force += c.mass * strength * d / d2;
                continue;
            }
            for (int q = 0; q < 4; ++q) {
                const Cell& ch = cells_[static_cast<std::size_t>(c.child + q)];
                if (ch.end > ch.begin) stack[top++] = c.child + q;
            }
        }
        return force;
    }

    static Eigen::Vector2d pair_force(std::uint32_t a, std::uint32_t b, const Eigen::Vector2d& d, double strength) {
        const double d2 = d.squaredNorm();
        if (d2 < 1e-18) {
            // Coincident points: separate along a direction fixed by the pair ids.
            const std::uint64_t h = mix_seed(std::min(a, b), std::max(a, b));
            const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * M_PI;
            const double sign = a < b ? 1.0 : -1.0;
            return sign * strength / std::sqrt(kMinDistanceSq) * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        }
        if (d2 < kMinDistanceSq) return strength * d / (std::sqrt(d2) * std::sqrt(kMinDistanceSq));
        return strength * d / d2;
    }

private:
    void split(std::size_t index, const Positions& pos, int depth) {
        Cell cell = cells_[index];
        Eigen::Vector2d sum = Eigen::Vector2d::Zero();
        for (std::uint32_t k = cell.begin; k < cell.end; ++k) sum += pos.col(order_[k]);
        cell.mass = static_cast<double>(cell.end - cell.begin);
        cell.mass_center = cell.mass > 0 ? Eigen::Vector2d(sum / cell.mass) : cell.center;
        if (cell.end - cell.begin <= kLeafCapacity || depth >= kMaxDepth) {
            cells_[index] = cell;
            return;
        }
        auto first = order_.begin() + cell.begin;
        auto last = order_.begin() + cell.end;
        const double cx = cell.center.x();
        const double cy = cell.center.y();
        auto mid = std::stable_partition(first, last, [&](std::uint32_t i) { return pos(1, i) < cy; });
        auto q1 = std::stable_partition(first, mid, [&](std::uint32_t i) { return pos(0, i) < cx; });
        auto q3 = std::stable_partition(mid, last, [&](std::uint32_t i) { return pos(0, i) < cx; });
        const std::uint32_t bounds[5] = {cell.begin, static_cast<std::uint32_t>(q1 - order_.begin()),
                                         static_cast<std::uint32_t>(mid - order_.begin()),
                                         static_cast<std::uint32_t>(q3 - order_.begin()), cell.end};
        const double h = cell.half * 0.5;
        const Eigen::Vector2d offsets[4] = {{-h, -h}, {h, -h}, {-h, h}, {h, h}};
        cell.child = static_cast<std::int32_t>(cells_.size());
        cells_[index] = cell;
        for (int q = 0; q < 4; ++q) {
            Cell ch;
            ch.center = cell.center + offsets[q];
            ch.half = h;
            ch.begin = bounds[q];
            ch.end = bounds[q + 1];
            cells_.push_back(ch);
        }
        for (int q = 0; q < 4; ++q) split(static_cast<std::size_t>(cell.child + q), pos, depth + 1);
    }

    std::vector<Cell> cells_;
    std::vector<std::uint32_t> order_;
};

struct EdgeArrays {
    std::vector<std::uint32_t> u;
    std::vector<std::uint32_t> v;
    std::vector<double> w;
};

EdgeArrays edge_arrays(const WeightedGraph& graph) {
    EdgeArrays out;
    const auto edges = graph.edges();
    out.u.reserve(edges.size());
    out.v.reserve(edges.size());
    out.w.reserve(edges.size());
    for (const Edge& e : edges) {
        out.u.push_back(e.u);
        out.v.push_back(e.v);
        out.w.push_back(e.weight);
    }
    return out;
}

/// Positions scaled so the longer extent equals `side`, with missing (non-finite)
/// columns placed at random inside the box.
Positions to_working_frame(const Positions& warm, double side, Rng& rng) {
    const Eigen::Index n = warm.cols();
    Positions out(2, n);
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!warm.col(i).allFinite()) continue;
        lo = lo.cwiseMin(warm.col(i));
        hi = hi.cwiseMax(warm.col(i));
        any = true;
    }
    const double extent = any ? (hi - lo).maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (any && warm.col(i).allFinite()) {
            out.col(i) = extent > 0 ? Eigen::Vector2d((warm.col(i) - lo) * (side / extent)) : Eigen::Vector2d::Constant(side * 0.5);
        } else {
            const double x = rng.uniform();
            const double y = rng.uniform();
            out.col(i) = Eigen::Vector2d(x, y) * side;
        }
    }
    return out;
}

}  // namespace

Positions normalize(const Positions& positions) {
    const Eigen::Index n = positions.cols();
    Positions out(2, n);
    if (n == 0) return out;
    const Eigen::Vector2d lo = positions.rowwise().minCoeff();
    const Eigen::Vector2d hi = positions.rowwise().maxCoeff();
    const Eigen::Vector2d span = hi - lo;
    const double extent = span.maxCoeff();
    if (!(extent > 1e-12) || !std::isfinite(extent)) {
        out.setConstant(0.5);
        return out;
    }
    const Eigen::Vector2d pad = (Eigen::Vector2d::Ones() - span / extent) * 0.5;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.col(i) = ((positions.col(i) - lo) / extent + pad).cwiseMax(0.0).cwiseMin(1.0);
    }
    return out;
}

LayoutResult layout(const WeightedGraph& graph, const LayoutConfig& config, const Positions* warm_start) {
    config.validate();
    const std::size_t n = graph.node_count();
    if (n == 0) throw LayoutError("cannot lay out an empty graph");
    if (warm_start && static_cast<std::size_t>(warm_start->cols()) != n) {
        throw std::invalid_argument("warm start has " + std::to_string(warm_start->cols()) + " positions for " +
                                    std::to_string(n) + " nodes");
    }
    LayoutResult result;
    if (n == 1) {
        result.positions = Positions::Constant(2, 1, 0.5);
        result.iterations_run = config.iterations;
        return result;
    }

    // Working frame: ideal edge length 1 in a box of side sqrt(n).
    const double side = std::sqrt(static_cast<double>(n));
    Rng rng(config.seed);
    Positions pos = warm_start ? to_working_frame(*warm_start, side, rng)
                               : to_working_frame(Positions::Constant(2, static_cast<Eigen::Index>(n),
                                                                      std::numeric_limits<double>::quiet_NaN()),
                                                  side, rng);

    const EdgeArrays edges = edge_arrays(graph);
    Positions disp(2, static_cast<Eigen::Index>(n));
    QuadTree tree;
    const double start_step = config.cooling * side * std::sqrt(2.0);
    const auto started = std::chrono::steady_clock::now();

    for (std::size_t it = 0; it < config.iterations; ++it) {
        if (config.time_budget && it > 0 && std::chrono::steady_clock::now() - started >= *config.time_budget) {
            result.budget_exhausted = true;
            break;
        }
        tree.build(pos);
        for (std::uint32_t i = 0; i < n; ++i) disp.col(i) = tree.repulsion(i, pos, config.theta, 1.0);

        for (std::size_t e = 0; e < edges.w.size(); ++e) {
            const Eigen::Vector2d d = pos.col(edges.v[e]) - pos.col(edges.u[e]);
            const Eigen::Vector2d f = config.attraction * edges.w[e] * d.norm() * d;
            disp.col(edges.u[e]) += f;
            disp.col(edges.v[e]) -= f;
        }

        if (config.gravity > 0) {
            const Eigen::Vector2d centroid = pos.rowwise().mean();
            disp.colwise() += config.gravity * centroid;
            disp -= config.gravity * pos;
        }

        const double step = start_step * static_cast<double>(config.iterations - it) / static_cast<double>(config.iterations);
        for (std::uint32_t i = 0; i < n; ++i) {
            const double len = disp.col(i).norm();
            if (len > 0 && std::isfinite(len)) pos.col(i) += disp.col(i) * (std::min(len, step) / len);
        }
        result.iterations_run = it + 1;
    }
    result.positions = normalize(pos);
    return result;
}

LayoutResult layout_multilevel(const ContractionHierarchy& hierarchy, std::size_t display_level,
                               const LayoutConfig& config) {
    if (hierarchy.level_count() == 0) throw LayoutError("cannot lay out an empty hierarchy");
    if (display_level >= hierarchy.level_count()) throw std::invalid_argument("display level out of range");
    std::size_t level = hierarchy.level_count() - 1;
    LayoutResult result = layout(hierarchy.level(level).graph, config);
    while (level > display_level) {
        --level;
        const auto& fine = hierarchy.level(level);
        const std::size_t n = fine.graph.node_count();
        const double side = std::sqrt(static_cast<double>(n));
        Rng rng(mix_seed(config.seed, level + 1));
        Positions warm(2, static_cast<Eigen::Index>(n));
        for (std::size_t v = 0; v < n; ++v) {
            const NodeId parent = fine.to_coarser[v];
            const double radius = 0.5 * std::sqrt(static_cast<double>(hierarchy.level(level + 1).members[parent]) /
                                                   std::max<std::uint32_t>(fine.members[v], 1));
            const double angle = rng.uniform() * 2.0 * M_PI;
            const double r = radius * std::sqrt(rng.uniform());
            warm.col(static_cast<Eigen::Index>(v)) =
                result.positions.col(parent) * side + r * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        }
        result = layout(fine.graph, config, &warm);
    }
    return result;
}

Positions carry_positions(const ContractionHierarchy& next, const ContractionHierarchy& previous,
                          const Positions& previous_positions, std::uint64_t seed) {
    const auto old_map = previous.map_to_top();
    const auto new_map = next.map_to_top();
    const auto& top = next.top().graph;
    const std::size_t n = top.node_count();

    Positions sum = Positions::Zero(2, static_cast<Eigen::Index>(n));
    std::vector<std::uint32_t> known(n, 0);
    const std::size_t shared = std::min(old_map.size(), new_map.size());
    for (std::size_t v = 0; v < shared; ++v) {
        if (old_map[v] >= previous_positions.cols()) continue;
        const auto p = previous_positions.col(old_map[v]);
        if (!p.allFinite()) continue;
        sum.col(new_map[v]) += p;
        ++known[new_map[v]];
    }
    Positions out(2, static_cast<Eigen::Index>(n));
    std::vector<bool> placed(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (known[i] > 0) {
            out.col(static_cast<Eigen::Index>(i)) = sum.col(static_cast<Eigen::Index>(i)) / known[i];
            placed[i] = true;
        }
    }
    const Adjacency adj = Adjacency::from(top);
    Rng rng(mix_seed(seed, 0x5eed));
    for (std::size_t i = 0; i < n; ++i) {
        if (placed[i]) continue;
        Eigen::Vector2d c = Eigen::Vector2d::Zero();
        std::size_t count = 0;
        for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
            if (!placed[adj.targets[k]]) continue;
            c += out.col(adj.targets[k]);
            ++count;
        }
        out.col(static_cast<Eigen::Index>(i)) =
            count > 0 ? Eigen::Vector2d(c / static_cast<double>(count)) : Eigen::Vector2d(rng.uniform(), rng.uniform());
    }
    return out;
}

RelayoutResult relayout(WeightedGraph graph, const ContractionConfig& contraction, const LayoutConfig& config,
                        const ContractionHierarchy* previous_hierarchy, const Positions* previous_positions) {
    RelayoutResult out{build_hierarchy(graph, contraction), {}};
    if (previous_hierarchy && previous_positions) {
        const Positions warm = carry_positions(out.hierarchy, *previous_hierarchy, *previous_positions, config.seed);
        out.layout = layout(out.hierarchy.top().graph, config, &warm);
    } else {
        out.layout = layout(out.hierarchy.top().graph, config);
    }
    return out;
}

void write_positions(std::ostream& out, const Positions& positions, std::uint32_t id_offset) {
    char buf[96];
    for (Eigen::Index i = 0; i < positions.cols(); ++i) {
        std::snprintf(buf, sizeof buf, "%u %.17g %.17g\n", static_cast<std::uint32_t>(i) + id_offset, positions(0, i),
                      positions(1, i));
        out << buf;
    }
}

Positions read_positions(std::istream& in, std::size_t node_count, std::uint32_t id_offset) {
    Positions out = Positions::Constant(2, static_cast<Eigen::Index>(node_count), std::numeric_limits<double>::quiet_NaN());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t id = 0;
        double x = 0, y = 0;
        if (!(ls >> id >> x >> y) || id < id_offset || id - id_offset >= node_count) {
            throw std::runtime_error("positions line " + std::to_string(lineno) + ": expected 'node_id x y' for a known node");
        }
        out.col(static_cast<Eigen::Index>(id - id_offset)) = Eigen::Vector2d(x, y);
    }
    return out;
}

}  // namespace clauseviz
