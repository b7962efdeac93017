#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "clauseviz/contraction.hpp"
#include "clauseviz/graph.hpp"

namespace clauseviz {

/// One column per node.
using Positions = Eigen::Matrix2Xd;

struct LayoutConfig {
    std::size_t iterations = 500;
    std::uint64_t seed = 1;
    /// Multiplies the spring term; edge weight enters linearly on top.
    double attraction = 1.0;
    /// Barnes-Hut opening angle.
    double theta = 0.9;
    /// Initial step length as a fraction of the bounding-box diagonal.
    double cooling = 0.1;
    /// Pull toward the centroid; keeps disconnected parts in view.
    double gravity = 0.02;
    /// Optional wall-clock cap. Results are only reproducible with it unset.
    std::optional<std::chrono::milliseconds> time_budget;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct LayoutResult {
    Positions positions;
    std::size_t iterations_run = 0;
    bool budget_exhausted = false;
};

class LayoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Spring embedder with quadtree-approximated repulsion. Output is normalized
/// into the unit box and depends only on (graph, config, warm_start).
/// Throws LayoutError for an empty graph.
LayoutResult layout(const WeightedGraph& graph, const LayoutConfig& config, const Positions* warm_start = nullptr);

/// Uniform scale into [0,1]^2: the longer extent spans [0,1], the shorter is
/// centered; degenerate inputs collapse to (0.5, 0.5).
Positions normalize(const Positions& positions);

/// Lays out the top level, then expands every supernode's members in a small
/// disc around it and continues down to `display_level`.
LayoutResult layout_multilevel(const ContractionHierarchy& hierarchy, std::size_t display_level,
                               const LayoutConfig& config);

struct RelayoutResult {
    ContractionHierarchy hierarchy;
    LayoutResult layout;
};

/// Contracts `graph` (when it exceeds the target size) and lays out its top
/// level, warm-started from `previous` positions carried through the old
/// hierarchy: a new node starts at the mean of its members' old positions,
/// else at the centroid of placed neighbors, else at a seeded random spot.
RelayoutResult relayout(WeightedGraph graph, const ContractionConfig& contraction, const LayoutConfig& config,
                        const ContractionHierarchy* previous_hierarchy = nullptr,
                        const Positions* previous_positions = nullptr);

/// Maps old top-level positions onto the top level of `next`.
Positions carry_positions(const ContractionHierarchy& next, const ContractionHierarchy& previous,
                          const Positions& previous_positions, std::uint64_t seed);

/// "node_id x y" per line.
void write_positions(std::ostream& out, const Positions& positions, std::uint32_t id_offset = 0);
/// Reads the same format; nodes not listed are set to NaN.
Positions read_positions(std::istream& in, std::size_t node_count, std::uint32_t id_offset = 0);

}  // namespace clauseviz
