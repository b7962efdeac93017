#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clauseviz/cnf.hpp"
#include "clauseviz/contraction.hpp"

namespace clauseviz {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Color stops from cold to hot, evenly spaced over [0,1].
using Palette = std::vector<Rgb>;

/// Dark blue, yellow, red.
Palette default_palette();

/// "#RRGGBB" (the '#' is optional). Throws std::invalid_argument.
Rgb parse_color(const std::string& text);
/// Comma-separated list of colors.
Palette parse_palette(const std::string& text);
std::string to_hex(Rgb color);

enum class HeatMode {
    /// Occurrences over the last k added clauses, divided by the largest count.
    WindowCount,
    /// 1 on touch, falling linearly to 0 over the next k events.
    Decay,
};

HeatMode parse_heat_mode(const std::string& name);  // "window" | "decay"
std::string to_string(HeatMode mode);

struct HeatConfig {
    HeatMode mode = HeatMode::WindowCount;
    std::size_t k = 1000;
    Palette palette = default_palette();
    /// Count deleted clauses as activity as well.
    bool include_deletions = false;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Per-node activity. Nodes are 0-based (variable - 1), like graph nodes.
/// Every event advances time by one; only Add events (and Delete events when
/// enabled) touch variables. Tautologies and empty clauses touch nothing.
class HeatState {
public:
    explicit HeatState(HeatConfig config = {}, std::size_t node_count = 0);

    void update(const ClauseEvent& event);

    /// Heat in [0,1]; nodes never seen are 0.
    double value(NodeId node) const;
    /// value() for nodes [0, count).
    std::vector<double> values(std::size_t count) const;

    /// Number of events seen so far; the latest event has index events() - 1.
    std::uint64_t events() const { return events_; }
    /// Window occurrence count (WindowCount mode).
    std::uint32_t count(NodeId node) const { return node < counts_.size() ? counts_[node] : 0; }
    std::uint32_t max_count() const { return max_count_; }
    /// Event index of the last touch, or -1 (Decay mode).
    std::int64_t last_touch(NodeId node) const { return node < last_touch_.size() ? last_touch_[node] : -1; }
    std::size_t window_size() const { return window_fill_; }

    const HeatConfig& config() const { return config_; }
    std::size_t node_count() const { return counts_.size(); }

    bool operator==(const HeatState& other) const;

private:
    void ensure(std::size_t nodes);
    void bump(NodeId node);
    void drop(NodeId node);

    HeatConfig config_;
    std::uint64_t events_ = 0;
    // WindowCount
    std::vector<std::vector<NodeId>> window_;
    std::size_t window_head_ = 0;
    std::size_t window_fill_ = 0;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> histogram_;  // histogram_[c] = nodes with count c (c >= 1)
    std::uint32_t max_count_ = 0;
    // Decay
    std::vector<std::int64_t> last_touch_;
};

/// Mean of member heats per node of `level`. Fine heats beyond the
/// hierarchy's base are ignored; missing ones count as 0.
std::vector<double> aggregate_heat(const ContractionHierarchy& hierarchy, std::size_t level,
                                   std::span<const double> fine);
/// Same, for an explicit fine -> coarse map.
std::vector<double> aggregate_heat(std::span<const NodeId> fine_to_coarse, std::size_t coarse_count,
                                   std::span<const double> fine);

/// Piecewise-linear interpolation with round-half-up per channel.
/// Throws std::out_of_range for heat outside [0,1] (or NaN) and
/// std::invalid_argument for a palette with fewer than two stops.
Rgb heat_to_color(double heat, const Palette& palette);

}  // namespace clauseviz
