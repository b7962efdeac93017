#include "clauseviz/heatmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace clauseviz {

Palette default_palette() { return {{0x00, 0x00, 0x8B}, {0xFF, 0xFF, 0x00}, {0xFF, 0x00, 0x00}}; }

Rgb parse_color(const std::string& text) {
    std::string hex = text;
    if (!hex.empty() && hex.front() == '#') hex.erase(0, 1);
    if (hex.size() != 6 || !std::all_of(hex.begin(), hex.end(), [](unsigned char c) { return std::isxdigit(c); })) {
        throw std::invalid_argument("bad color '" + text + "' (expected #RRGGBB)");
    }
    const unsigned long v = std::stoul(hex, nullptr, 16);
    return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

Palette parse_palette(const std::string& text) {
    Palette out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        out.push_back(parse_color(item));
    }
    if (out.size() < 2) throw std::invalid_argument("palette needs at least two colors");
    return out;
}

std::string to_hex(Rgb color) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", color.r, color.g, color.b);
    return buf;
}

HeatMode parse_heat_mode(const std::string& name) {
    if (name == "window") return HeatMode::WindowCount;
    if (name == "decay") return HeatMode::Decay;
    throw std::invalid_argument("unknown heat mode '" + name + "' (expected window|decay)");
}

std::string to_string(HeatMode mode) { return mode == HeatMode::WindowCount ? "window" : "decay"; }

void HeatConfig::validate() const {
    if (k < 1) throw std::invalid_argument("heat k must be >= 1");
    if (palette.size() < 2) throw std::invalid_argument("palette needs at least two colors");
}

HeatState::HeatState(HeatConfig config, std::size_t node_count) : config_(std::move(config)) {
    config_.validate();
    if (config_.mode == HeatMode::WindowCount) {
        window_.resize(config_.k);
        histogram_.assign(config_.k + 1, 0);
    }
    ensure(node_count);
}

void HeatState::ensure(std::size_t nodes) {
    if (nodes <= counts_.size()) return;
    counts_.resize(nodes, 0);
    last_touch_.resize(nodes, -1);
}

void HeatState::bump(NodeId node) {
    std::uint32_t& c = counts_[node];
    if (c > 0) --histogram_[c];
    ++c;
    ++histogram_[c];
    max_count_ = std::max(max_count_, c);
}

void HeatState::drop(NodeId node) {
    std::uint32_t& c = counts_[node];
    --histogram_[c];
    if (c == max_count_ && histogram_[c] == 0) --max_count_;
    --c;
    if (c > 0) ++histogram_[c];
}

void HeatState::update(const ClauseEvent& event) {
    const std::int64_t now = static_cast<std::int64_t>(events_++);
    if (event.status != ClauseStatus::Ok) return;
    if (event.kind == EventKind::Delete && !config_.include_deletions) return;
    ensure(event.clause.max_variable());

    if (config_.mode == HeatMode::Decay) {
        for (Literal l : event.clause) last_touch_[node_of(l)] = now;
        return;
    }
    std::vector<NodeId>& slot = window_[window_head_];
    if (window_fill_ == config_.k) {
        for (NodeId v : slot) drop(v);
    } else {
        ++window_fill_;
    }
    slot.clear();
    for (Literal l : event.clause) {
        slot.push_back(node_of(l));
        bump(node_of(l));
    }
    window_head_ = (window_head_ + 1) % config_.k;
}

double HeatState::value(NodeId node) const {
    if (node >= counts_.size()) return 0.0;
    if (config_.mode == HeatMode::WindowCount) {
        return max_count_ == 0 ? 0.0 : static_cast<double>(counts_[node]) / static_cast<double>(max_count_);
    }
    const std::int64_t touched = last_touch_[node];
    if (touched < 0) return 0.0;
    const double age = static_cast<double>(static_cast<std::int64_t>(events_) - 1 - touched);
    return std::max(0.0, 1.0 - age / static_cast<double>(config_.k));
}

std::vector<double> HeatState::values(std::size_t count) const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = value(static_cast<NodeId>(i));
    return out;
}

bool HeatState::operator==(const HeatState& other) const {
    if (config_.mode != other.config_.mode || config_.k != other.config_.k || events_ != other.events_) return false;
    const std::size_t n = std::max(node_count(), other.node_count());
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<NodeId>(i);
        if (count(v) != other.count(v) || last_touch(v) != other.last_touch(v)) return false;
    }
    return max_count_ == other.max_count_ && window_fill_ == other.window_fill_;
}

std::vector<double> aggregate_heat(std::span<const NodeId> fine_to_coarse, std::size_t coarse_count,
                                   std::span<const double> fine) {
    std::vector<double> sum(coarse_count, 0.0);
    std::vector<std::uint32_t> members(coarse_count, 0);
    for (std::size_t v = 0; v < fine_to_coarse.size(); ++v) {
        const NodeId c = fine_to_coarse[v];
        if (v < fine.size()) sum[c] += fine[v];
        ++members[c];
    }
    for (std::size_t c = 0; c < coarse_count; ++c) {
        if (members[c] > 0) sum[c] /= members[c];
    }
    return sum;
}

std::vector<double> aggregate_heat(const ContractionHierarchy& hierarchy, std::size_t level,
                                   std::span<const double> fine) {
    const auto map = hierarchy.map_to(level);
    return aggregate_heat(map, hierarchy.level(level).graph.node_count(), fine);
}

Rgb heat_to_color(double heat, const Palette& palette) {
    if (!(heat >= 0.0 && heat <= 1.0)) throw std::out_of_range("heat value outside [0,1]");
    if (palette.size() < 2) throw std::invalid_argument("palette needs at least two colors");
    const double scaled = heat * static_cast<double>(palette.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(scaled), palette.size() - 2);
    const double t = scaled - static_cast<double>(i);
    const auto mix = [t](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::floor(a + (static_cast<double>(b) - a) * t + 0.5));
    };
    const Rgb& lo = palette[i];
    const Rgb& hi = palette[i + 1];
    return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

}  // namespace clauseviz
