#include "clauseviz/json_io.hpp"

#include <stdexcept>

namespace clauseviz {

using nlohmann::json;

json to_json(const TransformConfig& config) {
    return {{"reduction", to_string(config.reduction)}, {"weight_fn", to_string(config.weight_function)}};
}

json to_json(const HeatConfig& config) {
    json palette = json::array();
    for (Rgb c : config.palette) palette.push_back(to_hex(c));
    return {{"mode", to_string(config.mode)},
            {"k", config.k},
            {"palette", palette},
            {"include_deletions", config.include_deletions}};
}

json to_json(const ContractionConfig& config) {
    return {{"target", config.target_size},
            {"max_levels", config.max_levels},
            {"max_rounds", config.max_rounds},
            {"seed", config.seed},
            {"vote", config.propagation.vote == VoteMode::Weighted ? "weighted" : "count"},
            {"tie_break", config.propagation.tie_break == TieBreak::SmallestLabel ? "smallest" : "keep-random"}};
}

json to_json(const LayoutConfig& config) {
    json out = {{"iterations", config.iterations}, {"seed", config.seed},     {"attraction", config.attraction},
                {"theta", config.theta},           {"cooling", config.cooling}, {"gravity", config.gravity}};
    out["time_budget_ms"] = config.time_budget ? json(config.time_budget->count()) : json(nullptr);
    return out;
}

json to_json(const SessionConfig& config) {
    return {{"transform", to_json(config.transform)},
            {"heat", to_json(config.heat)},
            {"contraction", to_json(config.contraction)},
            {"layout", to_json(config.layout)},
            {"checkpoint_interval", config.checkpoint_interval},
            {"frame_rate", config.frame_rate},
            {"events_per_frame", config.chunk.is_drain() ? json("drain") : json(config.chunk.fixed)}};
}

HeatConfig heat_config_from_json(const json& patch, HeatConfig base) {
    if (!patch.is_object()) throw std::invalid_argument("heat config must be a JSON object");
    for (const auto& [key, value] : patch.items()) {
        if (key == "mode") {
            if (!value.is_string()) throw std::invalid_argument("'mode' must be a string");
            base.mode = parse_heat_mode(value.get<std::string>());
        } else if (key == "k") {
            if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
                throw std::invalid_argument("'k' must be a positive integer");
            }
            base.k = value.get<std::size_t>();
        } else if (key == "palette") {
            if (value.is_string()) {
                base.palette = parse_palette(value.get<std::string>());
            } else if (value.is_array()) {
                Palette p;
                for (const auto& c : value) {
                    if (!c.is_string()) throw std::invalid_argument("palette entries must be \"#RRGGBB\" strings");
                    p.push_back(parse_color(c.get<std::string>()));
                }
                base.palette = std::move(p);
            } else {
                throw std::invalid_argument("'palette' must be a list of colors");
            }
        } else if (key == "include_deletions") {
            if (!value.is_boolean()) throw std::invalid_argument("'include_deletions' must be a boolean");
            base.include_deletions = value.get<bool>();
        } else if (key != "cmd") {
            throw std::invalid_argument("unknown heat config key '" + key + "'");
        }
    }
    base.validate();
    return base;
}

json frame_to_json(const FrameState& frame, bool geometry, bool edges) {
    json out = {{"frame", frame.frame_index},
                {"cursor", frame.cursor},
                {"status", to_string(frame.status)},
                {"layout_generation", frame.layout_generation},
                {"heats", frame.heats},
                {"stats",
                 {{"events_per_second", frame.stats.events_per_second},
                  {"log_length", frame.stats.log_length},
                  {"unknown_deletes", frame.stats.unknown_deletes}}}};
    if (geometry) {
        json xy = json::array();
        for (Eigen::Index i = 0; i < frame.positions.cols(); ++i) {
            xy.push_back(frame.positions(0, i));
            xy.push_back(frame.positions(1, i));
        }
        out["positions"] = std::move(xy);
        out["members"] = frame.members;
    }
    if (edges) {
        json list = json::array();
        for (const Edge& e : frame.edges) list.push_back(json::array({e.u, e.v, e.weight}));
        out["edges"] = std::move(list);
    }
    return out;
}

json state_to_json(const Session& session) {
    const FrameState& f = session.frame();
    return {{"status", to_string(session.status())},
            {"cursor", session.cursor()},
            {"log_length", f.stats.log_length},
            {"producer_done", session.shared_log()->closed()},
            {"frame", f.frame_index},
            {"checkpoint_interval", session.config().checkpoint_interval},
            {"checkpoints", session.checkpoint_count()},
            {"relayout_running", session.relayout_running()},
            {"layout_generation", session.layout_generation()},
            {"display_nodes", f.heats.size()},
            {"levels", session.hierarchy().level_count()},
            {"unknown_deletes", f.stats.unknown_deletes},
            {"heat", to_json(session.config().heat)},
            {"config", to_json(session.config())}};
}

}  // namespace clauseviz
