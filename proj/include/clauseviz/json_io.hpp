#pragma once

#include <json.hpp>

#include "clauseviz/session.hpp"

namespace clauseviz {

nlohmann::json to_json(const TransformConfig& config);
nlohmann::json to_json(const HeatConfig& config);
nlohmann::json to_json(const ContractionConfig& config);
nlohmann::json to_json(const LayoutConfig& config);
nlohmann::json to_json(const SessionConfig& config);

/// Applies the keys present in `patch` ("mode", "k", "palette",
/// "include_deletions") on top of `base`. Throws std::invalid_argument.
HeatConfig heat_config_from_json(const nlohmann::json& patch, HeatConfig base);

/// Frame as pushed to clients. Heats are always included; positions and
/// members only with `geometry`, edges only with `edges`.
nlohmann::json frame_to_json(const FrameState& frame, bool geometry, bool edges);

/// Session summary for get_state.
nlohmann::json state_to_json(const Session& session);

}  // namespace clauseviz
