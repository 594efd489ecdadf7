#pragma once

#include <string>
#include <variant>

#include "json.hpp"

#include "hrc/sim/engine.hpp"
#include "hrc/sim/trace_io.hpp"

namespace hrc::sim::protocol {

inline constexpr int kSchemaVersion = 1;

struct ProtocolError {
  std::string code;
  std::string message;
};

using Parsed = std::variant<Command, ProtocolError>;

inline nlohmann::json state_frame(const LiveState& live)
{
  using detail::num;
  using detail::vec;
  const TraceRow& r = live.row;
  return {{"type", "state"},
          {"schema", kSchemaVersion},
          {"t", r.t},
          {"x_R", vec<3>(r.x_r)},
          {"q", vec<6>(r.q)},
          {"hand_true", vec<3>(r.hand_true)},
          {"hand_est", vec<3>(r.hand_est)},
          {"d_RO", num(r.d_ro)},
          {"mode", static_cast<int>(r.mode)},
          {"vib_left", r.vib_left},
          {"vib_right", r.vib_right},
          {"fdcm", r.fdcm},
          {"case", std::string(to_string(r.control_case))},
          {"marker_visible", r.marker_visible},
          {"marker_angles", {num(r.marker_angle_y), num(r.marker_angle_x)}},
          {"goal_index", r.goal_index},
          {"paused", live.paused}};
}

inline nlohmann::json config_frame(const ScenarioConfig& cfg, double stream_hz)
{
  using detail::vec;
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : cfg.waypoints) wps.push_back(vec<3>(w.position));
  return {{"type", "config"},
          {"schema", kSchemaVersion},
          {"workspace", {{"min", vec<3>(cfg.workspace.min)}, {"max", vec<3>(cfg.workspace.max)}}},
          {"d_ACT", cfg.controller.d_act},
          {"d_AT", cfg.controller.d_at},
          {"waypoints", wps},
          {"stream_hz", stream_hz},
          {"control_dt", cfg.control_dt}};
}

inline nlohmann::json error_frame(const ProtocolError& e)
{
  return {{"type", "error"}, {"schema", kSchemaVersion}, {"code", e.code}, {"message", e.message}};
}

namespace detail {

inline bool finite_number(const nlohmann::json& j, const char* key)
{
  return j.contains(key) && j[key].is_number() && std::isfinite(j[key].get<double>());
}

}  // namespace detail

/// Decodes one client text frame. Never throws; malformed input yields a
/// ProtocolError to echo back to the client.
inline Parsed parse_client_message(const std::string& text)
{
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return ProtocolError{"bad_json", "frame is not a JSON object"};
  }
  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != kSchemaVersion) {
    return ProtocolError{"schema_mismatch", "frames must carry \"schema\": " + std::to_string(kSchemaVersion)};
  }
  if (!j.contains("type") || !j["type"].is_string()) {
    return ProtocolError{"bad_type", "missing string field \"type\""};
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "hand_move") {
    if (!detail::finite_number(j, "x") || !detail::finite_number(j, "y") || !detail::finite_number(j, "z")) {
      return ProtocolError{"bad_field", "hand_move needs finite numbers x, y, z"};
    }
    return Command{HandMove{Vec3(j["x"].get<double>(), j["y"].get<double>(), j["z"].get<double>())}};
  }
  if (type == "pause") return Command{Pause{}};
  if (type == "resume") return Command{Resume{}};
  if (type == "reset") return Command{Reset{}};
  if (type == "set_param") {
    if (!j.contains("name") || !j["name"].is_string() || !detail::finite_number(j, "value")) {
      return ProtocolError{"bad_field", "set_param needs a string name and a finite number value"};
    }
    const std::string name = j["name"].get<std::string>();
    if (!is_tunable_param(name)) {
      return ProtocolError{"unknown_param", "parameter '" + name + "' is not tunable"};
    }
    return Command{SetParam{name, j["value"].get<double>()}};
  }
  return ProtocolError{"bad_type", "unknown message type '" + type + "'"};
}

}  // namespace hrc::sim::protocol
