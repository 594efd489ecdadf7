#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hrc/sim/metrics.hpp"
#include "hrc/sim/trace.hpp"

namespace hrc::sim {

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr int kMetricsSchemaVersion = 1;

inline constexpr std::string_view kCsvHeader =
    "t,q1,q2,q3,q4,q5,q6,x_R_x,x_R_y,x_R_z,v_cmd_x,v_cmd_y,v_cmd_z,case,d_RO,d_RO_true,theta_C,"
    "blend_weight,mode,vib_left,vib_right,fdcm,hand_present,marker_visible,marker_angle_y,marker_angle_x,"
    "gimbal_lower,gimbal_upper,hand_true_x,hand_true_y,hand_true_z,hand_est_x,hand_est_y,hand_est_z,goal_index";

inline std::string fmt9(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// CSV export: fixed column order, SI units (m, s, rad), 9 significant digits.
inline void write_csv(const SimTrace& trace, std::ostream& os)
{
  os << kCsvHeader << '\n';
  for (const auto& r : trace.rows) {
    std::string line = fmt9(r.t);
    auto put = [&line](const std::string& s) {
      line += ',';
      line += s;
    };
    for (int i = 0; i < 6; ++i) put(fmt9(r.q[i]));
    for (int i = 0; i < 3; ++i) put(fmt9(r.x_r[i]));
    for (int i = 0; i < 3; ++i) put(fmt9(r.v_cmd[i]));
    put(std::string(to_string(r.control_case)));
    put(fmt9(r.d_ro));
    put(fmt9(r.d_ro_true));
    put(fmt9(r.theta_c));
    put(fmt9(r.blend_weight));
    put(std::to_string(static_cast<int>(r.mode)));
    put(r.vib_left ? "1" : "0");
    put(r.vib_right ? "1" : "0");
    put(r.fdcm ? "1" : "0");
    put(r.hand_present ? "1" : "0");
    put(r.marker_visible ? "1" : "0");
    put(fmt9(r.marker_angle_y));
    put(fmt9(r.marker_angle_x));
    put(fmt9(r.gimbal_lower));
    put(fmt9(r.gimbal_upper));
    for (int i = 0; i < 3; ++i) put(fmt9(r.hand_true[i]));
    for (int i = 0; i < 3; ++i) put(fmt9(r.hand_est[i]));
    put(std::to_string(r.goal_index));
    os << line << '\n';
  }
}

namespace detail {

using nlohmann::json;

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double num_of(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

template <int N>
json vec(const Eigen::Matrix<double, N, 1>& v)
{
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(num(v[i]));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> vec_of(const json& j)
{
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = num_of(j.at(static_cast<std::size_t>(i)));
  return v;
}

inline ControlCase case_of(const std::string& s)
{
  for (auto c : {ControlCase::NoAvoidance, ControlCase::AvoidType1, ControlCase::AvoidType2, ControlCase::Fdcm}) {
    if (to_string(c) == s) return c;
  }
  throw std::runtime_error("unknown control case '" + s + "'");
}

}  // namespace detail

inline nlohmann::json row_to_json(const TraceRow& r)
{
  using detail::num;
  using detail::vec;
  return {{"record", "row"},
          {"t", r.t},
          {"q", vec<6>(r.q)},
          {"x_R", vec<3>(r.x_r)},
          {"v_cmd", vec<3>(r.v_cmd)},
          {"case", std::string(to_string(r.control_case))},
          {"d_RO", num(r.d_ro)},
          {"d_RO_true", num(r.d_ro_true)},
          {"theta_C", num(r.theta_c)},
          {"blend_weight", num(r.blend_weight)},
          {"mode", static_cast<int>(r.mode)},
          {"vib_left", r.vib_left},
          {"vib_right", r.vib_right},
          {"fdcm", r.fdcm},
          {"hand_present", r.hand_present},
          {"marker_visible", r.marker_visible},
          {"marker_angles", {num(r.marker_angle_y), num(r.marker_angle_x)}},
          {"gimbal", {num(r.gimbal_lower), num(r.gimbal_upper)}},
          {"hand_true", vec<3>(r.hand_true)},
          {"hand_est", vec<3>(r.hand_est)},
          {"goal_index", r.goal_index}};
}

inline TraceRow row_from_json(const nlohmann::json& j)
{
  using detail::num_of;
  using detail::vec_of;
  TraceRow r;
  r.t = j.at("t").get<double>();
  r.q = vec_of<6>(j.at("q"));
  r.x_r = vec_of<3>(j.at("x_R"));
  r.v_cmd = vec_of<3>(j.at("v_cmd"));
  r.control_case = detail::case_of(j.at("case").get<std::string>());
  r.d_ro = num_of(j.at("d_RO"));
  r.d_ro_true = num_of(j.at("d_RO_true"));
  r.theta_c = num_of(j.at("theta_C"));
  r.blend_weight = num_of(j.at("blend_weight"));
  r.mode = static_cast<SafetyMode>(j.at("mode").get<int>());
  r.vib_left = j.at("vib_left").get<bool>();
  r.vib_right = j.at("vib_right").get<bool>();
  r.fdcm = j.at("fdcm").get<bool>();
  r.hand_present = j.at("hand_present").get<bool>();
  r.marker_visible = j.at("marker_visible").get<bool>();
  r.marker_angle_y = num_of(j.at("marker_angles").at(0));
  r.marker_angle_x = num_of(j.at("marker_angles").at(1));
  r.gimbal_lower = num_of(j.at("gimbal").at(0));
  r.gimbal_upper = num_of(j.at("gimbal").at(1));
  r.hand_true = vec_of<3>(j.at("hand_true"));
  r.hand_est = vec_of<3>(j.at("hand_est"));
  r.goal_index = j.at("goal_index").get<int>();
  return r;
}

/// Structured records: a header record, then one record per row, one JSON
/// object per line. Non-finite numbers are written as null.
inline void write_jsonl(const SimTrace& trace, std::ostream& os)
{
  nlohmann::json header = {{"record", "header"},
                           {"schema", "hrc.trace"},
                           {"version", kTraceSchemaVersion},
                           {"scenario", trace.scenario},
                           {"seed", trace.seed},
                           {"control_dt", trace.control_dt},
                           {"log_dt", trace.log_dt},
                           {"completed", trace.completed},
                           {"task_time", trace.task_time},
                           {"rows", trace.rows.size()}};
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : trace.waypoints) wps.push_back(detail::vec<3>(w));
  header["waypoints"] = wps;
  os << header.dump() << '\n';
  for (const auto& r : trace.rows) {
    os << row_to_json(r).dump() << '\n';
  }
}

inline SimTrace read_jsonl(std::istream& is)
{
  SimTrace trace;
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("empty trace file");
  }
  const auto header = nlohmann::json::parse(line);
  if (header.value("schema", "") != "hrc.trace") {
    throw std::runtime_error("not a trace file");
  }
  if (header.at("version").get<int>() != kTraceSchemaVersion) {
    throw std::runtime_error("unsupported trace schema version");
  }
  trace.scenario = header.at("scenario").get<std::string>();
  trace.seed = header.at("seed").get<std::uint64_t>();
  trace.control_dt = header.at("control_dt").get<double>();
  trace.log_dt = header.at("log_dt").get<double>();
  trace.completed = header.at("completed").get<bool>();
  trace.task_time = header.at("task_time").get<double>();
  for (const auto& w : header.at("waypoints")) trace.waypoints.push_back(detail::vec_of<3>(w));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    trace.rows.push_back(row_from_json(nlohmann::json::parse(line)));
  }
  return trace;
}

inline nlohmann::json metrics_to_json(const Metrics& m)
{
  using detail::num;
  nlohmann::json j = {{"schema", "hrc.metrics"},
                      {"version", kMetricsSchemaVersion},
                      {"min_d_RO", num(m.min_d_ro)},
                      {"mean_d_RO", num(m.mean_d_ro)},
                      {"histogram_bin_width", kHistogramBinWidth},
                      {"histogram", m.histogram},
                      {"histogram_overflow", m.histogram_overflow},
                      {"tcp_path_length", m.tcp_path_length},
                      {"collision_path", m.collision_path ? num(*m.collision_path) : nlohmann::json(nullptr)},
                      {"task_time", m.task_time},
                      {"completed", m.completed},
                      {"occlusion_time", m.occlusion_time},
                      {"fdcm_count", m.fdcm_count},
                      {"distance_samples", m.distance_samples}};
  return j;
}

}  // namespace hrc::sim
