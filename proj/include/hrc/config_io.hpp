#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hrc/errors.hpp"
#include "hrc/kinematics.hpp"
#include "hrc/sim/scenario.hpp"

namespace hrc {

namespace detail {

/// Thin reader over a parsed YAML document that reports errors as
/// "file:line: message".
class YamlReader {
 public:
  explicit YamlReader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const
  {
    const int line = node.IsDefined() ? node.Mark().line + 1 : 0;
    throw ConfigError(file_, line, msg);
  }

  void expect_map(const YAML::Node& node, const std::string& what, std::initializer_list<const char*> allowed) const
  {
    if (!node.IsMap()) {
      fail(node, what + " must be a mapping");
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) {
        fail(kv.first, "unknown key '" + key + "' in " + what);
      }
    }
  }

  YAML::Node require(const YAML::Node& map, const char* key, const std::string& what) const
  {
    const YAML::Node n = map[key];
    if (!n) {
      fail(map, what + ": missing required key '" + key + "'");
    }
    return n;
  }

  double number(const YAML::Node& n, const std::string& what) const
  {
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number");
    }
  }

  double number_or(const YAML::Node& map, const char* key, double fallback) const
  {
    const YAML::Node n = map[key];
    return n ? number(n, key) : fallback;
  }

  double angle_deg_or(const YAML::Node& map, const char* key, double fallback_rad) const
  {
    const YAML::Node n = map[key];
    return n ? deg2rad(number(n, key)) : fallback_rad;
  }

  bool boolean_or(const YAML::Node& map, const char* key, bool fallback) const
  {
    const YAML::Node n = map[key];
    if (!n) {
      return fallback;
    }
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, std::string(key) + " must be true or false");
    }
  }

  std::string string(const YAML::Node& n, const std::string& what) const
  {
    if (!n.IsScalar()) {
      fail(n, what + " must be a string");
    }
    return n.as<std::string>();
  }

  std::vector<double> numbers(const YAML::Node& n, std::size_t count, const std::string& what) const
  {
    if (!n.IsSequence() || n.size() != count) {
      fail(n, what + " must be a list of " + std::to_string(count) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : n) {
      out.push_back(number(e, what));
    }
    return out;
  }

  Vec3 vec3(const YAML::Node& n, const std::string& what) const
  {
    const auto v = numbers(n, 3, what);
    return {v[0], v[1], v[2]};
  }

  Vec3 vec3_or(const YAML::Node& map, const char* key, const Vec3& fallback) const
  {
    const YAML::Node n = map[key];
    return n ? vec3(n, key) : fallback;
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

inline YAML::Node load_yaml_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, 0, "cannot open file");
  }
  try {
    return YAML::Load(in);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path, e.mark.line + 1, e.msg);
  }
}

inline Transform pose_from_yaml(const YamlReader& rd, const YAML::Node& n, const std::string& what)
{
  rd.expect_map(n, what, {"translation", "rpy_deg"});
  const Vec3 t = rd.vec3_or(n, "translation", Vec3::Zero());
  const Vec3 rpy = rd.vec3_or(n, "rpy_deg", Vec3::Zero());
  return Transform::from_rpy(t, deg2rad(rpy[0]), deg2rad(rpy[1]), deg2rad(rpy[2]));
}

}  // namespace detail

/// Arm description: DH rows, joint limits, rate caps and base pose.
inline ArmModel parse_arm(const YAML::Node& root, const std::string& file)
{
  detail::YamlReader rd(file);
  rd.expect_map(root, "arm description", {"name", "dh", "joint_limits_deg", "rate_caps_deg_s", "base_pose"});
  ArmModel m;
  const YAML::Node dh = rd.require(root, "dh", "arm description");
  if (!dh.IsSequence() || dh.size() != static_cast<std::size_t>(kJoints)) {
    rd.fail(dh, "dh must list exactly 6 rows");
  }
  for (std::size_t i = 0; i < dh.size(); ++i) {
    const YAML::Node row = dh[i];
    rd.expect_map(row, "dh row", {"a", "d", "alpha_deg", "theta_offset_deg"});
    m.dh[i].a = rd.number_or(row, "a", 0.0);
    m.dh[i].d = rd.number_or(row, "d", 0.0);
    m.dh[i].alpha = rd.angle_deg_or(row, "alpha_deg", 0.0);
    m.dh[i].theta_offset = rd.angle_deg_or(row, "theta_offset_deg", 0.0);
  }
  if (const YAML::Node lim = root["joint_limits_deg"]) {
    if (!lim.IsSequence() || lim.size() != static_cast<std::size_t>(kJoints)) {
      rd.fail(lim, "joint_limits_deg must list 6 [lo, hi] pairs");
    }
    for (std::size_t i = 0; i < lim.size(); ++i) {
      const auto pair = rd.numbers(lim[i], 2, "joint limit");
      if (!(pair[0] < pair[1])) {
        rd.fail(lim[i], "joint limit lower bound must be below upper bound");
      }
      m.joint_limits[i] = {deg2rad(pair[0]), deg2rad(pair[1])};
    }
  }
  if (const YAML::Node caps = root["rate_caps_deg_s"]) {
    const auto v = rd.numbers(caps, kJoints, "rate_caps_deg_s");
    for (int i = 0; i < kJoints; ++i) {
      if (!(v[static_cast<std::size_t>(i)] > 0.0)) {
        rd.fail(caps, "rate caps must be positive");
      }
      m.rate_caps[i] = deg2rad(v[static_cast<std::size_t>(i)]);
    }
  }
  if (const YAML::Node base = root["base_pose"]) {
    m.base_pose = detail::pose_from_yaml(rd, base, "base_pose");
  }
  return m;
}

inline ArmModel load_arm(const std::string& path) { return parse_arm(detail::load_yaml_file(path), path); }

namespace detail {

inline sim::HandKind hand_kind_of(const YamlReader& rd, const YAML::Node& n)
{
  const std::string s = rd.string(n, "hand.kind");
  for (auto k : {sim::HandKind::None, sim::HandKind::Scripted, sim::HandKind::HapticReactive,
                 sim::HandKind::Interactive}) {
    if (s == sim::to_string(k)) return k;
  }
  rd.fail(n, "hand.kind must be one of none, scripted, haptic_reactive, interactive");
}

inline void parse_controller(const YamlReader& rd, const YAML::Node& n, ControllerParams& c)
{
  rd.expect_map(n, "controller",
                {"k_pc1", "k_pc2", "tau", "theta_obs_deg", "d_at", "d_act", "d_dct", "v_max", "rep_gain", "damping", "hold_orientation"});
  c.k_pc1 = rd.number_or(n, "k_pc1", c.k_pc1);
  c.k_pc2 = rd.number_or(n, "k_pc2", c.k_pc2);
  c.tau = rd.number_or(n, "tau", c.tau);
  c.theta_obs = rd.angle_deg_or(n, "theta_obs_deg", c.theta_obs);
  c.d_at = rd.number_or(n, "d_at", c.d_at);
  c.d_act = rd.number_or(n, "d_act", c.d_act);
  c.d_dct = rd.number_or(n, "d_dct", c.d_dct);
  c.v_max = rd.number_or(n, "v_max", c.v_max);
  c.rep_gain = rd.number_or(n, "rep_gain", c.rep_gain);
  c.damping = rd.number_or(n, "damping", c.damping);
  c.hold_orientation = rd.boolean_or(n, "hold_orientation", c.hold_orientation);
  try {
    c.validate();
  } catch (const DomainError& e) {
    rd.fail(n, e.what());
  }
}

inline void parse_camera(const YamlReader& rd, const YAML::Node& n, CameraModel& cam)
{
  rd.expect_map(n, "camera",
                {"position", "look_at", "pose", "hfov_deg", "vfov_deg", "max_range", "max_incidence_deg"});
  if (n["pose"]) {
    cam.pose_in_base = pose_from_yaml(rd, n["pose"], "camera.pose");
  } else {
    const Vec3 eye = rd.vec3(rd.require(n, "position", "camera"), "camera.position");
    const Vec3 target = rd.vec3(rd.require(n, "look_at", "camera"), "camera.look_at");
    if ((target - eye).norm() < 1e-9) {
      rd.fail(n["look_at"], "camera.look_at must differ from camera.position");
    }
    cam.pose_in_base = Transform::look_at(eye, target);
  }
  cam.horizontal_fov = rd.angle_deg_or(n, "hfov_deg", cam.horizontal_fov);
  cam.vertical_fov = rd.angle_deg_or(n, "vfov_deg", cam.vertical_fov);
  cam.max_range = rd.number_or(n, "max_range", cam.max_range);
  cam.max_incidence = rd.angle_deg_or(n, "max_incidence_deg", cam.max_incidence);
  try {
    cam.validate();
  } catch (const DomainError& e) {
    rd.fail(n, e.what());
  }
}

inline void parse_noise(const YamlReader& rd, const YAML::Node& n, NoiseModel& noise)
{
  rd.expect_map(n, "noise", {"sigma", "mean_abs", "bias", "depth_scale"});
  if (n["sigma"] && n["mean_abs"]) {
    rd.fail(n, "noise: give either sigma or mean_abs, not both");
  }
  if (n["sigma"]) {
    noise.sigma_axes = rd.vec3(n["sigma"], "noise.sigma");
  } else if (n["mean_abs"]) {
    noise.sigma_axes = NoiseModel::sigma_for_mean_abs(rd.vec3(n["mean_abs"], "noise.mean_abs"));
  }
  if (noise.sigma_axes.minCoeff() < 0.0) {
    rd.fail(n, "noise sigma must be non-negative");
  }
  noise.bias_axes = rd.vec3_or(n, "bias", noise.bias_axes);
  noise.depth_scale = rd.number_or(n, "depth_scale", noise.depth_scale);
}

inline void parse_gimbal(const YamlReader& rd, const YAML::Node& n, sim::GimbalConfig& g)
{
  rd.expect_map(n, "gimbal",
                {"enabled", "initial_deg", "limits_deg", "max_rate", "axis_sign", "targets_deg", "band_deg",
                 "lower_to_upper", "upper_to_marker"});
  g.enabled = rd.boolean_or(n, "enabled", g.enabled);
  if (n["initial_deg"]) {
    const auto v = rd.numbers(n["initial_deg"], 2, "gimbal.initial_deg");
    g.initial.motor_angles = {deg2rad(v[0]), deg2rad(v[1])};
  }
  if (const YAML::Node lim = n["limits_deg"]) {
    if (!lim.IsSequence() || lim.size() != 2) {
      rd.fail(lim, "gimbal.limits_deg must list 2 [lo, hi] pairs");
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto pair = rd.numbers(lim[i], 2, "gimbal limit");
      if (!(pair[0] < pair[1])) {
        rd.fail(lim[i], "gimbal limit lower bound must be below upper bound");
      }
      g.initial.limits[i] = {deg2rad(pair[0]), deg2rad(pair[1])};
    }
  }
  g.initial.max_rate = rd.number_or(n, "max_rate", g.initial.max_rate);
  if (n["axis_sign"]) {
    const auto v = rd.numbers(n["axis_sign"], 2, "gimbal.axis_sign");
    for (std::size_t i = 0; i < 2; ++i) {
      if (v[i] != 1.0 && v[i] != -1.0) {
        rd.fail(n["axis_sign"], "gimbal.axis_sign entries must be 1 or -1");
      }
      g.initial.axis_sign[i] = v[i];
    }
  }
  if (n["targets_deg"]) {
    const auto v = rd.numbers(n["targets_deg"], 2, "gimbal.targets_deg");
    g.targets = {deg2rad(v[0]), deg2rad(v[1])};
  }
  g.band = rd.angle_deg_or(n, "band_deg", g.band);
  if (!(g.band > 0.0)) {
    rd.fail(n["band_deg"], "gimbal.band_deg must be positive");
  }
  g.geometry.lower_to_upper = rd.number_or(n, "lower_to_upper", g.geometry.lower_to_upper);
  g.geometry.upper_to_marker = rd.number_or(n, "upper_to_marker", g.geometry.upper_to_marker);
  for (int i = 0; i < 2; ++i) {
    const auto& lim = g.initial.limits[static_cast<std::size_t>(i)];
    const double a = g.initial.motor_angles[static_cast<std::size_t>(i)];
    if (a < lim.lo || a > lim.hi) {
      rd.fail(n, "gimbal initial angle outside its limits");
    }
  }
}

inline void parse_hand(const YamlReader& rd, const YAML::Node& n, sim::ScenarioConfig& cfg)
{
  rd.expect_map(n, "hand",
                {"kind", "waypoints", "repeat", "retreat_speed", "reaction_delay", "max_speed", "input_channel",
                 "forearm", "forearm_offset", "initial"});
  auto& h = cfg.hand;
  h.kind = hand_kind_of(rd, rd.require(n, "kind", "hand"));
  h.repeat = rd.boolean_or(n, "repeat", h.repeat);
  h.retreat_speed = rd.number_or(n, "retreat_speed", h.retreat_speed);
  h.reaction_delay = rd.number_or(n, "reaction_delay", h.reaction_delay);
  h.max_speed = rd.number_or(n, "max_speed", h.max_speed);
  if (h.retreat_speed < 0.0 || h.reaction_delay < 0.0 || h.max_speed < 0.0) {
    rd.fail(n, "hand speeds and delays must be non-negative");
  }
  if (n["input_channel"]) {
    h.input_channel = rd.string(n["input_channel"], "hand.input_channel");
  }
  cfg.forearm_offset = rd.vec3_or(n, "forearm_offset", cfg.forearm_offset);
  if (const YAML::Node wps = n["waypoints"]) {
    if (!wps.IsSequence()) {
      rd.fail(wps, "hand.waypoints must be a list");
    }
    double prev = -1e300;
    for (const auto& w : wps) {
      rd.expect_map(w, "hand waypoint", {"t", "position"});
      sim::HandWaypoint hw;
      hw.t = rd.number(rd.require(w, "t", "hand waypoint"), "hand waypoint t");
      hw.position = rd.vec3(rd.require(w, "position", "hand waypoint"), "hand waypoint position");
      if (hw.t < prev) {
        rd.fail(w, "hand waypoint times must be non-decreasing");
      }
      prev = hw.t;
      h.waypoints.push_back(hw);
    }
  }
  if (n["initial"]) {
    h.waypoints.insert(h.waypoints.begin(), sim::HandWaypoint{0.0, rd.vec3(n["initial"], "hand.initial")});
  }
  if ((h.kind == sim::HandKind::Scripted || h.kind == sim::HandKind::HapticReactive) && h.waypoints.empty()) {
    rd.fail(n, "scripted hand models need waypoints");
  }
  if (const YAML::Node f = n["forearm"]) {
    rd.expect_map(f, "hand.forearm",
                  {"yaw_deg", "pitch_deg", "roll_deg", "roll_amp_deg", "roll_period", "pitch_amp_deg",
                   "pitch_period"});
    auto& p = h.forearm;
    p.yaw = rd.angle_deg_or(f, "yaw_deg", 0.0);
    p.pitch = rd.angle_deg_or(f, "pitch_deg", 0.0);
    p.roll = rd.angle_deg_or(f, "roll_deg", 0.0);
    p.roll_amplitude = rd.angle_deg_or(f, "roll_amp_deg", 0.0);
    p.roll_period = rd.number_or(f, "roll_period", 1.0);
    p.pitch_amplitude = rd.angle_deg_or(f, "pitch_amp_deg", 0.0);
    p.pitch_period = rd.number_or(f, "pitch_period", 1.0);
    if (!(p.roll_period > 0.0) || !(p.pitch_period > 0.0)) {
      rd.fail(f, "forearm periods must be positive");
    }
  }
}

inline std::vector<Occluder> parse_occluders(const YamlReader& rd, const YAML::Node& n)
{
  if (!n.IsSequence()) {
    rd.fail(n, "occluders must be a list");
  }
  std::vector<Occluder> out;
  for (const auto& o : n) {
    rd.expect_map(o, "occluder", {"sphere", "capsule"});
    if (const YAML::Node s = o["sphere"]) {
      rd.expect_map(s, "sphere", {"center", "radius"});
      out.emplace_back(Sphere{rd.vec3(rd.require(s, "center", "sphere"), "sphere.center"),
                              rd.number(rd.require(s, "radius", "sphere"), "sphere.radius")});
    } else if (const YAML::Node c = o["capsule"]) {
      rd.expect_map(c, "capsule", {"a", "b", "radius"});
      out.emplace_back(Capsule{rd.vec3(rd.require(c, "a", "capsule"), "capsule.a"),
                               rd.vec3(rd.require(c, "b", "capsule"), "capsule.b"),
                               rd.number(rd.require(c, "radius", "capsule"), "capsule.radius")});
    } else {
      rd.fail(o, "occluder must be a sphere or a capsule");
    }
  }
  return out;
}

}  // namespace detail

/// Loads a scenario file. Relative paths inside it (the arm file) resolve
/// against the scenario file's directory.
inline sim::ScenarioConfig load_scenario(const std::string& path)
{
  namespace fs = std::filesystem;
  const YAML::Node root = detail::load_yaml_file(path);
  detail::YamlReader rd(path);
  rd.expect_map(root, "scenario",
                {"name", "arm", "initial_q_deg", "controller", "camera", "noise", "gimbal", "safety", "hand",
                 "occluders", "waypoints", "workspace", "control_dt", "log_dt", "duration", "seed",
                 "waypoint_tolerance", "repeat_program"});
  sim::ScenarioConfig cfg;
  if (root["name"]) {
    cfg.name = rd.string(root["name"], "name");
  }

  const YAML::Node arm = rd.require(root, "arm", "scenario");
  cfg.arm_file = rd.string(arm, "arm");
  fs::path arm_path(cfg.arm_file);
  if (arm_path.is_relative()) {
    arm_path = fs::path(path).parent_path() / arm_path;
  }
  if (!fs::exists(arm_path)) {
    rd.fail(arm, "arm file not found: " + arm_path.string());
  }
  cfg.arm = load_arm(arm_path.string());

  if (root["initial_q_deg"]) {
    const auto q = rd.numbers(root["initial_q_deg"], kJoints, "initial_q_deg");
    for (int i = 0; i < kJoints; ++i) cfg.initial_q[i] = deg2rad(q[static_cast<std::size_t>(i)]);
    try {
      check_joint_limits(cfg.arm, cfg.initial_q);
    } catch (const JointLimitError& e) {
      rd.fail(root["initial_q_deg"], e.what());
    }
  }

  if (root["controller"]) detail::parse_controller(rd, root["controller"], cfg.controller);
  detail::parse_camera(rd, rd.require(root, "camera", "scenario"), cfg.camera);
  if (root["noise"]) detail::parse_noise(rd, root["noise"], cfg.noise);
  if (root["gimbal"]) detail::parse_gimbal(rd, root["gimbal"], cfg.gimbal);
  if (const YAML::Node s = root["safety"]) {
    rd.expect_map(s, "safety", {"dwell", "mode2_side"});
    cfg.safety.dwell = rd.number_or(s, "dwell", cfg.safety.dwell);
    if (cfg.safety.dwell < 0.0) rd.fail(s["dwell"], "safety.dwell must be non-negative");
    if (s["mode2_side"]) {
      const std::string side = rd.string(s["mode2_side"], "safety.mode2_side");
      if (side == "left") cfg.safety.fixed_side = HapticSide::Left;
      else if (side == "right") cfg.safety.fixed_side = HapticSide::Right;
      else if (side != "auto") rd.fail(s["mode2_side"], "safety.mode2_side must be auto, left or right");
    }
  }
  if (root["hand"]) detail::parse_hand(rd, root["hand"], cfg);
  if (root["occluders"]) cfg.occluders = detail::parse_occluders(rd, root["occluders"]);
  if (const YAML::Node ws = root["workspace"]) {
    rd.expect_map(ws, "workspace", {"min", "max"});
    cfg.workspace.min = rd.vec3(rd.require(ws, "min", "workspace"), "workspace.min");
    cfg.workspace.max = rd.vec3(rd.require(ws, "max", "workspace"), "workspace.max");
    if ((cfg.workspace.max - cfg.workspace.min).minCoeff() <= 0.0) rd.fail(ws, "workspace.max must exceed workspace.min");
  }

  const YAML::Node wps = rd.require(root, "waypoints", "scenario");
  if (!wps.IsSequence() || wps.size() == 0) {
    rd.fail(wps, "waypoints must be a non-empty list");
  }
  for (const auto& w : wps) {
    rd.expect_map(w, "waypoint", {"position", "dwell"});
    sim::GoalWaypoint g;
    g.position = rd.vec3(rd.require(w, "position", "waypoint"), "waypoint position");
    g.dwell = rd.number_or(w, "dwell", 0.0);
    if (g.dwell < 0.0) rd.fail(w, "waypoint dwell must be non-negative");
    cfg.waypoints.push_back(g);
  }

  cfg.control_dt = rd.number_or(root, "control_dt", cfg.control_dt);
  cfg.log_dt = rd.number_or(root, "log_dt", cfg.log_dt);
  cfg.duration = rd.number_or(root, "duration", cfg.duration);
  cfg.waypoint_tolerance = rd.number_or(root, "waypoint_tolerance", cfg.waypoint_tolerance);
  cfg.repeat_program = rd.boolean_or(root, "repeat_program", cfg.repeat_program);
  if (const YAML::Node seed = root["seed"]) {
    try {
      cfg.seed = seed.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      rd.fail(seed, "seed must be a non-negative integer");
    }
  }
  cfg.noise.seed = cfg.seed;

  try {
    cfg.validate();
  } catch (const DomainError& e) {
    rd.fail(root, e.what());
  }
  return cfg;
}

}  // namespace hrc
