#pragma once

#include <sstream>
#include <string>

#include "hrc/config_io.hpp"
#include "hrc/sim/engine.hpp"
#include "hrc/sim/trace_io.hpp"

namespace hrc::testing {

inline std::string source_path(const std::string& rel) { return std::string(HRC_SOURCE_DIR) + "/" + rel; }

inline sim::ScenarioConfig load_shipped(const std::string& name)
{
  return load_scenario(source_path("scenarios/" + name + ".yaml"));
}

inline Vec6 start_q()
{
  Vec6 q;
  q << deg2rad(-20), deg2rad(-110), deg2rad(-100), deg2rad(-60), deg2rad(90), 0.0;
  return q;
}

// Desk layout used by the shipped scenarios: camera above and behind the
// robot, TCP starting about 0.7 m in front of the base, pointing down.
inline sim::ScenarioConfig desk_config()
{
  sim::ScenarioConfig cfg;
  cfg.name = "desk";
  cfg.initial_q = start_q();
  cfg.camera.pose_in_base = Transform::look_at(Vec3(-0.3, 0, 1.4), Vec3(0.8, 0, 0.2));
  cfg.gimbal.enabled = false;
  cfg.hand.forearm.yaw = kPi;
  cfg.duration = 20.0;
  return cfg;
}

inline Vec3 start_tcp() { return forward_kinematics(ur10_model(), start_q()).translation(); }

inline std::string csv_of(const sim::SimTrace& t)
{
  std::ostringstream os;
  sim::write_csv(t, os);
  return os.str();
}

inline std::string jsonl_of(const sim::SimTrace& t)
{
  std::ostringstream os;
  sim::write_jsonl(t, os);
  return os.str();
}

}  // namespace hrc::testing
