#pragma once

#include <array>
#include <string>
#include <vector>

#include "quadarm/motion_generator.hpp"
#include "quadarm/plant_sim.hpp"
#include "quadarm/psmc.hpp"
#include "quadarm/robot_model.hpp"

namespace quadarm {

// Load a robot description file (INI grammar; angles in degrees, lengths
// in meters, speeds in rad/s, torques in N m) on top of the built-in
// default model. Missing keys keep their defaults; unknown keys are
// errors with location.
RobotModel load_robot_model(const std::string& path);

enum class Task {
  kWalking,
  kDriving,
  kDrivingGrasp,
  kCarryBag,
  kFig5Validation,
};

const char* task_name(Task task);

// A timed configuration change: at time t the robot begins morphing into
// the given mode (the transition script has its own duration).
struct ModeSwitch {
  Scalar t = 0.0;
  Mode mode = Mode::kWalking;
};

struct ScenarioConfig {
  std::string name;        // config file stem, used to name outputs
  std::string robot_path;  // resolved robot description path
  RobotModel model;        // includes [limits.<joint>] overrides
  Task task = Task::kWalking;
  Scalar duration = 0.0;   // [s]
  Scalar t_fast = 0.00025;  // controller/plant period [s]
  Scalar t_slow = 0.0005;  // generator/IK/filter period [s]
  GaitParams gait;
  Scalar filter_w1 = 1.0;
  Scalar filter_w2 = 1.0;
  // Mode timeline driving the scenario; parse_config fills the task's
  // canned timeline unless the file supplies a [sequence] section.
  std::vector<ModeSwitch> sequence;
  std::array<PlantParams, kNumJoints> plant{};
  std::array<PsmcGains, kNumJoints> psmc{};
  Scalar noise_amp = 0.0;  // plant torque noise amplitude (0 = off)
};

// Parse and fully validate a scenario file; throws ConfigError with
// file:line:col locations on any problem.
ScenarioConfig parse_config(const std::string& path);

}  // namespace quadarm
