#include "quadarm/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "quadarm/ini.hpp"

namespace quadarm {

namespace {

Isometry rpy_transform(const Vec3& position, const Vec3& rpy_deg) {
  Isometry T = Isometry::Identity();
  T.linear() =
      (Eigen::AngleAxisd(deg2rad(rpy_deg.z()), Vec3::UnitZ()) *
       Eigen::AngleAxisd(deg2rad(rpy_deg.y()), Vec3::UnitY()) *
       Eigen::AngleAxisd(deg2rad(rpy_deg.x()), Vec3::UnitX()))
          .toRotationMatrix();
  T.translation() = position;
  return T;
}

void load_arm(const IniFile& ini, const std::string& section,
              KinematicChain& chain, int arm, RobotModel& model) {
  const int dof = chain.dof();
  if (auto d = ini.get_scalar(section, "dof")) {
    if (static_cast<int>(*d) != dof) {
      std::ostringstream os;
      os << "dof of " << section << " is fixed at " << dof;
      ini.fail_at(section, "dof", os.str());
    }
  }
  const Vec3 pos = ini.get_vec3(section, "base_position")
                       .value_or(chain.base.translation());
  const Vec3 rpy = ini.get_vec3(section, "base_rpy").value_or(Vec3::Zero());
  chain.base = rpy_transform(pos, rpy);

  for (int j = 0; j < dof; ++j) {
    const std::string n = std::to_string(j + 1);
    if (auto axis = ini.get_vec3(section, "axis" + n)) {
      const Scalar norm = axis->norm();
      if (std::abs(norm - 1.0) > 1e-6) {
        ini.fail_at(section, "axis" + n, "axis must be a unit vector");
      }
      chain.joint_axes[j] = *axis / norm;
    }
    if (auto off = ini.get_vec3(section, "offset" + n)) {
      chain.link_offsets[j] = *off;
    }
    JointLimits& lim = model.limits[arm_joint_base(arm) + j];
    if (auto v = ini.get_scalar(section, "angle_min" + n)) lim.angle_min = deg2rad(*v);
    if (auto v = ini.get_scalar(section, "angle_max" + n)) lim.angle_max = deg2rad(*v);
    if (auto v = ini.get_scalar(section, "speed_max" + n)) lim.speed_max = *v;
    if (auto v = ini.get_scalar(section, "accel_min" + n)) lim.accel_min = *v;
    if (auto v = ini.get_scalar(section, "accel_max" + n)) lim.accel_max = *v;
    if (auto v = ini.get_scalar(section, "torque_max" + n)) lim.torque_max = *v;
  }
}

Mode mode_from_name(const std::string& name, const IniFile& ini,
                    const std::string& section, const std::string& key) {
  if (name == "walking") return Mode::kWalking;
  if (name == "driving") return Mode::kDriving;
  if (name == "driving_grasp") return Mode::kDrivingGrasp;
  if (name == "standing") return Mode::kStanding;
  ini.fail_at(section, key, "unknown mode '" + name + "'");
}

Task task_from_name(const std::string& name, const IniFile& ini) {
  if (name == "walking") return Task::kWalking;
  if (name == "driving") return Task::kDriving;
  if (name == "driving_grasp") return Task::kDrivingGrasp;
  if (name == "carry_bag") return Task::kCarryBag;
  if (name == "fig5_validation") return Task::kFig5Validation;
  ini.fail_at("scenario", "task", "unknown task '" + name + "'");
}

Scalar default_duration(Task task) {
  switch (task) {
    case Task::kWalking:
      return 11.0;
    case Task::kDriving:
      return 15.0;
    case Task::kDrivingGrasp:
      return 19.0;
    case Task::kCarryBag:
      return 30.0;
    case Task::kFig5Validation:
      return 25.0;
  }
  return 0.0;
}

VelocityProfile parse_profile(const IniFile& ini, const std::string& text) {
  VelocityProfile profile;
  std::istringstream in(text);
  std::string pair;
  while (in >> pair) {
    const std::size_t colon = pair.find(':');
    if (colon == std::string::npos) {
      ini.fail_at("gait", "v_profile", "expected 't:v' pairs");
    }
    char* end = nullptr;
    const double t = std::strtod(pair.c_str(), &end);
    if (end != pair.c_str() + colon) {
      ini.fail_at("gait", "v_profile", "bad time in '" + pair + "'");
    }
    const char* vbegin = pair.c_str() + colon + 1;
    const double v = std::strtod(vbegin, &end);
    if (end == vbegin || *end != '\0') {
      ini.fail_at("gait", "v_profile", "bad velocity in '" + pair + "'");
    }
    profile.samples.emplace_back(t, v);
  }
  if (profile.samples.empty()) {
    ini.fail_at("gait", "v_profile", "profile is empty");
  }
  return profile;
}

std::vector<ModeSwitch> default_sequence(Task task) {
  switch (task) {
    case Task::kWalking:
      return {{0.0, Mode::kWalking}};
    case Task::kDriving:
      return {{0.0, Mode::kDriving}};
    case Task::kDrivingGrasp:
      return {{0.0, Mode::kDrivingGrasp}};
    case Task::kCarryBag:
    case Task::kFig5Validation:
      return {};  // hand-rolled scripts in the harness
  }
  return {};
}

Mode canonical_predecessor(Mode mode) {
  return mode == Mode::kDrivingGrasp ? Mode::kDriving : Mode::kWalking;
}

}  // namespace

const char* task_name(Task task) {
  switch (task) {
    case Task::kWalking:
      return "walking";
    case Task::kDriving:
      return "driving";
    case Task::kDrivingGrasp:
      return "driving_grasp";
    case Task::kCarryBag:
      return "carry_bag";
    case Task::kFig5Validation:
      return "fig5_validation";
  }
  return "?";
}

RobotModel load_robot_model(const std::string& path) {
  const IniFile ini = IniFile::parse_file(path);
  RobotModel model = default_robot_model();

  static const char* kArmSections[kNumArms] = {"arm1", "arm2", "arm3", "arm4"};
  for (int arm = 0; arm < kNumArms; ++arm) {
    const std::string section = kArmSections[arm];
    if (!ini.has_section(section)) continue;
    load_arm(ini, section, model.arms[arm], arm, model);
  }

  if (ini.has_section("wheel")) {
    JointLimits& lim = model.limits[kWheelJoint];
    if (auto v = ini.get_scalar("wheel", "diameter")) model.wheel.diameter = *v;
    if (auto v = ini.get_scalar("wheel", "passive_baseline")) {
      model.wheel.passive_baseline = *v;
    }
    if (auto v = ini.get_scalar("wheel", "speed_max")) lim.speed_max = *v;
    if (auto v = ini.get_scalar("wheel", "accel_min")) lim.accel_min = *v;
    if (auto v = ini.get_scalar("wheel", "accel_max")) lim.accel_max = *v;
    if (auto v = ini.get_scalar("wheel", "torque_max")) lim.torque_max = *v;
  }

  ini.require_all_consumed();
  try {
    model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  return model;
}

ScenarioConfig parse_config(const std::string& path) {
  const IniFile ini = IniFile::parse_file(path);
  ScenarioConfig cfg;
  const std::filesystem::path cfg_path(path);
  cfg.name = cfg_path.stem().string();

  // [scenario]
  const auto task_str = ini.get_string("scenario", "task");
  if (!task_str) ini.fail_at("scenario", "task", "missing required key 'task'");
  cfg.task = task_from_name(*task_str, ini);
  const std::string robot_file =
      ini.get_string("scenario", "robot").value_or("quadarm_default.robot");
  cfg.robot_path =
      (std::filesystem::path(robot_file).is_absolute()
           ? std::filesystem::path(robot_file)
           : cfg_path.parent_path() / robot_file)
          .string();
  cfg.model = load_robot_model(cfg.robot_path);
  cfg.duration =
      ini.get_scalar_or("scenario", "duration", default_duration(cfg.task));
  cfg.t_fast = ini.get_scalar_or("scenario", "t_fast", 0.00025);
  cfg.t_slow = ini.get_scalar_or("scenario", "t_slow", 0.0005);
  if (!(cfg.t_fast > 0)) ini.fail_at("scenario", "t_fast", "t_fast must be > 0");
  const Scalar ratio = cfg.t_slow / cfg.t_fast;
  if (!(ratio >= 1.0 - 1e-9) ||
      std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    ini.fail_at("scenario", "t_slow",
                "t_slow must be an integer multiple of t_fast");
  }
  if (cfg.duration < 0) {
    ini.fail_at("scenario", "duration", "duration must be >= 0");
  }

  // [limits.<joint>] overrides, radians and SI throughout.
  for (int j = 0; j < kNumJoints; ++j) {
    const std::string section = std::string("limits.") + joint_name(j);
    if (!ini.has_section(section)) continue;
    JointLimits& lim = cfg.model.limits[j];
    const Scalar builtin_torque = lim.torque_max;
    if (auto v = ini.get_scalar(section, "angle_min_rad")) lim.angle_min = *v;
    if (auto v = ini.get_scalar(section, "angle_max_rad")) lim.angle_max = *v;
    if (auto v = ini.get_scalar(section, "speed_max")) lim.speed_max = *v;
    if (auto v = ini.get_scalar(section, "accel_min")) lim.accel_min = *v;
    if (auto v = ini.get_scalar(section, "accel_max")) lim.accel_max = *v;
    if (auto v = ini.get_scalar(section, "torque_max")) {
      if (*v > builtin_torque) {
        ini.fail_at(section, "torque_max",
                    "torque override exceeds the joint rating");
      }
      lim.torque_max = *v;
    }
    try {
      lim.validate(joint_name(j));
    } catch (const std::exception& e) {
      ini.fail_at(section, "", e.what());
    }
  }

  // [gait]
  const auto v_key = ini.get_scalar("gait", "v");
  const auto v_profile_key = ini.get_string("gait", "v_profile");
  if (v_key && v_profile_key) {
    ini.fail_at("gait", "v_profile", "give either v or v_profile, not both");
  }
  if (v_profile_key) {
    cfg.gait.v = parse_profile(ini, *v_profile_key);
  } else {
    cfg.gait.v = VelocityProfile::constant(v_key.value_or(0.1));
  }
  cfg.gait.f_w = ini.get_scalar_or("gait", "f_w", 0.5);
  cfg.gait.h = ini.get_scalar_or("gait", "h", 0.04);
  const Scalar stance_x = ini.get_scalar_or("gait", "stance_x", -0.15);
  const Scalar stance_y = ini.get_scalar_or("gait", "stance_y", 0.12);
  const Scalar stance_z = ini.get_scalar_or("gait", "stance_z", -0.30);
  cfg.gait.stance2 = Vec3(stance_x, stance_y, stance_z);
  cfg.gait.stance3 = Vec3(stance_x, -stance_y, stance_z);
  cfg.gait.v_cap = cfg.model.limits[kWheelJoint].speed_max *
                   cfg.model.wheel.diameter / 2.0;
  try {
    cfg.gait.validate();
  } catch (const std::exception& e) {
    ini.fail_at("gait", "v", e.what());
  }

  // [filter]
  cfg.filter_w1 = ini.get_scalar_or("filter", "w1", 1.0);
  cfg.filter_w2 = ini.get_scalar_or("filter", "w2", 1.0);
  if (cfg.filter_w1 < 0) ini.fail_at("filter", "w1", "w1 must be >= 0");
  if (cfg.filter_w2 < 0) ini.fail_at("filter", "w2", "w2 must be >= 0");
  if (auto T = ini.get_scalar("filter", "T")) {
    if (std::abs(*T - cfg.t_slow) > 1e-12) {
      ini.fail_at("filter", "T", "filter T must equal the slow rate t_slow");
    }
  }

  // [plant] global defaults, then [plant.<joint>] overrides.
  PlantParams global;
  global.inertia = ini.get_scalar_or("plant", "inertia", 0.01);
  global.damping = ini.get_scalar_or("plant", "damping", 0.02);
  global.gravity_torque = ini.get_scalar_or("plant", "gravity_torque", 0.0);
  cfg.noise_amp = ini.get_scalar_or("plant", "noise_amp", 0.0);
  if (cfg.noise_amp < 0) {
    ini.fail_at("plant", "noise_amp", "noise_amp must be >= 0");
  }
  for (int j = 0; j < kNumJoints; ++j) {
    PlantParams p = global;
    p.torque_max = cfg.model.limits[j].torque_max;
    const std::string section = std::string("plant.") + joint_name(j);
    if (ini.has_section(section)) {
      p.inertia = ini.get_scalar_or(section, "inertia", p.inertia);
      p.damping = ini.get_scalar_or(section, "damping", p.damping);
      p.gravity_torque =
          ini.get_scalar_or(section, "gravity_torque", p.gravity_torque);
      if (auto v = ini.get_scalar(section, "torque_max")) {
        if (*v > cfg.model.limits[j].torque_max) {
          ini.fail_at(section, "torque_max",
                      "plant torque_max exceeds the joint rating");
        }
        p.torque_max = *v;
      }
      if (auto level = ini.get_scalar(section, "contact_level")) {
        p.contact.enabled = true;
        p.contact.ground_level = *level;
        p.contact.stiffness =
            ini.get_scalar_or(section, "contact_stiffness", 5000.0);
        p.contact.damping = ini.get_scalar_or(section, "contact_damping", 50.0);
        p.contact.t_on = ini.get_scalar_or(section, "contact_t_on", 0.0);
        p.contact.t_off = ini.get_scalar_or(section, "contact_t_off", kInf);
      }
    }
    try {
      p.validate();
    } catch (const std::exception& e) {
      if (ini.has_section(section)) {
        ini.fail_at(section, "", e.what());
      }
      ini.fail_at("plant", "", e.what());
    }
    cfg.plant[j] = p;
  }

  // [psmc.<joint>] overrides on critically damped defaults.
  for (int j = 0; j < kNumJoints; ++j) {
    PsmcGains g = default_psmc_gains(cfg.plant[j].inertia, cfg.plant[j].damping,
                                     cfg.model.limits[j].torque_max);
    const std::string section = std::string("psmc.") + joint_name(j);
    if (ini.has_section(section)) {
      g.M = ini.get_scalar_or(section, "M", g.M);
      g.B = ini.get_scalar_or(section, "B", g.B);
      g.K = ini.get_scalar_or(section, "K", g.K);
      g.L = ini.get_scalar_or(section, "L", g.L);
      g.J = ini.get_scalar_or(section, "J", g.J);
      g.H = ini.get_scalar_or(section, "H", g.H);
      g.F = ini.get_scalar_or(section, "F", g.F);
      if (g.F > cfg.model.limits[j].torque_max) {
        ini.fail_at(section, "F", "force limit F exceeds the joint rating");
      }
      try {
        g.validate();
      } catch (const std::exception& e) {
        ini.fail_at(section, "", e.what());
      }
    }
    cfg.psmc[j] = g;
  }

  // [sequence] custom mode timeline.
  if (ini.has_section("sequence")) {
    if (cfg.task == Task::kCarryBag || cfg.task == Task::kFig5Validation) {
      ini.fail_at("sequence", "",
                  std::string("[sequence] is not supported for task ") +
                      task_name(cfg.task));
    }
    for (const std::string& key : ini.keys("sequence")) {
      char* end = nullptr;
      const double t = std::strtod(key.c_str(), &end);
      if (end == key.c_str() || *end != '\0') {
        ini.fail_at("sequence", key, "sequence keys must be times in seconds");
      }
      const std::string mode = ini.get_string("sequence", key).value();
      cfg.sequence.push_back({t, mode_from_name(mode, ini, "sequence", key)});
    }
    for (std::size_t i = 0; i < cfg.sequence.size(); ++i) {
      const ModeSwitch& sw = cfg.sequence[i];
      if (sw.t < 0) ini.fail_at("sequence", "", "switch times must be >= 0");
      if (i > 0 && !(sw.t > cfg.sequence[i - 1].t)) {
        ini.fail_at("sequence", "", "switch times must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < cfg.sequence.size(); ++i) {
      const ModeSwitch& sw = cfg.sequence[i];
      const Mode from = i == 0 ? canonical_predecessor(cfg.sequence[0].mode)
                               : cfg.sequence[i - 1].mode;
      const Scalar span = mode_keyframes(sw.mode, from).duration();
      const Scalar room = (i + 1 < cfg.sequence.size()
                               ? cfg.sequence[i + 1].t
                               : kInf) -
                          sw.t;
      if (span > room) {
        ini.fail_at("sequence", "",
                    "mode transitions overlap: switch at t=" +
                        std::to_string(sw.t) + " needs " + std::to_string(span) +
                        " s");
      }
    }
  } else {
    cfg.sequence = default_sequence(cfg.task);
  }

  ini.require_all_consumed();
  return cfg;
}

}  // namespace quadarm
