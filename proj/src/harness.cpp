#include "quadarm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>

#include "quadarm/plant_sim.hpp"
#include "quadarm/svg.hpp"
#include "quadarm/trajectory_filter.hpp"

namespace quadarm {

namespace {

// Bench validation script for the arm3_joint2 tracking experiment: step
// commands that dive below the angle floor, a segment that parks the
// joint on the contact obstacle, and a closing sinusoid.
Scalar bench_command(Scalar t) {
  if (t < 1.0) return 0.0;
  if (t < 2.5) return -2.0;
  if (t < 4.0) return -0.3;
  if (t < 5.0) return -2.1;
  if (t < 6.0) return -0.4;
  if (t < 13.0) return -1.3;
  if (t < 15.0) return -1.0;
  return -1.0 + 0.5 * std::sin(2.0 * kPi * 0.4 * (t - 15.0));
}

struct TimelineSegment {
  Scalar start = 0.0;
  KeyframeSequence script;
  Mode mode = Mode::kWalking;
  Scalar settle = 0.0;  // start + script duration
};

// Mode switches resolved into transition scripts. Before the first
// switch the robot holds the first script's opening pose; after a
// script finishes it holds the arrival pose until the next switch.
class ModeTimeline {
 public:
  explicit ModeTimeline(const std::vector<ModeSwitch>& seq) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      TimelineSegment seg;
      seg.start = seq[i].t;
      seg.script = i == 0 ? mode_keyframes(seq[i].mode)
                          : mode_keyframes(seq[i].mode, seq[i - 1].mode);
      seg.mode = seq[i].mode;
      seg.settle = seg.start + seg.script.duration();
      segments_.push_back(std::move(seg));
    }
    if (segments_.empty()) {
      throw std::invalid_argument("run_scenario: empty mode sequence");
    }
  }

  std::array<Vec3, kNumArms> targets(Scalar t) const {
    const TimelineSegment& s = at(t);
    return s.script.sample(std::max(Scalar(0.0), t - s.start));
  }

  // Mode whose arrival script has finished by t; nullopt while morphing
  // or before the first switch. since gets the script's finish time.
  std::optional<Mode> settled(Scalar t, Scalar* since) const {
    const TimelineSegment& s = at(t);
    if (t < s.start || t < s.settle) return std::nullopt;
    if (since) *since = s.settle;
    return s.mode;
  }

 private:
  const TimelineSegment& at(Scalar t) const {
    std::size_t i = 0;
    while (i + 1 < segments_.size() && segments_[i + 1].start <= t) ++i;
    return segments_[i];
  }

  std::vector<TimelineSegment> segments_;
};

// Composite pick-and-carry script: lower from the walking stance to
// standing, reach down to the bag, hold the grip, lift it, come back up
// to the walking stance, then walk off carrying it.
constexpr Scalar kCarryGaitStart = 22.0;

KeyframeSequence carry_bag_script() {
  const std::array<Vec3, kNumArms> walking = mode_pose(Mode::kWalking);
  const std::array<Vec3, kNumArms> standing = mode_pose(Mode::kStanding);
  const Vec3 carry = walking[3];
  const Vec3 pick(0.32, 0.0, 0.02);
  const Vec3 lift(0.30, 0.0, 0.10);
  KeyframeSequence seq;
  seq.frames.push_back({0.0, {walking[0], walking[1], walking[2], carry}});
  seq.frames.push_back({8.0, {standing[0], standing[1], standing[2], carry}});
  seq.frames.push_back({12.0, {standing[0], standing[1], standing[2], pick}});
  seq.frames.push_back({14.0, {standing[0], standing[1], standing[2], pick}});
  seq.frames.push_back({18.0, {standing[0], standing[1], standing[2], lift}});
  seq.frames.push_back({kCarryGaitStart,
                        {walking[0], walking[1], walking[2], lift}});
  seq.validate();
  return seq;
}

std::string path_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0) {
    name.resize(name.size() - 4);
  }
  return name;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

Scalar parse_cell(const std::string& cell, const std::string& path,
                  std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw std::runtime_error(path + ": row " + std::to_string(row) +
                             ": bad number '" + cell + "'");
  }
  return v;
}

}  // namespace

ScenarioLog run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  const RobotModel& model = cfg.model;
  if (!(cfg.t_fast > 0) || !(cfg.t_slow > 0)) {
    throw std::invalid_argument("run_scenario: rates must be > 0");
  }
  const long ratio = std::lround(cfg.t_slow / cfg.t_fast);
  if (ratio < 1 ||
      std::abs(static_cast<Scalar>(ratio) * cfg.t_fast - cfg.t_slow) >
          1e-9 * cfg.t_slow) {
    throw std::invalid_argument(
        "run_scenario: t_slow must be an integer multiple of t_fast");
  }
  if (cfg.duration < 0) {
    throw std::invalid_argument("run_scenario: duration must be >= 0");
  }
  const long n_fast = std::llround(cfg.duration / cfg.t_fast);

  ScenarioLog log;
  log.scenario_name = cfg.name.empty() ? task_name(cfg.task) : cfg.name;
  log.T = opts.log_fast_rate ? cfg.t_fast : cfg.t_slow;
  for (int j = 0; j < kNumJoints; ++j) {
    log.joint_names.push_back(joint_name(j));
    log.torque_limit[j] = cfg.psmc[j].F;
  }

  // Scripting state.
  const bool scripted_joint_task = cfg.task == Task::kFig5Validation;
  const int bench_joint = joint_index_by_name("arm3_joint2");
  std::optional<KeyframeSequence> carry;
  std::optional<ModeTimeline> timeline;
  if (cfg.task == Task::kCarryBag) {
    carry = carry_bag_script();
  } else if (!scripted_joint_task) {
    timeline.emplace(cfg.sequence);
  }
  std::optional<GaitGenerator> gait;
  Scalar gait_since = 0.0;

  std::array<VecX, kNumArms> seeds;
  for (int a = 0; a < kNumArms; ++a) {
    seeds[a] = VecX::Zero(model.arms[a].dof());
  }
  auto solve_arm = [&](int arm, const Vec3& target, Scalar t) -> VecX {
    const KinematicChain& chain = model.arms[arm];
    const std::vector<JointLimits> lims(
        model.limits.begin() + arm_joint_base(arm),
        model.limits.begin() + arm_joint_base(arm) + chain.dof());
    try {
      VecX q = inverse_kinematics(chain, target, seeds[arm], lims);
      seeds[arm] = q;
      return q;
    } catch (const IkError& e) {
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "IK failure on arm%d at t=%.6f for target "
                    "(%.4f, %.4f, %.4f): %s",
                    arm + 1, t, target.x(), target.y(), target.z(), e.what());
      throw std::runtime_error(buf);
    }
  };

  std::array<Scalar, kNumJoints> cmds{};
  Scalar wheel_v_cmd = 0.0;
  Scalar wheel_angle_cmd = 0.0;  // integral of the wheel velocity command

  // One generator tick: raw joint commands for time t. The wheel command
  // angle integrates the commanded speed, emitting the running integral.
  auto compute_commands = [&](Scalar t) {
    wheel_v_cmd = 0.0;
    if (scripted_joint_task) {
      cmds.fill(0.0);
      cmds[bench_joint] = bench_command(t);
      return;
    }
    std::array<Vec3, kNumArms> targets;
    if (carry) {
      targets = carry->sample(t);
      if (t >= kCarryGaitStart) {
        if (!gait) {
          gait.emplace(cfg.gait);
          gait_since = kCarryGaitStart;
        }
        const GaitTargets gt = gait->targets(t - gait_since);
        targets[1] = gt.arm2;
        targets[2] = gt.arm3;
        wheel_v_cmd = wheel_velocity_command(gt.v_latched, model.wheel.diameter);
      }
    } else {
      targets = timeline->targets(t);
      Scalar since = 0.0;
      const std::optional<Mode> mode = timeline->settled(t, &since);
      if (mode == Mode::kWalking) {
        if (!gait || gait_since != since) {
          gait.emplace(cfg.gait);
          gait_since = since;
        }
        const GaitTargets gt = gait->targets(t - gait_since);
        targets[1] = gt.arm2;
        targets[2] = gt.arm3;
        wheel_v_cmd = wheel_velocity_command(gt.v_latched, model.wheel.diameter);
      } else {
        gait.reset();
        if (mode == Mode::kDriving || mode == Mode::kDrivingGrasp) {
          wheel_v_cmd =
              wheel_velocity_command(cfg.gait.v.at(t), model.wheel.diameter);
        }
      }
    }
    for (int a = 0; a < kNumArms; ++a) {
      const VecX q = solve_arm(a, targets[a], t);
      for (int i = 0; i < q.size(); ++i) {
        cmds[arm_joint_base(a) + i] = q[i];
      }
    }
    cmds[kWheelJoint] = wheel_angle_cmd;
    wheel_angle_cmd += wheel_v_cmd * cfg.t_slow;
  };

  // Initial pose: the scripted-joint task starts from all zeros,
  // everything else from the IK solution of the opening targets. The IK
  // seeds keep the solutions so the first generator tick reproduces the
  // same angles.
  std::array<Scalar, kNumJoints> theta0{};
  if (!scripted_joint_task) {
    const std::array<Vec3, kNumArms> t0 =
        carry ? carry->sample(0.0) : timeline->targets(0.0);
    for (int a = 0; a < kNumArms; ++a) {
      const VecX q = solve_arm(a, t0[a], 0.0);
      for (int i = 0; i < q.size(); ++i) {
        theta0[arm_joint_base(a) + i] = q[i];
      }
    }
  }
  for (int j = 0; j < kNumJoints; ++j) {
    theta0[j] = saturate(theta0[j], model.limits[j].angle_min,
                         model.limits[j].angle_max);
  }

  std::array<FilterState, kNumJoints> filters;
  std::array<PsmcState, kNumJoints> psmc;
  std::array<JointState, kNumJoints> plant;
  for (int j = 0; j < kNumJoints; ++j) {
    filters[j] = make_filter_state(model.limits[j], cfg.t_slow, cfg.filter_w1,
                                   cfg.filter_w2);
    psmc[j] = psmc_reset(cfg.psmc[j], theta0[j]);
    plant[j] = {theta0[j], 0.0};
  }

  std::mt19937_64 rng(opts.seed);
  const bool noisy = cfg.noise_amp > 0;
  auto draw_noise = [&]() -> Scalar {
    // 53-bit uniform in [-1, 1), scaled; hand mapped so the byte stream
    // does not depend on the standard library's distribution internals.
    const Scalar u = static_cast<Scalar>(rng() >> 11) * 0x1.0p-53;
    return cfg.noise_amp * (2.0 * u - 1.0);
  };

  std::array<Scalar, kNumJoints> refs{};
  std::array<Scalar, kNumJoints> refs_prev{};
  std::array<Scalar, kNumJoints> taus{};
  Scalar base_x = 0.0;

  for (long k = 0; k < n_fast; ++k) {
    const Scalar t = static_cast<Scalar>(k) * cfg.t_fast;
    if (k % ratio == 0) {
      compute_commands(t);
      std::array<Scalar, kNumJoints> next{};
      for (int j = 0; j < kNumJoints; ++j) {
        next[j] = filter_step(filters[j], cmds[j]);
        if (filters[j].last_infeasible) ++log.infeasible_events;
      }
      refs_prev = k == 0 ? next : refs;
      refs = next;
    }
    // The controller runs between generator ticks, so it consumes a
    // first-order hold of the reference: feeding it the raw staircase
    // would demand a proxy acceleration of ref-step/T_fast^2 every tick
    // and park the sliding force at its bound.
    const Scalar blend =
        static_cast<Scalar>(k % ratio + 1) / static_cast<Scalar>(ratio);
    for (int j = 0; j < kNumJoints; ++j) {
      const Scalar ref_k = refs_prev[j] + blend * (refs[j] - refs_prev[j]);
      taus[j] =
          psmc_step(cfg.psmc[j], psmc[j], ref_k, plant[j].theta, cfg.t_fast);
      log.max_abs_tau[j] = std::max(log.max_abs_tau[j], std::abs(taus[j]));
    }
    if (opts.log_fast_rate || k % ratio == 0) {
      log.t.push_back(t);
      for (int j = 0; j < kNumJoints; ++j) {
        log.cmd[j].push_back(cmds[j]);
        log.ref[j].push_back(refs[j]);
        log.meas[j].push_back(plant[j].theta);
        log.tau[j].push_back(taus[j]);
      }
      log.wheel_ref_vel.push_back(wheel_v_cmd);
      log.wheel_meas_vel.push_back(plant[kWheelJoint].theta_dot);
      log.base_x.push_back(base_x);
    }
    for (int j = 0; j < kNumJoints; ++j) {
      const ContactParams& c = cfg.plant[j].contact;
      const bool active = c.enabled && t >= c.t_on && t < c.t_off;
      const Scalar disturbance = noisy ? draw_noise() : 0.0;
      joint_step(plant[j], cfg.plant[j], taus[j] + disturbance, cfg.t_fast,
                 active);
    }
    integrate_odometry(base_x, plant[kWheelJoint].theta_dot,
                       model.wheel.diameter, cfg.t_fast);
  }
  return log;
}

void write_csv(const ScenarioLog& log, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::fputs("t", f);
  for (int j = 0; j < kNumJoints; ++j) {
    const char* n = log.joint_names[j].c_str();
    std::fprintf(f, ",%s_cmd,%s_ref,%s_meas,%s_tau", n, n, n, n);
  }
  std::fputs(",wheel_ref_vel,wheel_meas_vel,base_x\n", f);
  for (std::size_t k = 0; k < log.rows(); ++k) {
    std::fprintf(f, "%.9e", log.t[k]);
    for (int j = 0; j < kNumJoints; ++j) {
      std::fprintf(f, ",%.9e,%.9e,%.9e,%.9e", log.cmd[j][k], log.ref[j][k],
                   log.meas[j][k], log.tau[j][k]);
    }
    std::fprintf(f, ",%.9e,%.9e,%.9e\n", log.wheel_ref_vel[k],
                 log.wheel_meas_vel[k], log.base_x[k]);
  }
  if (std::ferror(f) || std::fclose(f) != 0) {
    throw std::runtime_error("write failed for " + path);
  }
}

ScenarioLog read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t expect = 1 + 4 * kNumJoints + 3;
  if (header.size() != expect || header[0] != "t" ||
      header[expect - 3] != "wheel_ref_vel" ||
      header[expect - 2] != "wheel_meas_vel" || header[expect - 1] != "base_x") {
    throw std::runtime_error(path + ": unexpected column layout");
  }

  ScenarioLog log;
  log.scenario_name = path_stem(path);
  for (int j = 0; j < kNumJoints; ++j) {
    const std::string& first = header[1 + 4 * j];
    if (first.size() < 5 || first.compare(first.size() - 4, 4, "_cmd") != 0) {
      throw std::runtime_error(path + ": unexpected column '" + first + "'");
    }
    const std::string name = first.substr(0, first.size() - 4);
    if (header[2 + 4 * j] != name + "_ref" ||
        header[3 + 4 * j] != name + "_meas" ||
        header[4 + 4 * j] != name + "_tau") {
      throw std::runtime_error(path + ": unexpected columns for joint '" +
                               name + "'");
    }
    log.joint_names.push_back(name);
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != expect) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": expected " + std::to_string(expect) +
                               " cells, got " + std::to_string(cells.size()));
    }
    log.t.push_back(parse_cell(cells[0], path, row));
    for (int j = 0; j < kNumJoints; ++j) {
      log.cmd[j].push_back(parse_cell(cells[1 + 4 * j], path, row));
      log.ref[j].push_back(parse_cell(cells[2 + 4 * j], path, row));
      log.meas[j].push_back(parse_cell(cells[3 + 4 * j], path, row));
      log.tau[j].push_back(parse_cell(cells[4 + 4 * j], path, row));
    }
    log.wheel_ref_vel.push_back(parse_cell(cells[expect - 3], path, row));
    log.wheel_meas_vel.push_back(parse_cell(cells[expect - 2], path, row));
    log.base_x.push_back(parse_cell(cells[expect - 1], path, row));
  }
  if (log.rows() >= 2) {
    log.T = log.t[1] - log.t[0];
  }
  for (int j = 0; j < kNumJoints; ++j) {
    for (Scalar v : log.tau[j]) {
      log.max_abs_tau[j] = std::max(log.max_abs_tau[j], std::abs(v));
    }
  }
  return log;
}

AuditReport audit_scenario_log(const ScenarioLog& log,
                               const std::array<JointLimits, kNumJoints>& limits,
                               const AuditTolerances& tol) {
  AuditReport report;
  if (log.rows() == 0) return report;
  if (log.rows() >= 2 && !(log.T > 0)) {
    throw std::invalid_argument("audit: log carries no sample period");
  }
  const Scalar T = log.T > 0 ? log.T : 1.0;  // moot below two rows
  for (int j = 0; j < kNumJoints; ++j) {
    AuditReport one = audit_reference_sequence(log.ref[j], T, limits[j], tol,
                                               log.joint_names[j]);
    report.samples_checked += one.samples_checked;
    report.violations.insert(report.violations.end(), one.violations.begin(),
                             one.violations.end());
    for (std::size_t k = 0; k < log.rows(); ++k) {
      const Scalar v = log.tau[j][k];
      if (std::abs(v) > limits[j].torque_max + tol.torque) {
        report.violations.push_back(
            {k, log.joint_names[j], AuditKind::kTorque, v,
             v > 0 ? limits[j].torque_max : -limits[j].torque_max});
      }
    }
  }
  return report;
}

namespace {

PlotSeries diff_series(const std::vector<Scalar>& t,
                       const std::vector<Scalar>& y, Scalar T, int order,
                       const std::string& label) {
  PlotSeries s;
  s.label = label;
  if (!(T > 0)) return s;
  for (std::size_t k = order; k < y.size(); ++k) {
    s.x.push_back(t[k]);
    s.y.push_back(order == 1 ? (y[k] - y[k - 1]) / T
                             : (y[k] - 2.0 * y[k - 1] + y[k - 2]) / (T * T));
  }
  return s;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

std::vector<std::string> emit_plots(const ScenarioLog& log,
                                    const std::string& out_dir) {
  if (log.rows() == 0) {
    throw std::runtime_error("emit_plots: log has no samples");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  for (int j = 0; j < kNumJoints; ++j) {
    const std::string& name = log.joint_names[j];
    PlotPane angle{"angle [rad]",
                   {{"cmd", log.t, log.cmd[j]},
                    {"ref", log.t, log.ref[j]},
                    {"meas", log.t, log.meas[j]}},
                   {}};
    PlotPane vel{"reference velocity [rad/s]",
                 {diff_series(log.t, log.ref[j], log.T, 1, "ref")},
                 {}};
    PlotPane acc{"reference acceleration [rad/s^2]",
                 {diff_series(log.t, log.ref[j], log.T, 2, "ref")},
                 {}};
    PlotPane tau{"torque [N m]", {{"tau", log.t, log.tau[j]}}, {}};
    const Scalar bound = log.torque_limit[j];
    if (std::isfinite(bound) && bound > 0) {
      tau.hlines = {bound, -bound};
    }
    const std::string path =
        out_dir + "/" + log.scenario_name + "_" + name + ".svg";
    write_text_file(path, render_svg(log.scenario_name + " " + name,
                                     {angle, vel, acc, tau}));
    written.push_back(path);
  }

  PlotPane wheel{"wheel speed [rad/s]",
                 {{"ref", log.t, log.wheel_ref_vel},
                  {"meas", log.t, log.wheel_meas_vel}},
                 {}};
  PlotPane base{"base displacement [m]", {{"x", log.t, log.base_x}}, {}};
  const std::string path = out_dir + "/" + log.scenario_name + "_base.svg";
  write_text_file(path, render_svg(log.scenario_name + " base", {wheel, base}));
  written.push_back(path);
  return written;
}

}  // namespace quadarm
