#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "quadarm/audit.hpp"
#include "quadarm/config.hpp"

namespace quadarm {

// Column-major scenario log. Rows are sampled at the generator rate (or
// at the controller rate when RunOptions::log_fast_rate is set); row k
// holds the values seen at t[k] just before the plant advances: the raw
// command, the filtered reference, the measured angle, and the torque
// applied over the following controller step.
struct ScenarioLog {
  std::string scenario_name;
  Scalar T = 0.0;                        // row period [s]
  std::vector<std::string> joint_names;  // flat order, wheel last
  std::vector<Scalar> t;
  std::array<std::vector<Scalar>, kNumJoints> cmd;
  std::array<std::vector<Scalar>, kNumJoints> ref;
  std::array<std::vector<Scalar>, kNumJoints> meas;
  std::array<std::vector<Scalar>, kNumJoints> tau;
  std::vector<Scalar> wheel_ref_vel;   // commanded wheel speed [rad/s]
  std::vector<Scalar> wheel_meas_vel;  // measured wheel speed [rad/s]
  std::vector<Scalar> base_x;          // rolling odometry [m]
  // Peak |tau| per joint over every controller sample of the run, not
  // just the logged rows (read_csv can only recover the row maximum).
  std::array<Scalar, kNumJoints> max_abs_tau{};
  std::array<Scalar, kNumJoints> torque_limit{};  // controller force bounds
  long infeasible_events = 0;  // filter fallback activations

  std::size_t rows() const { return t.size(); }
};

struct RunOptions {
  // Log every controller tick instead of every generator tick. This is a
  // scheduling diagnostic; the constraint audits are defined on
  // generator-rate logs.
  bool log_fast_rate = false;
  std::uint64_t seed = 0;  // torque-noise stream, used when noise_amp > 0
};

// Execute a scenario: script, IK and reference filtering at t_slow;
// control, plant and odometry at t_fast. Filter infeasibility is counted
// and braked through, never fatal; an IK failure throws a
// std::runtime_error naming the arm, the time and the target.
ScenarioLog run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

// CSV serialization: one header row, then one data row per sample with
// every cell printed as %.9e. Columns are t, then per joint
// <name>_cmd, <name>_ref, <name>_meas, <name>_tau, then wheel_ref_vel,
// wheel_meas_vel, base_x. read_csv validates the header against this
// layout, takes the row period from the first two timestamps, and names
// the log after the file stem.
void write_csv(const ScenarioLog& log, const std::string& path);
ScenarioLog read_csv(const std::string& path);

// Audits every reference column against its joint envelope (angles per
// sample, backward-difference velocity and acceleration) and every
// torque column against the given torque_max. Logs shorter than two rows
// carry no period, so only the per-sample checks run on them.
AuditReport audit_scenario_log(const ScenarioLog& log,
                               const std::array<JointLimits, kNumJoints>& limits,
                               const AuditTolerances& tol);

// Writes one four-pane validation plot per joint (angle with command,
// reference and measurement; reference velocity; reference acceleration;
// torque with its bound) plus a base plot (wheel speeds, displacement)
// into out_dir. Returns the paths written, in order. Throws on a log
// with no samples.
std::vector<std::string> emit_plots(const ScenarioLog& log,
                                    const std::string& out_dir);

}  // namespace quadarm
