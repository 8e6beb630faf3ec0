#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "qp_oracle.hpp"
#include "quadarm/audit.hpp"
#include "quadarm/trajectory_filter.hpp"

using namespace quadarm;

namespace {

Scalar uni(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  return lo + (hi - lo) * (static_cast<Scalar>(rng() >> 11) * 0x1.0p-53);
}

JointLimits make_limits(Scalar angle_min, Scalar angle_max, Scalar speed,
                        Scalar accel) {
  JointLimits l;
  l.angle_min = angle_min;
  l.angle_max = angle_max;
  l.speed_max = speed;
  l.accel_min = -accel;
  l.accel_max = accel;
  l.torque_max = 1.0;
  return l;
}

// Step-by-step double integrator: x' = x + T v, v' = v + T a, one sample
// at the speed-up extreme then max braking.
Scalar peak_oracle(Scalar pos, Scalar vel, const JointLimits& lim, Scalar T,
                   long L) {
  Scalar a_up = 0.0, a_brake = 0.0;
  if (vel > 0) {
    a_up = lim.accel_max;
    a_brake = lim.accel_min;
  } else if (vel < 0) {
    a_up = lim.accel_min;
    a_brake = lim.accel_max;
  }
  Scalar x = pos, v = vel;
  for (long i = 0; i < L; ++i) {
    const Scalar a = i == 0 ? a_up : a_brake;
    x += T * v;
    v += T * a;
  }
  return x;
}

}  // namespace

TEST_CASE("saturate clamps into the interval") {
  CHECK(saturate(5.0, -1.0, 1.0) == 1.0);
  CHECK(saturate(-5.0, -1.0, 1.0) == -1.0);
  CHECK(saturate(0.25, -1.0, 1.0) == 0.25);
}

TEST_CASE("deceleration horizon worked example") {
  const JointLimits lim = make_limits(-kInf, kInf, 100.0, 100.0);
  // v = 1.05, T a = 0.1: one speed-up sample reaches 1.15, then twelve
  // braking samples cross zero (1.15 - 12 * 0.1 = -0.05).
  CHECK(deceleration_horizon(1.05, lim, 1e-3) == 13);
  CHECK(deceleration_horizon(-1.05, lim, 1e-3) == 13);
  CHECK(deceleration_horizon(0.0, lim, 1e-3) == 0);
  // dyadic values make the <= 0 boundary exact: v = 10 T a, so the
  // braking speed lands on zero precisely at l = 12
  CHECK(deceleration_horizon(0.9765625, lim, 0.0009765625) == 12);
}

TEST_CASE("predict_peak matches the stepped double integrator") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 2000; ++k) {
    const JointLimits lim =
        make_limits(-kInf, kInf, uni(rng, 0.5, 20.0), uni(rng, 20.0, 400.0));
    const Scalar T = uni(rng, 2e-4, 5e-2);
    const Scalar pos = uni(rng, -2.0, 2.0);
    const Scalar vel = uni(rng, -1.2, 1.2) * lim.speed_max;
    const long L = deceleration_horizon(vel, lim, T);
    const Scalar want = peak_oracle(pos, vel, lim, T, L);
    const Scalar got = predict_peak(Vec2(pos, vel), L, lim, T);
    CHECK(std::abs(got - want) <= 1e-10 * (1.0 + std::abs(want)));
    // one sample later the braking profile must have crossed zero speed
    const Scalar v_end = vel == 0.0 ? 0.0
                                    : vel + T * (vel > 0 ? lim.accel_max
                                                         : lim.accel_min) +
                                          static_cast<Scalar>(L - 1) * T *
                                              (vel > 0 ? lim.accel_min
                                                       : lim.accel_max);
    CHECK(vel * v_end <= 0.0);
  }
  CHECK(predict_peak(Vec2(0.7, 3.0), 0, make_limits(-1, 1, 5, 100), 1e-3) == 0.7);
}

TEST_CASE("gentle cosine passes through with a two-sample delay, bit exact") {
  const JointLimits lim = make_limits(-2.0, 2.0, 14.97, 200.0);
  const Scalar T = 5e-4;
  FilterState st = make_filter_state(lim, T);
  std::vector<Scalar> cmd, ref;
  for (int k = 0; k < 4000; ++k) {
    cmd.push_back(0.5 * std::cos(10.0 * static_cast<Scalar>(k) * T));
    ref.push_back(filter_step(st, cmd.back()));
  }
  CHECK(ref[0] == cmd[0]);
  CHECK(ref[1] == cmd[0]);
  for (int k = 2; k < 4000; ++k) CHECK(ref[k] == cmd[k - 2]);
  CHECK(st.infeasible_count == 0);
}

TEST_CASE("stream riding the exact velocity/acceleration bound passes through") {
  // dyadic values keep every difference quotient exact in binary
  const Scalar T = 0.00048828125;  // 2^-11
  const JointLimits lim = make_limits(-kInf, kInf, 0.25, 128.0);
  FilterState st = make_filter_state(lim, T);
  std::vector<Scalar> cmd;
  Scalar x = 0.0, v = 0.0;
  for (int k = 0; k < 64; ++k) {
    cmd.push_back(x);
    v = std::min(v + lim.accel_max * T, lim.speed_max);  // exact accel ramp
    x += v * T;
  }
  std::vector<Scalar> ref;
  for (Scalar c : cmd) ref.push_back(filter_step(st, c));
  for (size_t k = 2; k < cmd.size(); ++k) CHECK(ref[k] == cmd[k - 2]);
  CHECK(st.infeasible_count == 0);
}

TEST_CASE("startup latch clamps the opening command into the angle bounds") {
  const JointLimits lim = make_limits(-1.0, 1.0, 5.0, 100.0);
  FilterState st = make_filter_state(lim, 5e-4);
  CHECK(filter_step(st, 3.0) == 1.0);
  CHECK(filter_step(st, 3.0) == 1.0);  // second sample still the latch
}

TEST_CASE("command step beyond the angle bound parks the reference inside") {
  const JointLimits lim = make_limits(-1.0, 1.5, 14.97, 200.0);
  FilterState st = make_filter_state(lim, 5e-4);
  Scalar max_ref = -kInf, last = 0.0;
  for (int k = 0; k < 6000; ++k) {
    last = filter_step(st, k < 10 ? 0.0 : 5.0);  // step far past angle_max
    max_ref = std::max(max_ref, last);
  }
  CHECK(max_ref <= 1.5 + 1e-9);
  CHECK(last >= 1.5 - 0.01);  // converged close to the bound
  CHECK(st.infeasible_count == 0);
}

TEST_CASE("resting at the bound holds position when commanded through it") {
  const JointLimits lim = make_limits(-1.0, 1.0, 5.0, 200.0);
  FilterState st = make_filter_state(lim, 5e-4);
  st.steps = 5;
  st.ref_prev1 = 1.0;
  st.ref_prev2 = 1.0;
  st.cmd = {1.0, 1.0, 1.0};
  for (int k = 0; k < 50; ++k) CHECK(filter_step(st, 2.0) == 1.0);
}

TEST_CASE("corrupted history triggers the brake fallback and the flag") {
  const JointLimits lim = make_limits(-kInf, kInf, 5.0, 200.0);
  const Scalar T = 5e-4;
  FilterState st = make_filter_state(lim, T);
  st.steps = 5;
  st.ref_prev1 = 0.1;  // history velocity 200 rad/s, far past the envelope
  st.ref_prev2 = 0.0;
  st.cmd = {0.1, 0.1, 0.1};
  const Scalar out = filter_step(st, 0.1);
  CHECK(st.last_infeasible);
  CHECK(st.infeasible_count == 1);
  // the emission polish caps the brake sample at the velocity envelope
  CHECK(out == doctest::Approx(0.1 + lim.speed_max * T).epsilon(1e-12));
  // one sample later the history is consistent again and the filter
  // recovers: the tail of the stream audits clean
  std::vector<Scalar> tail{out};
  for (int k = 0; k < 200; ++k) tail.push_back(filter_step(st, 0.1));
  CHECK(st.infeasible_count == 1);
  CHECK(audit_reference_sequence(tail, T, lim).ok());
}

TEST_CASE("filter state validation") {
  const JointLimits lim = make_limits(-1, 1, 5, 100);
  CHECK_THROWS_AS(make_filter_state(lim, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_filter_state(lim, 5e-4, -1.0), std::invalid_argument);
  FilterState st;
  CHECK_THROWS_AS(filter_step(st, 0.0), std::invalid_argument);
}

TEST_CASE("qp solver matches the kkt enumeration oracle") {
  std::mt19937_64 rng(31);
  int infeasible_seen = 0;
  for (int k = 0; k < 500; ++k) {
    QpInstance in;
    in.T = uni(rng, 0.01, 0.1);
    in.w1 = uni(rng, 0.05, 20.0);
    in.w2 = uni(rng, 0.05, 20.0);
    in.vmax = uni(rng, 0.5, 15.0);
    in.vmin = -in.vmax;
    in.amax = uni(rng, 20.0, 300.0);
    in.amin = -uni(rng, 20.0, 300.0);
    in.ref_prev2 = uni(rng, -1.0, 1.0);
    const Scalar hist_vel = uni(rng, -1.5, 1.5) * in.vmax;
    in.ref_prev1 = in.ref_prev2 + hist_vel * in.T;
    const Scalar scale = uni(rng, 0.0, 2.0) * in.vmax * in.T;
    in.cmd0 = in.ref_prev1 + uni(rng, -1.0, 1.0) * scale;
    in.cmd1 = in.cmd0 + uni(rng, -1.0, 1.0) * scale;
    in.cmd2 = in.cmd1 + uni(rng, -1.0, 1.0) * scale;

    const QpSolution got = solve_qp(in);
    const oracle::OracleResult want = oracle::solve_oracle(in);
    REQUIRE(got.feasible == want.feasible);
    if (!want.feasible) {
      ++infeasible_seen;
      continue;
    }
    CHECK(std::abs(got.objective - want.objective) <=
          1e-8 * (1.0 + std::abs(want.objective)));
    CHECK((got.e - want.e).norm() <= 1e-6);
    CHECK(qp_constraint_violation(in, got.e) <= 1e-9);
    CHECK(oracle::oracle_violation(in, got.e) <= 1e-9);
  }
  CHECK(infeasible_seen > 0);  // the sweep must include empty feasible sets
}

TEST_CASE("degenerate zero weights still match the oracle objective") {
  QpInstance in;
  in.T = 0.05;
  in.w1 = 0.0;
  in.w2 = 0.0;
  in.vmax = 1.0;
  in.vmin = -1.0;
  in.amax = 50.0;
  in.amin = -50.0;
  in.ref_prev1 = 0.0;
  in.ref_prev2 = 0.0;
  in.cmd0 = 0.2;  // demands 4 rad/s at the first horizon
  in.cmd1 = 0.2;
  in.cmd2 = 0.2;
  const QpSolution got = solve_qp(in);
  const oracle::OracleResult want = oracle::solve_oracle(in);
  REQUIRE(got.feasible);
  REQUIRE(want.feasible);
  CHECK(std::abs(got.objective - want.objective) <= 1e-8);
  CHECK(qp_constraint_violation(in, got.e) <= 1e-9);
}

TEST_CASE("random command streams keep the audited envelope") {
  std::mt19937_64 rng(97);
  for (int stream = 0; stream < 200; ++stream) {
    const Scalar T = 5e-4;
    const Scalar span = uni(rng, 0.3, 2.0);
    const JointLimits lim =
        make_limits(-span, span, uni(rng, 1.0, 15.0), uni(rng, 50.0, 300.0));
    FilterState st = make_filter_state(lim, T);
    const int kind = stream % 4;
    const Scalar A = uni(rng, 0.2, 3.0);
    const Scalar w = uni(rng, 1.0, 60.0);
    Scalar walk = 0.0;
    std::vector<Scalar> ref;
    for (int k = 0; k < 300; ++k) {
      const Scalar t = static_cast<Scalar>(k) * T;
      Scalar cmd = 0.0;
      switch (kind) {
        case 0: cmd = k < 50 ? 0.0 : A; break;                    // step
        case 1: cmd = A * std::sin(w * t); break;                 // sinusoid
        case 2: cmd = 10.0 * A * t; break;                        // ramp
        default:                                                  // impulses
          walk += uni(rng, -1.0, 1.0) * 0.01;
          cmd = walk + (rng() % 37 == 0 ? uni(rng, -A, A) : 0.0);
      }
      ref.push_back(filter_step(st, cmd));
    }
    const AuditReport rep = audit_reference_sequence(ref, T, lim);
    CHECK(rep.ok());
    if (!rep.ok()) {
      for (const auto& v : rep.violations) MESSAGE(describe(v));
      break;
    }
    CHECK(st.infeasible_count == 0);
  }
}
