#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "spinres/bench.hpp"
#include "spinres/integrator.hpp"

using namespace spinres;

namespace {

class ZeroBackend final : public Backend {
 public:
  const BackendDescriptor& descriptor() const noexcept override { return d_; }
  void derivative_into(const Reservoir&, std::span<const double>, std::span<const double>,
                       std::span<double> out) override {
    for (auto& v : out) v = 0.0;
  }

 private:
  BackendDescriptor d_{"zero", BackendKind::reference, true, 1, "test"};
};

// Emits NaN for oscillator `bad` once `calls` derivative evaluations happened.
class PoisonBackend final : public Backend {
 public:
  PoisonBackend(std::size_t bad, std::size_t after_calls) : bad_(bad), after_(after_calls) {}
  const BackendDescriptor& descriptor() const noexcept override { return d_; }
  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    ref_.derivative_into(res, m, u, out);
    if (++calls_ > after_) out[3 * bad_ + 1] = std::numeric_limits<double>::quiet_NaN();
  }

 private:
  BackendDescriptor d_{"poison", BackendKind::reference, true, 1, "test"};
  ReferenceBackend ref_;
  std::size_t bad_, after_, calls_ = 0;
};

// Coupling row sums accumulated in reverse index order.
class ReversedSumBackend final : public Backend {
 public:
  const BackendDescriptor& descriptor() const noexcept override { return d_; }
  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    const std::size_t n = res.size();
    const auto& p = res.params();
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = n; i-- > 0;) acc += res.coupling()(k, i) * m[3 * i];
      double in = 0.0;
      for (std::size_t i = 0; i < res.n_in(); ++i) in += res.input_weights()(k, i) * u[i];
      const Vec3 mk{m[3 * k], m[3 * k + 1], m[3 * k + 2]};
      const Vec3 d = llg_rhs(mk, total_b_from_hx(mk, p.a_cp * acc + p.a_in * in, p, res.consts()), res.consts());
      for (int j = 0; j < 3; ++j) out[3 * k + j] = d[j];
    }
  }

 private:
  BackendDescriptor d_{"reversed", BackendKind::reference, true, 1, "test"};
};

// Records the input vector of every derivative call.
class InputSpyBackend final : public Backend {
 public:
  const BackendDescriptor& descriptor() const noexcept override { return d_; }
  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    seen.push_back(u[0]);
    ref_.derivative_into(res, m, u, out);
  }
  std::vector<double> seen;

 private:
  BackendDescriptor d_{"spy", BackendKind::reference, true, 1, "test"};
  ReferenceBackend ref_;
};

Reservoir uncoupled(std::size_t n, const PhysicalParams& p = {}) {
  return Reservoir(p, CouplingMatrix::zero(n), InputWeights(DenseMatrix(n, 1)));
}

// alpha = 0, I = 0, H_K = 4 pi M: the field is H_appl e_z and m rotates about z.
PhysicalParams pure_precession() {
  PhysicalParams p;
  p.alpha = 0.0;
  p.current = 0.0;
  p.h_k = 4.0 * std::numbers::pi * p.m_sat;
  return p;
}

std::size_t sign_changes(const Trajectory& t, std::size_t k) {
  std::size_t changes = 0;
  for (std::size_t r = 1; r < t.states.size(); ++r)
    if ((t.states[r - 1].get(k)[0] < 0.0) != (t.states[r].get(k)[0] < 0.0)) ++changes;
  return changes;
}

}  // namespace

TEST(Rk4Step, ZeroDerivativeLeavesStateUnchanged) {
  const Reservoir res = uncoupled(3);
  SystemState s = random_unit_state(3, 1);
  const SystemState before = s;
  ZeroBackend zero;
  Rk4Workspace ws(3);
  for (int i = 0; i < 10; ++i) rk4_step(zero, res, s, std::vector<double>{0.0}, 1e-11, ws);
  EXPECT_EQ(s, before);
}

TEST(Rk4Step, PurePrecessionMatchesClosedFormRotation) {
  const PhysicalParams p = pure_precession();
  const Reservoir res = uncoupled(1, p);
  ASSERT_EQ(res.consts().h_aniso, 0.0);
  ReferenceBackend ref;
  Rk4Workspace ws(1);
  const Vec3 m0{0.6, 0.0, 0.8};
  double previous_error = 0.0;
  for (double dt : {4e-11, 2e-11, 1e-11}) {
    SystemState s(1);
    s.set(0, m0);
    rk4_step(ref, res, s, std::vector<double>{0.0}, dt, ws);
    const double theta = p.gamma * p.h_appl * dt;
    const Vec3 exact{m0[0] * std::cos(theta), m0[0] * std::sin(theta), m0[2]};
    const Vec3 got = s.get(0);
    const double err = std::hypot(got[0] - exact[0], got[1] - exact[1], got[2] - exact[2]);
    // RK4 on a rotation: |R(i theta) - exp(i theta)| = theta^5 / 120 + O(theta^7)
    EXPECT_LE(err, 1.05 * 0.6 * std::pow(theta, 5) / 120.0 + 1e-17) << "dt " << dt;
    EXPECT_EQ(got[2], m0[2]);
    if (previous_error > 0.0) {
      EXPECT_NEAR(previous_error / err, 32.0, 1.0);
    }
    previous_error = err;
  }
}

// RK4 does not preserve |m|. For a rotation |R(i theta)|^2 = 1 - theta^6/72 + ...,
// so halving dt divides the one-step norm defect by roughly 64.
TEST(Rk4Step, SingleStepNormDefectIsHighOrder) {
  const Reservoir res = make_reservoir(1, 1, 0);
  ReferenceBackend ref;
  Rk4Workspace ws(1);
  std::vector<double> drift;
  for (double dt : {1e-11, 5e-12}) {
    SystemState s = initial_state(1, kDefaultPhi0);
    rk4_step(ref, res, s, std::vector<double>{0.0}, dt, ws);
    drift.push_back(max_norm_drift(s));
  }
  EXPECT_GT(drift[1], 1e-13);
  EXPECT_LE(drift[0], 1e-9);
  EXPECT_GE(drift[0] / drift[1], 32.0);
  EXPECT_LE(drift[0] / drift[1], 128.0);
}

TEST(Integrate, ConfigBoundaries) {
  const Reservoir res = make_reservoir(1, 1, 0);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(integrate(cfg, res, ref), ContractError);
  cfg.steps = 1;
  cfg.dt = 0.0;
  EXPECT_THROW(integrate(cfg, res, ref), ContractError);
  cfg.dt = 1e-11;
  cfg.record_stride = 0;
  EXPECT_THROW(integrate(cfg, res, ref), ContractError);
  cfg.record_stride = 1;
  cfg.n = 2;
  EXPECT_THROW(integrate(cfg, res, ref), ContractError);
  cfg.n = 1;
  const Trajectory t = integrate(cfg, res, ref);
  ASSERT_EQ(t.states.size(), 2u);
  EXPECT_EQ(t.times, (std::vector<double>{0.0, 1e-11}));
  EXPECT_EQ(t.states[0], initial_state(1, kDefaultPhi0));
  SystemState manual = initial_state(1, kDefaultPhi0);
  Rk4Workspace ws(1);
  rk4_step(ref, res, manual, std::vector<double>{0.0}, 1e-11, ws);
  EXPECT_EQ(t.states[1], manual);
}

TEST(Integrate, RecordingGrid) {
  const Reservoir res = make_reservoir(2, 1, 1);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.n = 2;
  cfg.steps = 25;
  cfg.record_stride = 10;
  const Trajectory t = integrate(cfg, res, ref);
  ASSERT_EQ(t.times.size(), 4u);  // 0, 10, 20, 25
  EXPECT_EQ(t.times.back(), 25 * 1e-11);
  for (std::size_t i = 1; i < t.times.size(); ++i) EXPECT_GT(t.times[i], t.times[i - 1]);
  double drift = 0.0;
  for (const auto& s : t.states) drift = std::max(drift, max_norm_drift(s));
  EXPECT_EQ(t.max_norm_drift, drift);
}

TEST(Integrate, SingleOscillatorOscillates) {
  const Reservoir res = make_reservoir(1, 1, 7);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.steps = 10000;
  const Trajectory t = integrate(cfg, res, ref);
  EXPECT_GE(sign_changes(t, 0), 50u);
  // Regression bound on the measured drift (about 2e-6 at dt = 1e-11; the
  // error is dominated by the large-angle transient of the first 1e3 steps).
  EXPECT_LE(t.max_norm_drift, 5e-6);
  EXPECT_GT(t.max_norm_drift, 0.0);
}

TEST(Integrate, DriftGrowsAtMostLinearlyInSteps) {
  const Reservoir res = make_reservoir(1, 1, 7);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.steps = 100000;
  cfg.record_stride = 10000;
  const Trajectory t = integrate(cfg, res, ref);
  double running = 0.0;
  const double base = max_norm_drift(t.states[1]);
  for (std::size_t r = 1; r < t.states.size(); ++r) {
    running = std::max(running, max_norm_drift(t.states[r]));
    EXPECT_LE(running, base * static_cast<double>(r) * 1.0001) << "after " << r * 10000 << " steps";
  }
}

TEST(Integrate, FixedPointWhenFieldParallelToM) {
  PhysicalParams p;
  p.current = 0.0;
  const Reservoir res = uncoupled(4, p);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.n = 4;
  cfg.phi0 = 0.0;
  cfg.steps = 500;
  cfg.record_stride = 100;
  const Trajectory t = integrate(cfg, res, ref);
  for (const auto& s : t.states) EXPECT_EQ(s, initial_state(4, 0.0));
}

TEST(Integrate, DecoupledRunsEqualSingleRuns) {
  ReferenceBackend ref;
  RunConfig one;
  one.steps = 2000;
  one.record_stride = 50;
  RunConfig ten = one;
  ten.n = 10;
  const Trajectory single = integrate(one, uncoupled(1), ref);
  const Trajectory many = integrate(ten, uncoupled(10), ref);
  ASSERT_EQ(single.times, many.times);
  for (std::size_t r = 0; r < single.states.size(); ++r)
    for (std::size_t k = 0; k < 10; ++k) ASSERT_EQ(many.states[r].get(k), single.states[r].get(0));
}

TEST(Integrate, DivergenceNamesOscillatorAndStep) {
  const Reservoir res = make_reservoir(3, 1, 2);
  // Fault in the last stage of step 10 only reaches oscillator 2 before the
  // record check; any earlier and the coupling spreads it to every row.
  PoisonBackend poison(2, 4 * 10 - 1);
  RunConfig cfg;
  cfg.n = 3;
  cfg.steps = 20;
  cfg.record_stride = 5;
  try {
    integrate(cfg, res, poison);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.oscillator(), 2u);
    EXPECT_EQ(e.step(), 10u);  // first record point after the fault
  }
}

TEST(Integrate, ZeroOrderHoldAcrossSubstages) {
  const Reservoir res = make_reservoir(2, 1, 3);
  InputSpyBackend spy;
  RunConfig cfg;
  cfg.n = 2;
  cfg.steps = 6;
  cfg.input = InputSeries(1, {0.5, -1.0, 0.25}, 2);
  integrate(cfg, res, spy);
  ASSERT_EQ(spy.seen.size(), 24u);
  const double expect[] = {0.5, 0.5, -1.0, -1.0, 0.25, 0.25};
  for (std::size_t step = 0; step < 6; ++step)
    for (std::size_t stage = 0; stage < 4; ++stage) EXPECT_EQ(spy.seen[4 * step + stage], expect[step]);

  cfg.steps = 7;  // needs a fourth sample
  EXPECT_THROW(integrate(cfg, res, spy), ContractError);
  cfg.steps = 6;
  cfg.input = InputSeries(2, {0.5, 0.5}, 6);
  EXPECT_THROW(integrate(cfg, res, spy), ContractError);
}

TEST(MaxNormDrift, Examples) {
  EXPECT_EQ(max_norm_drift(initial_state(5, 0.0)), 0.0);
  SystemState s = initial_state(3, 0.0);
  s.set(0, {0.0, 0.0, 1.001});
  EXPECT_NEAR(max_norm_drift(s), 1e-3, 1e-15);
}

TEST(CompareTrajectories, SelfAndGridMismatch) {
  const Reservoir res = make_reservoir(3, 1, 4);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.n = 3;
  cfg.steps = 50;
  cfg.record_stride = 10;
  const Trajectory a = integrate(cfg, res, ref);
  EXPECT_EQ(compare_trajectories(a, a), 0.0);
  cfg.record_stride = 5;
  const Trajectory b = integrate(cfg, res, ref);
  EXPECT_THROW(compare_trajectories(a, b), ContractError);
}

TEST(CompareTrajectories, ParallelExactReorderedSumTiny) {
  const Reservoir res = make_reservoir(100, 1, 5);
  RunConfig cfg;
  cfg.n = 100;
  cfg.steps = 1000;
  cfg.record_stride = 100;
  ReferenceBackend ref;
  ParallelBackend par(3);
  ReversedSumBackend reversed;
  const Trajectory a = integrate(cfg, res, ref);
  EXPECT_EQ(compare_trajectories(a, integrate(cfg, res, par)), 0.0);
  const double d = compare_trajectories(a, integrate(cfg, res, reversed));
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1e-10);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const Reservoir res = make_reservoir(2, 1, 6);
  ReferenceBackend ref;
  RunConfig cfg;
  cfg.n = 2;
  cfg.steps = 4;
  cfg.record_stride = 2;
  const Trajectory t = integrate(cfg, res, ref);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,k,mx,my,mz");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    const auto f = split(line, ',');
    ASSERT_EQ(f.size(), 5u);
    const std::size_t r = rows / 2, k = rows % 2;
    EXPECT_EQ(parse_double(f[0]), t.times[r]);
    EXPECT_EQ(parse_double(f[1]), static_cast<double>(k));
    EXPECT_EQ(parse_double(f[2]), t.states[r].get(k)[0]);
    EXPECT_EQ(parse_double(f[4]), t.states[r].get(k)[2]);
    ++rows;
  }
  EXPECT_EQ(rows, 2u * 3u);
}
