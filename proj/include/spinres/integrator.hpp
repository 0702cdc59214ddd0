#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spinres/backends.hpp"
#include "spinres/errors.hpp"
#include "spinres/io.hpp"
#include "spinres/model.hpp"
#include "spinres/state.hpp"
#include "spinres/topology.hpp"

namespace spinres {

struct RunConfig {
  std::size_t n = 1;
  double dt = 1e-11;
  std::size_t steps = 10000;
  std::uint64_t seed = 0;
  std::size_t record_stride = 1;
  std::string backend = "reference";
  double phi0 = kDefaultPhi0;
  std::size_t n_in = 1;
  std::optional<InputSeries> input;  // empty: u = 0

  void validate() const {
    if (n == 0) throw ContractError("RunConfig: n must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("RunConfig: dt must be > 0");
    if (steps == 0) throw ContractError("RunConfig: steps must be >= 1");
    if (record_stride == 0) throw ContractError("RunConfig: record_stride must be >= 1");
    if (n_in == 0) throw ContractError("RunConfig: n_in must be >= 1");
    if (input) {
      if (input->n_in() != n_in) throw ContractError("RunConfig: input channel count != n_in");
      if (!input->covers(steps))
        throw ContractError("RunConfig: input series has " + std::to_string(input->sample_count()) +
                            " samples, too few for " + std::to_string(steps) + " steps at " +
                            std::to_string(input->steps_per_sample()) + " steps per sample");
    }
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  double max_norm_drift = 0.0;
  double stepping_seconds = 0.0;  // wall clock of the stepping loop alone
  RunConfig config;
};

/// max_k | |m_k| - 1 |.
inline double max_norm_drift(std::span<const double> m) noexcept {
  double worst = 0.0;
  for (std::size_t k = 0; k + 2 < m.size(); k += 3) {
    const double r = std::sqrt(m[k] * m[k] + m[k + 1] * m[k + 1] + m[k + 2] * m[k + 2]);
    worst = std::max(worst, std::abs(r - 1.0));
  }
  return worst;
}

inline double max_norm_drift(const SystemState& s) noexcept { return max_norm_drift(s.data()); }

/// Index of the first oscillator with a non-finite component.
inline std::optional<std::size_t> first_non_finite(std::span<const double> m) noexcept {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!std::isfinite(m[i])) return i / 3;
  return std::nullopt;
}

/// Derivative buffers and the stage state for one RK4 step.
struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, stage;

  explicit Rk4Workspace(std::size_t n) : k1(3 * n), k2(3 * n), k3(3 * n), k4(3 * n), stage(3 * n) {}
};

/// One classic RK4 step, in place. `u` is held for all four stages.
inline void rk4_step(Backend& backend, const Reservoir& res, std::span<double> m,
                     std::span<const double> u, double dt, Rk4Workspace& ws) {
  const std::size_t len = m.size();
  if (ws.stage.size() != len) throw ContractError("rk4_step: workspace size mismatch");
  const double half = 0.5 * dt;
  const double sixth = dt / 6.0;

  backend.derivative_into(res, m, u, ws.k1);
  for (std::size_t i = 0; i < len; ++i) ws.stage[i] = m[i] + half * ws.k1[i];
  backend.derivative_into(res, ws.stage, u, ws.k2);
  for (std::size_t i = 0; i < len; ++i) ws.stage[i] = m[i] + half * ws.k2[i];
  backend.derivative_into(res, ws.stage, u, ws.k3);
  for (std::size_t i = 0; i < len; ++i) ws.stage[i] = m[i] + dt * ws.k3[i];
  backend.derivative_into(res, ws.stage, u, ws.k4);
  for (std::size_t i = 0; i < len; ++i)
    m[i] = m[i] + sixth * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

inline void rk4_step(Backend& backend, const Reservoir& res, SystemState& state,
                     std::span<const double> u, double dt, Rk4Workspace& ws) {
  rk4_step(backend, res, state.data(), u, dt, ws);
}

/// Integrates `config.steps` RK4 steps from initial_state(n, phi0).
///
/// Records the initial state, every record_stride-th step and the final step.
/// The state is never renormalized; max_norm_drift is the conservation
/// diagnostic over recorded states. Finite-ness is checked at record points.
inline Trajectory integrate(const RunConfig& config, const Reservoir& res, Backend& backend) {
  config.validate();
  if (res.size() != config.n) throw ContractError("integrate: reservoir size != config.n");
  if (res.n_in() != config.n_in) throw ContractError("integrate: reservoir n_in != config.n_in");

  const InputSeries zero = InputSeries::zero(config.n_in);
  const InputSeries& input = config.input ? *config.input : zero;

  Trajectory traj;
  traj.config = config;
  SystemState state = initial_state(config.n, config.phi0);
  Rk4Workspace ws(config.n);

  const std::size_t records = 2 + config.steps / config.record_stride;
  traj.times.reserve(records);
  traj.states.reserve(records);
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  traj.max_norm_drift = max_norm_drift(state);

  double elapsed = 0.0;
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t step = 0; step < config.steps; ++step) {
    rk4_step(backend, res, state.data(), input.at_step(step), config.dt, ws);
    const std::size_t done = step + 1;
    if (done % config.record_stride == 0 || done == config.steps) {
      elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (auto bad = first_non_finite(state.data())) throw DivergenceError(*bad, done);
      traj.times.push_back(static_cast<double>(done) * config.dt);
      traj.states.push_back(state);
      traj.max_norm_drift = std::max(traj.max_norm_drift, max_norm_drift(state));
      t0 = std::chrono::steady_clock::now();
    }
  }
  traj.stepping_seconds = elapsed;
  return traj;
}

/// Largest componentwise |a - b| over all recorded instants and oscillators.
inline double compare_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.times != b.times) throw ContractError("compare_trajectories: recording grids differ");
  double worst = 0.0;
  for (std::size_t r = 0; r < a.states.size(); ++r) {
    const auto x = a.states[r].data();
    const auto y = b.states[r].data();
    if (x.size() != y.size()) throw ContractError("compare_trajectories: oscillator counts differ");
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  }
  return worst;
}

/// CSV with header `t,k,mx,my,mz`, one row per oscillator per recorded instant.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,k,mx,my,mz\n";
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    const std::string t = format_double(traj.times[r]);
    const SystemState& s = traj.states[r];
    for (std::size_t k = 0; k < s.size(); ++k) {
      const Vec3 m = s.get(k);
      os << t << ',' << k << ',' << format_double(m[0]) << ',' << format_double(m[1]) << ','
         << format_double(m[2]) << '\n';
    }
  }
}

}  // namespace spinres
