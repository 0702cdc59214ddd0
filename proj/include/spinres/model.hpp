#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spinres/errors.hpp"
#include "spinres/params.hpp"
#include "spinres/state.hpp"
#include "spinres/topology.hpp"
#include "spinres/vec3.hpp"

namespace spinres {

/// Everything the vector field depends on besides the state and the input.
/// Immutable after construction.
class Reservoir {
 public:
  Reservoir(PhysicalParams params, CouplingMatrix coupling, InputWeights input_weights)
      : params_(params),
        consts_(derive(params)),
        coupling_(std::move(coupling)),
        input_weights_(std::move(input_weights)) {
    params_.validate();
    if (input_weights_.rows() != coupling_.size())
      throw ContractError("Reservoir: input weight rows must equal oscillator count");
  }

  std::size_t size() const noexcept { return coupling_.size(); }
  std::size_t n_in() const noexcept { return input_weights_.n_in(); }
  const PhysicalParams& params() const noexcept { return params_; }
  const DerivedConstants& consts() const noexcept { return consts_; }
  const CouplingMatrix& coupling() const noexcept { return coupling_; }
  const InputWeights& input_weights() const noexcept { return input_weights_; }

 private:
  PhysicalParams params_;
  DerivedConstants consts_;
  CouplingMatrix coupling_;
  InputWeights input_weights_;
};

/// Seeded reservoir: coupling drawn first, then input weights, from one stream.
inline Reservoir make_reservoir(std::size_t n, std::size_t n_in, std::uint64_t seed,
                                const PhysicalParams& params = {}) {
  RngStream rng(seed);
  CouplingMatrix w_cp = generate_coupling(n, rng);
  InputWeights w_in = generate_input_weights(n, n_in, rng);
  return Reservoir(params, std::move(w_cp), std::move(w_in));
}

/// H(m) = [H_appl + (H_K - 4 pi M) m_z] e_z.
inline Vec3 effective_field(const Vec3& m, const PhysicalParams& p, const DerivedConstants& c) noexcept {
  return {0.0, 0.0, p.h_appl + c.h_aniso * m[2]};
}

/// Spin-transfer torque field magnitude H_s(m), in Oe.
inline double spin_torque_strength(const Vec3& m, const PhysicalParams& p,
                                   const DerivedConstants& c) noexcept {
  return c.h_s_prefactor / (1.0 + p.lambda_stt * dot(m, p.p_vec));
}

/// out[k] = a_cp * sum_i w(k, i) m_x[i], inner sum in index order.
inline void coupling_field_x(std::span<const double> m_x, const CouplingMatrix& w, double a_cp,
                             std::span<double> out) {
  const std::size_t n = w.size();
  if (m_x.size() != n || out.size() != n)
    throw ContractError("coupling_field_x: dimension mismatch");
  const DenseMatrix& a = w.entries();
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a(k, i) * m_x[i];
    out[k] = a_cp * acc;
  }
}

/// out[k] = a_in * sum_i w_in(k, i) u[i].
inline void input_field_x(const InputWeights& w, std::span<const double> u, double a_in,
                          std::span<double> out) {
  if (u.size() != w.n_in() || out.size() != w.rows())
    throw ContractError("input_field_x: dimension mismatch");
  const DenseMatrix& a = w.entries();
  for (std::size_t k = 0; k < w.rows(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.n_in(); ++i) acc += a(k, i) * u[i];
    out[k] = a_in * acc;
  }
}

/// b_k = H(m_k) + (H^cp_k + H^in_k) e_x + H_s(m_k) p x m_k, given the x-directed
/// field h_x = H^cp_k + H^in_k already summed.
inline Vec3 total_b_from_hx(const Vec3& m, double h_x, const PhysicalParams& p,
                            const DerivedConstants& c) noexcept {
  const Vec3 h = effective_field(m, p, c);
  const double hs = spin_torque_strength(m, p, c);
  const Vec3 pxm = cross(p.p_vec, m);
  return {h_x + hs * pxm[0], h[1] + hs * pxm[1], h[2] + hs * pxm[2]};
}

inline Vec3 total_b(std::size_t k, const SystemState& state, std::span<const double> coupling_x,
                    std::span<const double> input_x, const PhysicalParams& p,
                    const DerivedConstants& c) {
  return total_b_from_hx(state.get(k), coupling_x[k] + input_x[k], p, c);
}

/// dm/dt = -c_prec m x b - c_damp m x (m x b).
inline Vec3 llg_rhs(const Vec3& m, const Vec3& b, const DerivedConstants& c) noexcept {
  const Vec3 mb = cross(m, b);
  const Vec3 mmb = cross(m, mb);
  return {-c.c_prec * mb[0] - c.c_damp * mmb[0],
          -c.c_prec * mb[1] - c.c_damp * mmb[1],
          -c.c_prec * mb[2] - c.c_damp * mmb[2]};
}

/// Per-oscillator field buffers for llg_derivative; reused across calls.
struct FieldScratch {
  std::vector<double> m_x;
  std::vector<double> coupling_x;
  std::vector<double> input_x;

  void resize(std::size_t n) {
    m_x.resize(n);
    coupling_x.resize(n);
    input_x.resize(n);
  }
};

/// Full coupled LLG vector field, written into `out` (3N, interleaved like `m`).
///
/// Coupling and input fields are assembled once for the whole state, then
/// consumed oscillator by oscillator. This is the definitional evaluation
/// every backend is compared against.
inline void llg_derivative(std::span<const double> m, std::span<const double> u,
                           const Reservoir& res, FieldScratch& scratch, std::span<double> out) {
  const std::size_t n = res.size();
  if (m.size() != 3 * n || out.size() != 3 * n)
    throw ContractError("llg_derivative: state/output size must be 3N");
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) scratch.m_x[k] = m[3 * k];
  coupling_field_x(scratch.m_x, res.coupling(), res.params().a_cp, scratch.coupling_x);
  input_field_x(res.input_weights(), u, res.params().a_in, scratch.input_x);

  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 mk = {m[3 * k], m[3 * k + 1], m[3 * k + 2]};
    const Vec3 b =
        total_b_from_hx(mk, scratch.coupling_x[k] + scratch.input_x[k], res.params(), res.consts());
    const Vec3 d = llg_rhs(mk, b, res.consts());
    out[3 * k] = d[0];
    out[3 * k + 1] = d[1];
    out[3 * k + 2] = d[2];
  }
}

inline void llg_derivative(const SystemState& state, std::span<const double> u, const Reservoir& res,
                           std::span<double> out) {
  FieldScratch scratch;
  llg_derivative(state.data(), u, res, scratch, out);
}

}  // namespace spinres
