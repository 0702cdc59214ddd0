#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spinres/errors.hpp"
#include "spinres/rng.hpp"
#include "spinres/state.hpp"

namespace spinres {

/// Square coupling matrix with an exactly zero diagonal.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  explicit CouplingMatrix(DenseMatrix entries) : w_(std::move(entries)) {
    if (w_.rows() != w_.cols()) throw ContractError("CouplingMatrix: matrix must be square");
    for (std::size_t k = 0; k < w_.rows(); ++k)
      if (w_(k, k) != 0.0) throw ContractError("CouplingMatrix: diagonal must be zero");
  }
  /// The uncoupled reservoir, W = 0.
  static CouplingMatrix zero(std::size_t n) { return CouplingMatrix(DenseMatrix(n, n)); }

  std::size_t size() const noexcept { return w_.rows(); }
  const DenseMatrix& entries() const noexcept { return w_; }
  double operator()(std::size_t k, std::size_t i) const noexcept { return w_(k, i); }

  friend bool operator==(const CouplingMatrix&, const CouplingMatrix&) = default;

 private:
  DenseMatrix w_;
};

/// N x n_in input weight matrix.
class InputWeights {
 public:
  InputWeights() = default;
  explicit InputWeights(DenseMatrix entries) : w_(std::move(entries)) {}

  std::size_t rows() const noexcept { return w_.rows(); }
  std::size_t n_in() const noexcept { return w_.cols(); }
  const DenseMatrix& entries() const noexcept { return w_; }
  double operator()(std::size_t k, std::size_t i) const noexcept { return w_(k, i); }

  friend bool operator==(const InputWeights&, const InputWeights&) = default;

 private:
  DenseMatrix w_;
};

namespace detail {

inline void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = a.rows();
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = a.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Largest eigenvalue modulus of the k x k upper Hessenberg matrix `a`
// (row-major, modified in place), by Francis double-shift QR.
inline double hessenberg_max_modulus(std::vector<double>& a_store, std::size_t k) {
  auto a = [&](std::size_t i, std::size_t j) -> double& { return a_store[(i - 1) * k + (j - 1)]; };
  auto sign = [](double mag, double s) { return s >= 0.0 ? std::abs(mag) : -std::abs(mag); };
  const std::size_t n = k;
  double anorm = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = std::max<std::size_t>(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));
  double best = 0.0;
  auto found = [&best](double re, double im) { best = std::max(best, std::hypot(re, im)); };

  std::size_t nn = n;
  double t = 0.0;
  while (nn >= 1) {
    int its = 0;
    std::size_t l = 1;
    do {
      for (l = nn; l >= 2; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        found(x + t, 0.0);
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            found(x + z, 0.0);
            found(z != 0.0 ? x - w / z : x + z, 0.0);
          } else {
            found(x + p, z);
          }
          nn -= 2;
        } else {
          if (its == 60) throw ConvergenceError("spectral_radius: Hessenberg QR did not converge", best);
          if (its == 10 || its == 20) {
            t += x;
            for (std::size_t i = 1; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          std::size_t m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (;; --m) {
            z = a(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (std::size_t i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (std::size_t kk = m; kk <= nn - 1; ++kk) {
            if (kk != m) {
              p = a(kk, kk - 1);
              q = a(kk + 1, kk - 1);
              r = kk != nn - 1 ? a(kk + 2, kk - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (kk == m) {
              if (l != m) a(kk, kk - 1) = -a(kk, kk - 1);
            } else {
              a(kk, kk - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (std::size_t j = kk; j <= nn; ++j) {
              p = a(kk, j) + q * a(kk + 1, j);
              if (kk != nn - 1) {
                p += r * a(kk + 2, j);
                a(kk + 2, j) -= p * z;
              }
              a(kk + 1, j) -= p * y;
              a(kk, j) -= p * x;
            }
            const std::size_t mmin = std::min(nn, kk + 3);
            for (std::size_t i = l; i <= mmin; ++i) {
              p = x * a(i, kk) + y * a(i, kk + 1);
              if (kk != nn - 1) {
                p += z * a(i, kk + 2);
                a(i, kk + 2) -= p * r;
              }
              a(i, kk + 1) -= p * q;
              a(i, kk) -= p;
            }
          }
        }
      }
    } while (nn >= 1 && l + 1 < nn);
  }
  return best;
}

}  // namespace detail

/// Largest eigenvalue modulus of a square matrix.
///
/// Power iteration with Krylov acceleration. Each outer iteration advances
/// the iterate by m = min(N, 40) plain power steps, then builds an m-step
/// Arnoldi basis from it and reads the modulus off the largest Ritz value of
/// the projected Hessenberg matrix. Unlike a norm ratio, the Ritz values
/// resolve complex-conjugate and near-equal-modulus dominant eigenvalues.
/// Converged when the estimate changes by at most 1e-3 * tol (relative) on
/// two successive outer iterations; exact (to rounding) when the Krylov space
/// is invariant, which includes every N <= 40. `max_iter` bounds the matrix
/// products; after half of them the iteration restarts from a second random
/// vector. Returns 0 once power iterates vanish (nilpotent or zero matrices).
inline double spectral_radius(const DenseMatrix& a, double tol = 1e-6, std::size_t max_iter = 200000) {
  if (a.rows() != a.cols()) throw ContractError("spectral_radius: matrix must be square");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  for (double v : a.data())
    if (!std::isfinite(v)) throw ContractError("spectral_radius: non-finite entry");
  if (n == 1) return std::abs(a(0, 0));

  const std::size_t m = std::min<std::size_t>(n, 40);
  std::vector<double> x(n), y(n), basis(m * n), h(m * m), hq;
  auto v = [&](std::size_t j) { return std::span<double>(basis).subspan(j * n, n); };
  const double stop = 1e-3 * tol;
  const std::uint64_t start_seeds[2] = {0x5eed0001u, 0x5eed0002u};
  const std::size_t per_start = std::max<std::size_t>(max_iter / 2, 1);
  double estimate = 0.0;

  for (std::uint64_t seed : start_seeds) {
    RngStream rng(seed);
    for (auto& e : x) e = rng.uniform_pm1();
    std::size_t products = 0;
    double prev = -1.0;
    double prev2 = -1.0;
    for (std::size_t outer = 0; products < per_start; ++outer) {
      for (std::size_t s = 0; s < m; ++s) {
        const double nx = detail::norm2(x);
        if (nx == 0.0) return 0.0;
        if (!std::isfinite(nx)) throw ConvergenceError("spectral_radius: iterate overflow", estimate);
        for (auto& e : x) e /= nx;
        detail::matvec(a, x, y);
        std::swap(x, y);
        ++products;
      }
      const double nx = detail::norm2(x);
      if (nx == 0.0) return 0.0;
      for (std::size_t i = 0; i < n; ++i) v(0)[i] = x[i] / nx;

      std::fill(h.begin(), h.end(), 0.0);
      std::size_t dim = m;
      bool invariant = false;
      for (std::size_t j = 0; j < m; ++j) {
        detail::matvec(a, v(j), y);
        ++products;
        const double ny = detail::norm2(y);
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t i = 0; i <= j; ++i) {
            const double c = detail::dot(v(i), y);
            h[i * m + j] += c;
            for (std::size_t r = 0; r < n; ++r) y[r] -= c * v(i)[r];
          }
        const double hn = detail::norm2(y);
        if (j + 1 == m) {
          invariant = m == n || hn <= 1e-12 * ny;
          break;
        }
        if (hn <= 1e-12 * ny) {
          dim = j + 1;
          invariant = true;
          break;
        }
        h[(j + 1) * m + j] = hn;
        for (std::size_t r = 0; r < n; ++r) v(j + 1)[r] = y[r] / hn;
      }
      hq.assign(dim * dim, 0.0);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) hq[r * dim + c] = h[r * m + c];
      estimate = detail::hessenberg_max_modulus(hq, dim);
      if (invariant) return estimate;
      if (outer >= 2 && std::abs(estimate - prev) <= stop * estimate &&
          std::abs(prev - prev2) <= stop * estimate)
        return estimate;
      prev2 = prev;
      prev = estimate;
    }
  }
  throw ConvergenceError("spectral_radius: no convergence after " + std::to_string(max_iter) +
                             " matrix products (last estimate " + std::to_string(estimate) + ")",
                         estimate);
}

/// Zero-diagonal coupling matrix with off-diagonal entries drawn uniformly on
/// [-1, 1) in row-major order (diagonal positions are not drawn), then
/// scaled to unit spectral radius. N = 1 yields the unscaled 1x1 zero matrix.
inline CouplingMatrix generate_coupling(std::size_t n, RngStream& rng) {
  if (n == 0) throw ContractError("generate_coupling: n must be >= 1");
  DenseMatrix w(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (i != k) w(k, i) = rng.uniform_pm1();
  if (n == 1) return CouplingMatrix(std::move(w));

  const double rho = spectral_radius(w);
  if (rho < 1e-12)
    throw DegenerateMatrixError("generate_coupling: spectral radius " + std::to_string(rho) +
                                " too small to normalize");
  for (double& v : w.data()) v /= rho;
  return CouplingMatrix(std::move(w));
}

/// Same draws as generate_coupling but scaled by the circular-law estimate
/// sqrt(N / 3) of the spectral radius instead of an iterative estimate.
/// The radius is only approximately 1; meant for cost measurements at large N
/// where the derivative's cost does not depend on the entries.
inline CouplingMatrix approx_unit_coupling(std::size_t n, RngStream& rng) {
  if (n == 0) throw ContractError("approx_unit_coupling: n must be >= 1");
  DenseMatrix w(n, n);
  const double scale = n > 1 ? 1.0 / std::sqrt(static_cast<double>(n) / 3.0) : 1.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (i != k) w(k, i) = scale * rng.uniform_pm1();
  return CouplingMatrix(std::move(w));
}

/// Input weights drawn uniformly on [-1, 1) in row-major order.
inline InputWeights generate_input_weights(std::size_t n, std::size_t n_in, RngStream& rng) {
  if (n == 0 || n_in == 0) throw ContractError("generate_input_weights: n and n_in must be >= 1");
  DenseMatrix w(n, n_in);
  for (double& v : w.data()) v = rng.uniform_pm1();
  return InputWeights(std::move(w));
}

/// Every oscillator starts at (sin phi0 cos phi0, sin phi0 sin phi0, cos phi0).
inline SystemState initial_state(std::size_t n, double phi0) {
  if (n == 0) throw ContractError("initial_state: n must be >= 1");
  const double s = std::sin(phi0);
  const double c = std::cos(phi0);
  const Vec3 m0 = {s * c, s * s, c};
  SystemState state(n);
  for (std::size_t k = 0; k < n; ++k) state.set(k, m0);
  return state;
}

inline constexpr double kDefaultPhi0 = 2.0 * std::numbers::pi / 360.0;

}  // namespace spinres
