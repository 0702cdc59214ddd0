#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "spinres/errors.hpp"
#include "spinres/vec3.hpp"

namespace spinres {

/// N magnetization vectors stored as an interleaved N x 3 array (mx, my, mz per oscillator).
class SystemState {
 public:
  SystemState() = default;
  explicit SystemState(std::size_t n) : n_(n), m_(3 * n, 0.0) {}
  SystemState(std::size_t n, std::vector<double> components) : n_(n), m_(std::move(components)) {
    if (m_.size() != 3 * n_) throw ContractError("SystemState: component count must be 3*n");
  }

  std::size_t size() const noexcept { return n_; }

  Vec3 get(std::size_t k) const noexcept { return {m_[3 * k], m_[3 * k + 1], m_[3 * k + 2]}; }
  void set(std::size_t k, const Vec3& v) noexcept {
    m_[3 * k] = v[0];
    m_[3 * k + 1] = v[1];
    m_[3 * k + 2] = v[2];
  }

  std::span<double> data() noexcept { return m_; }
  std::span<const double> data() const noexcept { return m_; }

  friend bool operator==(const SystemState&, const SystemState&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> m_;
};

/// Dense row-major matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(a_).subspan(r * cols_, cols_);
  }
  std::span<double> data() noexcept { return a_; }
  std::span<const double> data() const noexcept { return a_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// Piecewise-constant (zero-order hold) input signal.
///
/// Sample j drives integration steps [j*steps_per_sample, (j+1)*steps_per_sample).
/// An empty sample list means u = 0 on every step.
class InputSeries {
 public:
  /// u = 0 for every step.
  static InputSeries zero(std::size_t n_in) {
    InputSeries s;
    s.n_in_ = n_in;
    s.zero_.assign(n_in, 0.0);
    return s;
  }

  /// `samples` holds sample_count * n_in values, sample-major.
  InputSeries(std::size_t n_in, std::vector<double> samples, std::size_t steps_per_sample)
      : n_in_(n_in), steps_per_sample_(steps_per_sample), samples_(std::move(samples)) {
    if (n_in_ == 0) throw ContractError("InputSeries: n_in must be >= 1");
    if (steps_per_sample_ == 0) throw ContractError("InputSeries: steps_per_sample must be >= 1");
    if (samples_.size() % n_in_ != 0)
      throw ContractError("InputSeries: sample buffer is not a multiple of n_in");
    zero_.assign(n_in_, 0.0);
  }

  std::size_t n_in() const noexcept { return n_in_; }
  bool is_zero() const noexcept { return samples_.empty(); }
  std::size_t sample_count() const noexcept { return n_in_ == 0 ? 0 : samples_.size() / n_in_; }
  std::size_t steps_per_sample() const noexcept { return steps_per_sample_; }

  std::size_t sample_index(std::size_t step) const noexcept { return step / steps_per_sample_; }

  /// True when every step in [0, steps) maps to an existing sample.
  bool covers(std::size_t steps) const noexcept {
    if (is_zero()) return true;
    return steps == 0 || sample_index(steps - 1) < sample_count();
  }

  /// The input vector held during integration step `step`.
  std::span<const double> at_step(std::size_t step) const noexcept {
    if (is_zero()) return zero_;
    return std::span<const double>(samples_).subspan(sample_index(step) * n_in_, n_in_);
  }

 private:
  InputSeries() = default;
  std::size_t n_in_ = 0;
  std::size_t steps_per_sample_ = 1;
  std::vector<double> samples_;
  std::vector<double> zero_;
};

}  // namespace spinres
