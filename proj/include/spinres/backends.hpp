#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "spinres/errors.hpp"
#include "spinres/model.hpp"
#include "spinres/thread_pool.hpp"

namespace spinres {

enum class BackendKind { reference, sequential_optimized, parallel, gpu };

inline const char* to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::reference: return "reference";
    case BackendKind::sequential_optimized: return "sequential-optimized";
    case BackendKind::parallel: return "parallel";
    case BackendKind::gpu: return "gpu";
  }
  return "unknown";
}

struct BackendDescriptor {
  std::string id;
  BackendKind kind = BackendKind::reference;
  bool available = false;
  std::size_t workers = 1;
  std::string device;
};

struct BackendOptions {
  std::size_t workers = 0;  // 0: one per hardware thread
  int gpu_device = -1;      // -1: SPINRES_GPU_DEVICE or 0
};

/// Engine evaluating the coupled LLG vector field.
///
/// Implementations keep scratch buffers, so an instance must be driven from
/// one thread at a time. `derivative_into` returns once `out` is fully written.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const BackendDescriptor& descriptor() const noexcept = 0;
  virtual void derivative_into(const Reservoir& res, std::span<const double> m,
                               std::span<const double> u, std::span<double> out) = 0;
  const std::string& id() const noexcept { return descriptor().id; }
};

/// Straight transcription of the field definitions; the oracle for the others.
class ReferenceBackend final : public Backend {
 public:
  ReferenceBackend() { desc_ = {"reference", BackendKind::reference, true, 1, "cpu"}; }
  const BackendDescriptor& descriptor() const noexcept override { return desc_; }
  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    llg_derivative(m, u, res, scratch_, out);
  }

 private:
  BackendDescriptor desc_;
  FieldScratch scratch_;
};

namespace detail {

inline void check_shapes(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                         std::span<const double> out) {
  const std::size_t n = res.size();
  if (m.size() != 3 * n || out.size() != 3 * n)
    throw ContractError("derivative_into: state/output size must be 3N");
  if (u.size() != res.n_in()) throw ContractError("derivative_into: input length must equal n_in");
}

// Rows [lo, hi) of the vector field, fused: coupling row sum, input row sum
// and the local LLG term per oscillator in one pass. Rows are processed four
// at a time so each sweep over m_x feeds four independent accumulators; each
// row's sum still runs over i in index order, so the result is bit-identical
// to the reference evaluation.
inline void fused_rows(const Reservoir& res, std::span<const double> m, std::span<const double> m_x,
                       std::span<const double> u, std::span<double> out, std::size_t lo,
                       std::size_t hi) {
  const std::size_t n = res.size();
  const std::size_t n_in = res.n_in();
  const double* w = res.coupling().entries().data().data();
  const double* w_in = res.input_weights().entries().data().data();
  const double* x = m_x.data();
  const PhysicalParams& p = res.params();
  const DerivedConstants& c = res.consts();

  auto finish_row = [&](std::size_t k, double coupling_sum) {
    double in_acc = 0.0;
    const double* wr = w_in + k * n_in;
    for (std::size_t i = 0; i < n_in; ++i) in_acc += wr[i] * u[i];
    const double h_x = p.a_cp * coupling_sum + p.a_in * in_acc;
    const Vec3 mk = {m[3 * k], m[3 * k + 1], m[3 * k + 2]};
    const Vec3 d = llg_rhs(mk, total_b_from_hx(mk, h_x, p, c), c);
    out[3 * k] = d[0];
    out[3 * k + 1] = d[1];
    out[3 * k + 2] = d[2];
  };

  std::size_t k = lo;
  for (; k + 4 <= hi; k += 4) {
    const double* r0 = w + k * n;
    const double* r1 = r0 + n;
    const double* r2 = r1 + n;
    const double* r3 = r2 + n;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      a0 += r0[i] * xi;
      a1 += r1[i] * xi;
      a2 += r2[i] * xi;
      a3 += r3[i] * xi;
    }
    finish_row(k, a0);
    finish_row(k + 1, a1);
    finish_row(k + 2, a2);
    finish_row(k + 3, a3);
  }
  for (; k < hi; ++k) {
    const double* r = w + k * n;
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += r[i] * x[i];
    finish_row(k, a);
  }
}

}  // namespace detail

/// Allocation-free fused single-thread evaluation.
class SequentialBackend final : public Backend {
 public:
  SequentialBackend() { desc_ = {"sequential", BackendKind::sequential_optimized, true, 1, "cpu"}; }
  const BackendDescriptor& descriptor() const noexcept override { return desc_; }
  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    detail::check_shapes(res, m, u, out);
    const std::size_t n = res.size();
    m_x_.resize(n);
    for (std::size_t k = 0; k < n; ++k) m_x_[k] = m[3 * k];
    detail::fused_rows(res, m, m_x_, u, out, 0, n);
  }

 private:
  BackendDescriptor desc_;
  std::vector<double> m_x_;
};

/// Row-partitioned evaluation: worker w owns a contiguous block of output
/// rows and computes their coupling sums and local terms. No inner sum is
/// ever split, so the output does not depend on the worker count.
class ParallelBackend final : public Backend {
 public:
  explicit ParallelBackend(std::size_t workers) : pool_(workers) {
    desc_ = {"parallel", BackendKind::parallel, true, pool_.size(), "cpu"};
  }
  const BackendDescriptor& descriptor() const noexcept override { return desc_; }
  std::size_t workers() const noexcept { return pool_.size(); }

  void derivative_into(const Reservoir& res, std::span<const double> m, std::span<const double> u,
                       std::span<double> out) override {
    detail::check_shapes(res, m, u, out);
    const std::size_t n = res.size();
    m_x_.resize(n);
    for (std::size_t k = 0; k < n; ++k) m_x_[k] = m[3 * k];
    const std::size_t parts = pool_.size();
    auto task = [&](std::size_t w) {
      const std::size_t lo = n * w / parts;
      const std::size_t hi = n * (w + 1) / parts;
      detail::fused_rows(res, m, m_x_, u, out, lo, hi);
    };
    pool_.run(task);
  }

 private:
  BackendDescriptor desc_;
  ThreadPool pool_;
  std::vector<double> m_x_;
};

inline std::size_t default_worker_count() {
  return std::max<unsigned>(1u, std::thread::hardware_concurrency());
}

inline int resolve_gpu_device(int requested) {
  if (requested >= 0) return requested;
  if (const char* env = std::getenv("SPINRES_GPU_DEVICE")) return std::atoi(env);
  return 0;
}

/// Compiled-in backends in fixed order: reference, sequential-optimized,
/// parallel, gpu. This build has no device offload, so the gpu entry is
/// always present and always unavailable.
inline std::vector<BackendDescriptor> list_backends(const BackendOptions& opts = {}) {
  const std::size_t workers = opts.workers == 0 ? default_worker_count() : opts.workers;
  return {
      {"reference", BackendKind::reference, true, 1, "cpu"},
      {"sequential", BackendKind::sequential_optimized, true, 1, "cpu"},
      {"parallel", BackendKind::parallel, true, workers, "cpu"},
      {"gpu", BackendKind::gpu, false, 0,
       "device " + std::to_string(resolve_gpu_device(opts.gpu_device)) + " (built without GPU support)"},
  };
}

inline std::vector<std::string> available_backend_ids(const BackendOptions& opts = {}) {
  std::vector<std::string> ids;
  for (const auto& d : list_backends(opts))
    if (d.available) ids.push_back(d.id);
  return ids;
}

/// Throws CapabilityError for unknown or unavailable ids.
inline std::unique_ptr<Backend> make_backend(const std::string& id, const BackendOptions& opts = {}) {
  if (id == "reference") return std::make_unique<ReferenceBackend>();
  if (id == "sequential") return std::make_unique<SequentialBackend>();
  if (id == "parallel")
    return std::make_unique<ParallelBackend>(opts.workers == 0 ? default_worker_count() : opts.workers);
  throw CapabilityError(id, available_backend_ids(opts));
}

}  // namespace spinres
