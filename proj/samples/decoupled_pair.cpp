// Two oscillators, first uncoupled and then with a seeded unit-spectral-radius
// coupling, integrated for 2000 steps with the fused sequential backend.
#include <cstdio>

#include "spinres/spinres.hpp"

int main() {
  using namespace spinres;
  const PhysicalParams params;

  RunConfig cfg;
  cfg.n = 2;
  cfg.steps = 2000;
  cfg.record_stride = 500;

  SequentialBackend backend;
  const Reservoir uncoupled(params, CouplingMatrix::zero(2), InputWeights(DenseMatrix(2, 1)));
  RngStream rng(42);
  CouplingMatrix w = generate_coupling(2, rng);
  InputWeights w_in = generate_input_weights(2, 1, rng);
  const Reservoir coupled(params, std::move(w), std::move(w_in));

  for (const Reservoir* res : {&uncoupled, &coupled}) {
    const Trajectory traj = integrate(cfg, *res, backend);
    std::printf("%s\n", res == &uncoupled ? "uncoupled" : "coupled");
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
      const Vec3 a = traj.states[r].get(0);
      const Vec3 b = traj.states[r].get(1);
      std::printf("  t=%.2e  m0=(% .4f % .4f % .4f)  m1=(% .4f % .4f % .4f)\n", traj.times[r], a[0], a[1],
                  a[2], b[0], b[1], b[2]);
    }
    std::printf("  max_norm_drift %.3e\n", traj.max_norm_drift);
  }
}
