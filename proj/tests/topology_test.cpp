#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "spinres/io.hpp"
#include "spinres/rng.hpp"
#include "spinres/topology.hpp"

using namespace spinres;

namespace {

double dense_spectral_radius(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

DenseMatrix raw_zero_diagonal(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  DenseMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (r != c) a(r, c) = rng.uniform_pm1();
  return a;
}

}  // namespace

TEST(RngStream, StandardEngineTestVector) {
  std::mt19937_64 engine;  // default seed 5489
  engine.discard(9999);
  EXPECT_EQ(engine(), 9981545732273789042ull);
}

TEST(RngStream, MapsTop53BitsOntoPlusMinusOne) {
  RngStream rng(7);
  std::mt19937_64 engine(7);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = engine();
    const double expected = 2.0 * (static_cast<double>(x >> 11) / 9007199254740992.0) - 1.0;
    const double v = rng.uniform_pm1();
    EXPECT_EQ(v, expected);
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(rng.draws(), 1000u);
}

TEST(SpectralRadius, Examples) {
  DenseMatrix perm(2, 2);
  perm(0, 1) = perm(1, 0) = 1.0;
  EXPECT_NEAR(spectral_radius(perm), 1.0, 1e-12);

  DenseMatrix nil(2, 2);
  nil(0, 1) = 2.0;
  EXPECT_EQ(spectral_radius(nil), 0.0);
  EXPECT_EQ(spectral_radius(DenseMatrix(4, 4)), 0.0);
}

TEST(SpectralRadius, RotationHasComplexDominantPair) {
  // eigenvalues 0.9 * exp(+-i 1.1) and 0.3
  DenseMatrix a(3, 3);
  const double r = 0.9, t = 1.1;
  a(0, 0) = r * std::cos(t);
  a(0, 1) = -r * std::sin(t);
  a(1, 0) = r * std::sin(t);
  a(1, 1) = r * std::cos(t);
  a(2, 2) = 0.3;
  EXPECT_NEAR(spectral_radius(a), 0.9, 1e-9);
}

TEST(SpectralRadius, MatchesDenseEigensolve6x6) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DenseMatrix a = raw_zero_diagonal(6, seed);
    const double oracle = dense_spectral_radius(a);
    EXPECT_NEAR(spectral_radius(a), oracle, 1e-6 * oracle) << "seed " << seed;
  }
}

TEST(SpectralRadius, HessenbergQrMatchesDenseEigensolve) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RngStream rng(seed);
    const std::size_t k = 1 + seed % 25;
    std::vector<double> h(k * k, 0.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j + 1 >= i && j < k; ++j) m(i, j) = h[i * k + j] = rng.uniform_pm1();
    const double oracle = Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(detail::hessenberg_max_modulus(h, k), oracle, 1e-12 * oracle) << "k=" << k;
  }
}

TEST(SpectralRadius, NearTieOfRealAndComplexDominantModes) {
  // Top moduli 4.2274109 (real) and 4.2272173 (complex pair).
  const DenseMatrix a = raw_zero_diagonal(50, 41);
  const double oracle = dense_spectral_radius(a);
  EXPECT_NEAR(oracle, 4.2274109, 1e-6);
  EXPECT_NEAR(spectral_radius(a), oracle, 1e-9 * oracle);
}

TEST(SpectralRadius, MatchesDenseEigensolveBeyondKrylovDimension) {
  for (std::size_t n : {41u, 64u, 150u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const DenseMatrix a = raw_zero_diagonal(n, 500 + seed);
      const double oracle = dense_spectral_radius(a);
      EXPECT_NEAR(spectral_radius(a), oracle, 1e-6 * oracle) << "n=" << n << " seed=" << seed;
    }
  }
}

TEST(SpectralRadius, NonConvergenceCarriesLastEstimate) {
  const DenseMatrix a = raw_zero_diagonal(120, 3);
  try {
    spectral_radius(a, 1e-6, 4);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last_estimate(), 0.0);
  }
}

TEST(SpectralRadius, RejectsNonSquare) { EXPECT_THROW(spectral_radius(DenseMatrix(2, 3)), ContractError); }

TEST(GenerateCoupling, SingleOscillatorIsZero) {
  RngStream rng(1);
  const CouplingMatrix w = generate_coupling(1, rng);
  EXPECT_EQ(w.size(), 1u);
  EXPECT_EQ(w(0, 0), 0.0);
  EXPECT_EQ(rng.draws(), 0u);
}

TEST(GenerateCoupling, TwoByTwoScaledBySqrtProduct) {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 10; ++seed) {
    RngStream pre(seed);
    const double a = pre.uniform_pm1();
    const double b = pre.uniform_pm1();
    if (a * b <= 0.0) continue;  // real eigenvalues +-sqrt(ab) only when ab > 0
    RngStream rng(seed);
    const CouplingMatrix w = generate_coupling(2, rng);
    const double s = std::sqrt(std::abs(a * b));
    EXPECT_NEAR(w(0, 1), a / s, 1e-9);
    EXPECT_NEAR(w(1, 0), b / s, 1e-9);
    EXPECT_EQ(w(0, 0), 0.0);
    EXPECT_EQ(w(1, 1), 0.0);
    ++checked;
  }
}

TEST(GenerateCoupling, HundredOscillators) {
  RngStream rng(2024);
  const CouplingMatrix w = generate_coupling(100, rng);
  EXPECT_EQ(rng.draws(), 100u * 99u);
  for (std::size_t k = 0; k < 100; ++k) EXPECT_EQ(w(k, k), 0.0);
  const double rho = spectral_radius(w.entries());
  EXPECT_GE(rho, 1.0 - 1e-6);
  EXPECT_LE(rho, 1.0 + 1e-6);
  EXPECT_NEAR(dense_spectral_radius(w.entries()), 1.0, 1e-6);
}

TEST(GenerateCoupling, DeterministicPerSeed) {
  RngStream a(5), b(5), c(6);
  const CouplingMatrix wa = generate_coupling(17, a);
  EXPECT_EQ(wa, generate_coupling(17, b));
  EXPECT_NE(wa, generate_coupling(17, c));
}

TEST(GenerateCoupling, PropertyOverSeeds) {
  for (std::size_t n : {2u, 5u, 17u, 50u}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      RngStream rng(seed);
      const CouplingMatrix w = generate_coupling(n, rng);
      for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(w(k, k), 0.0);
      const double rho = spectral_radius(w.entries());
      EXPECT_NEAR(rho, 1.0, 1e-6) << "n=" << n << " seed=" << seed;
      EXPECT_NEAR(dense_spectral_radius(w.entries()), 1.0, 1e-6) << "n=" << n << " seed=" << seed;
    }
  }
}

TEST(ApproxUnitCoupling, ZeroDiagonalAndRoughlyUnitRadius) {
  RngStream rng(8);
  const CouplingMatrix w = approx_unit_coupling(200, rng);
  for (std::size_t k = 0; k < 200; ++k) EXPECT_EQ(w(k, k), 0.0);
  const double rho = dense_spectral_radius(w.entries());
  EXPECT_GT(rho, 0.8);
  EXPECT_LT(rho, 1.2);
}

TEST(InputWeights, RangeDeterminismAndMean) {
  RngStream a(9), b(9);
  const InputWeights wa = generate_input_weights(1000, 1, a);
  EXPECT_EQ(wa, generate_input_weights(1000, 1, b));
  double sum = 0.0;
  for (double v : wa.entries().data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
    sum += v;
  }
  const double mean = sum / 1000.0;
  EXPECT_GE(mean, -0.1);
  EXPECT_LE(mean, 0.1);
  EXPECT_THROW(generate_input_weights(3, 0, a), ContractError);
}

TEST(InputWeights, DrawnAfterCoupling) {
  RngStream rng(12);
  generate_coupling(4, rng);
  const InputWeights w = generate_input_weights(4, 2, rng);
  RngStream replay(12);
  for (int i = 0; i < 12; ++i) replay.uniform_pm1();
  for (double v : w.entries().data()) EXPECT_EQ(v, replay.uniform_pm1());
}

TEST(InitialState, Examples) {
  const SystemState z = initial_state(3, 0.0);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(z.get(k), (Vec3{0, 0, 1}));

  const SystemState s = initial_state(4, kDefaultPhi0);
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec3 m = s.get(k);
    EXPECT_NEAR(m[0], 0.0174497484, 1e-9);
    EXPECT_NEAR(m[1], 0.0003045865, 1e-9);
    EXPECT_NEAR(m[2], 0.9998476952, 1e-9);
    EXPECT_LE(std::abs(norm(m) - 1.0), 1e-15);
  }
  for (double phi : {0.1, 0.7, 1.3, 2.9, -0.4}) EXPECT_LE(std::abs(norm(initial_state(1, phi).get(0)) - 1.0), 2e-16);
  EXPECT_THROW(initial_state(0, 0.0), ContractError);
}

TEST(MatrixCsv, RoundTripsBitExactly) {
  RngStream rng(31);
  const CouplingMatrix w = generate_coupling(9, rng);
  const InputWeights w_in = generate_input_weights(9, 3, rng);
  std::stringstream a, b;
  save_coupling_csv(a, w);
  save_input_weights_csv(b, w_in);
  EXPECT_EQ(load_coupling_csv(a), w);
  EXPECT_EQ(load_input_weights_csv(b), w_in);
}

TEST(MatrixCsv, RejectsRaggedRowsAndNonzeroDiagonal) {
  std::stringstream ragged("0,1\n1\n");
  EXPECT_THROW(read_matrix_csv(ragged), ConfigError);
  std::stringstream diag("1,0\n0,0\n");
  EXPECT_THROW(load_coupling_csv(diag), ContractError);
}
