#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "spinres/errors.hpp"
#include "spinres/vec3.hpp"

namespace spinres {

/// Material and drive parameters of one spin-torque oscillator.
///
/// Magnetic quantities are CGS (Oe, emu/cm^3, cm^3); the spin-torque drive
/// (hbar, e, I) is SI. The defaults are the standard oscillatory parameter
/// set used throughout the reservoir benchmarks.
struct PhysicalParams {
  double gamma = 1.764e7;        // rad/(Oe s)
  double alpha = 0.005;          // Gilbert damping
  double m_sat = 1448.3;         // emu/cm^3
  double h_k = 18616.0;          // Oe
  double h_appl = 200.0;         // Oe
  double eta = 0.537;            // spin polarization
  double lambda_stt = 0.288;     // spin-transfer torque asymmetry
  double current = 2.5e-3;       // A
  double volume = std::numbers::pi * 60.0 * 60.0 * 2.0 * 1e-21;  // cm^3 (pi 60^2 2 nm^3)
  double charge_e = 1.60217733e-19;  // C
  double hbar = 1.05457266e-34;      // J s
  Vec3 p_vec = {1.0, 0.0, 6.123234e-17};
  double a_cp = 1.0;             // Oe
  double a_in = 1.0;             // Oe

  /// Throws ContractError naming the first violated constraint.
  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ContractError(std::string("invalid physical parameters: ") + what);
    };
    require(std::abs(norm(p_vec) - 1.0) <= 1e-12, "|p_vec| must be 1");
    require(alpha >= 0.0, "alpha must be non-negative");
    require(std::abs(lambda_stt) < 1.0, "|lambda_stt| must be < 1");
    require(gamma > 0.0, "gamma must be positive");
    require(m_sat > 0.0, "m_sat must be positive");
    require(volume > 0.0, "volume must be positive");
    require(charge_e > 0.0, "charge_e must be positive");
    require(hbar > 0.0, "hbar must be positive");
  }
};

/// Coefficients of the LLG right-hand side, cached per parameter set.
struct DerivedConstants {
  double c_prec = 0.0;          // gamma / (1 + alpha^2)
  double c_damp = 0.0;          // alpha * c_prec
  double h_s_prefactor = 0.0;   // hbar eta I / (2 e M V), in Oe
  double h_aniso = 0.0;         // H_K - 4 pi M, in Oe
};

/// Joules per emu expressed in oersted (1 J = 1e7 erg, erg/emu = Oe).
inline constexpr double kOerstedPerJoulePerEmu = 1e7;

inline DerivedConstants derive(const PhysicalParams& p) noexcept {
  DerivedConstants c;
  c.c_prec = p.gamma / (1.0 + p.alpha * p.alpha);
  c.c_damp = p.alpha * c.c_prec;
  c.h_s_prefactor =
      p.hbar * p.eta * p.current / (2.0 * p.charge_e) / (p.m_sat * p.volume) * kOerstedPerJoulePerEmu;
  c.h_aniso = p.h_k - 4.0 * std::numbers::pi * p.m_sat;
  return c;
}

}  // namespace spinres
