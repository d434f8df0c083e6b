#pragma once

#include <optional>

namespace gkdv {

/// psi(x) = (2/pi) arctan(exp(x/4)); increasing, psi(-x) = 1 - psi(x),
/// psi' = 1/(4 pi cosh(x/4)), |psi'''| <= psi'/16.
double psi(double x);
double psi_d1(double x);
double psi_d3(double x);

/// Even plateau: 1 on [0,1], exp(-x) on [3/2,inf). In between
/// Phi = chi + (1 - chi) exp(-x), chi the C2 quintic step from 1 at x = 1 to
/// 0 at x = 3/2, so exp(-x) <= Phi <= 3 exp(-x) and Phi' <= 0 on [0,inf).
double plateau_phi(double x);
double plateau_phi_d1(double x);
double plateau_phi_d2(double x);
double plateau_phi_d3(double x);

/// Psi(x) = int_0^x Phi (odd).
double plateau_Psi(double x);
/// L0 = Psi(+inf).
double plateau_L0();

struct WeightValue {
  double w = 0.0;
  double w1 = 0.0;
  double w3 = 0.0;
};

enum class WeightKind { psi, psi_scaled, phi_plateau, psi_capital };

/// Drifting argument: y = x - center + offset + slope (t - t0).
struct WeightDrift {
  double slope = 0.0;
  double t0 = 0.0;
  double offset = 0.0;
};

/// parameter is sigma for psi_scaled (psi(sigma y)), B for phi_plateau
/// (Phi(y/B)) and A for psi_capital (A Psi(y/A)).
struct WeightSpec {
  WeightKind kind = WeightKind::psi;
  double parameter = 1.0;
  double center = 0.0;
  std::optional<WeightDrift> drift;
};

WeightValue weight_eval(const WeightSpec& spec, double x, double t);

}  // namespace gkdv
