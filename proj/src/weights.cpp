#include "gkdv/weights.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace gkdv {

namespace {

constexpr double kStepStart = 1.0;
constexpr double kStepWidth = 0.5;

struct Step {
  double v, d1, d2, d3;
};

// chi = 1 - S((x - 1)/delta) with S(t) = 10t^3 - 15t^4 + 6t^5, for x >= 0.
Step chi(double x) {
  if (x <= kStepStart) return {1.0, 0.0, 0.0, 0.0};
  if (x >= kStepStart + kStepWidth) return {0.0, 0.0, 0.0, 0.0};
  const double t = (x - kStepStart) / kStepWidth;
  const double d = kStepWidth;
  const double S = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  const double S1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
  const double S2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
  const double S3 = 60.0 * (1.0 - 6.0 * t + 6.0 * t * t);
  return {1.0 - S, -S1 / d, -S2 / (d * d), -S3 / (d * d * d)};
}

// Derivatives of Phi for x >= 0.
Step phi_right(double x) {
  const double E = std::exp(-x);
  const Step c = chi(x);
  return {E + c.v * (1.0 - E), -E + c.d1 * (1.0 - E) + c.v * E,
          E + c.d2 * (1.0 - E) + 2.0 * c.d1 * E - c.v * E,
          -E + c.d3 * (1.0 - E) + 3.0 * c.d2 * E - 3.0 * c.d1 * E + c.v * E};
}

double Psi_right(double x) {
  if (x <= kStepStart) return x;
  const double end = kStepStart + kStepWidth;
  auto phi = [](double y) { return phi_right(y).v; };
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  if (x <= end) return kStepStart + Gauss::integrate(phi, kStepStart, x);
  static const double at_end = kStepStart + Gauss::integrate(phi, kStepStart, end);
  return at_end + std::exp(-end) - std::exp(-x);
}

}  // namespace

double psi(double x) { return 2.0 / std::numbers::pi * std::atan(std::exp(0.25 * x)); }

double psi_d1(double x) { return 1.0 / (4.0 * std::numbers::pi * std::cosh(0.25 * x)); }

double psi_d3(double x) {
  const double sech = 1.0 / std::cosh(0.25 * x);
  return psi_d1(x) * (1.0 - 2.0 * sech * sech) / 16.0;
}

double plateau_phi(double x) { return phi_right(std::abs(x)).v; }

double plateau_phi_d1(double x) {
  const double v = phi_right(std::abs(x)).d1;
  return x < 0.0 ? -v : v;
}

double plateau_phi_d2(double x) { return phi_right(std::abs(x)).d2; }

double plateau_phi_d3(double x) {
  const double v = phi_right(std::abs(x)).d3;
  return x < 0.0 ? -v : v;
}

double plateau_Psi(double x) { return x < 0.0 ? -Psi_right(-x) : Psi_right(x); }

double plateau_L0() {
  static const double L0 = Psi_right(kStepStart + kStepWidth) + std::exp(-(kStepStart + kStepWidth));
  return L0;
}

WeightValue weight_eval(const WeightSpec& spec, double x, double t) {
  double y = x - spec.center;
  if (spec.drift) y += spec.drift->offset + spec.drift->slope * (t - spec.drift->t0);
  const double a = spec.parameter;
  switch (spec.kind) {
    case WeightKind::psi:
      return {psi(y), psi_d1(y), psi_d3(y)};
    case WeightKind::psi_scaled:
      return {psi(a * y), a * psi_d1(a * y), a * a * a * psi_d3(a * y)};
    case WeightKind::phi_plateau:
      return {plateau_phi(y / a), plateau_phi_d1(y / a) / a, plateau_phi_d3(y / a) / (a * a * a)};
    case WeightKind::psi_capital:
      return {a * plateau_Psi(y / a), plateau_phi(y / a), plateau_phi_d2(y / a) / (a * a)};
  }
  return {};
}

}  // namespace gkdv
