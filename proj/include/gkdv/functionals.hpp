#pragma once

#include <map>
#include <string>
#include <vector>

#include "gkdv/modulation.hpp"
#include "gkdv/weights.hpp"

namespace gkdv {

/// m(t): midpoint of rho_1 and rho_2, or rho - 10/sqrt(c) for one soliton.
double midpoint(const DecompositionState& state);

/// Monotone weights treat the cell as the segment [-L/2, L/2): centres are
/// reduced to the cell and the weight seam sits on the cell edge, where a
/// sponge absorbs outgoing radiation. Symmetric profiles use the nearest
/// periodic image.

/// int u^2 psi(x - m).
double localized_mass(const Field& u, double m);

struct EtaNorms {
  double g = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double gt1 = 0.0;
  double gt2 = 0.0;
};

/// g = int eta_x^2 + (c + psi(x - m)) eta^2,
/// g1 = int (eta_x^2 + eta^2) exp(-|x - rho_1|/4),
/// g2 = int (eta_x^2 + c eta^2) exp(-sqrt(c)|x - rho_2|/4),
/// gt1 = int (eta_x^2 + eta^2) psi(x - rho_1),
/// gt2 = int (eta_x^2 + c eta^2) psi(sqrt(c)(x - rho_2)).
/// c is the small reference speed; g2 = gt2 = 0 for one soliton.
EtaNorms eta_norms(const DecompositionState& state, double c, double m);

/// E(u) + c2_0/2 int u^2 + (c1_0 - c2_0)/2 I.
double weinstein_functional(const Field& u, double I, double c1_0, double c2_0,
                            const NonlinearitySpec& spec);

/// 1/2 int eta_x^2 + [c2_0 + (c1_0 - c2_0) psi(x - m)] eta^2 - sum_j f'(R_j) eta^2.
double quadratic_form_H(const DecompositionState& state, const NonlinearitySpec& spec,
                        double c1_0, double c2_0, double m);

enum class WindowSide { right_of_rho1, right_of_rho2, left_drift, intermediate };

/// Weight arguments per side, with c the small reference speed:
///   right_of_rho1: psi(x - rho_1 + x0 + sigma (t - t0))
///   right_of_rho2: psi(sqrt(c) (x - rho_2 + x0 + sigma (t - t0)))
///   left_drift:    psi(x - rho_1 - x0 - sigma (t0 - t))
///   intermediate:  psi(sqrt(c) (x - rho_2 - sigma (t0 - t)))
struct MonotonicityWindow {
  double t0 = 0.0;
  double x0 = 0.0;
  double sigma = 0.5;
  double c = 1.0;
};

struct LocalizedPair {
  double M = 0.0;
  double E = 0.0;
};

/// M = int eta^2 w, E = int [eta_x^2/2 - (F(R + eta) - f(R_1) eta - f(R_2) eta - F(R))] w
/// with R = R_1 + R_2.
LocalizedPair monotonicity_quantities(const DecompositionState& state,
                                      const NonlinearitySpec& spec,
                                      const MonotonicityWindow& window, WindowSide side);

struct VirialValues {
  std::vector<double> K;
  std::vector<double> H;
  std::vector<double> Hstar;
  /// sqrt(c_j) int (eta_x^2 + c_j eta^2) exp(-sqrt(c_j)|x - rho_j|/A).
  std::vector<double> N;
};

/// K_1 = L0 A int R_1^2 + int Theta_1 eta^2, K_2 = -L0 A int R_2^2 + int Theta_2 eta^2,
/// Theta_1 = Psi_1 + L0 A, Theta_2 = Psi_2 - L0 A, Psi_j = A Psi(sqrt(c_j)(x - rho_j)/A).
VirialValues virial_functional(const DecompositionState& state, const NonlinearitySpec& spec,
                               double A);

/// J_j = c_j^{-2q} int eta W_j with W_j the antiderivative of LambdaQ_{c_j}(x - rho_j)
/// vanishing at the left cell edge.
std::vector<double> l1_functional(const DecompositionState& state, const NonlinearitySpec& spec);

/// Antiderivative of LambdaQ_{c}(x - rho) vanishing at the left cell edge.
Field lambda_antiderivative(const Grid& grid, const NonlinearitySpec& spec,
                            const SolitonParams& soliton);

struct ExpansionResiduals {
  double dd1 = 0.0;
  double dd2 = 0.0;
  double dd3 = 0.0;
  std::vector<double> dd5;
};

/// Left-hand sides of the mass, localized-mass and energy expansions of
/// u = sum R_j + eta, and the per-soliton energy drift against base.
ExpansionResiduals expansion_audit(const DecompositionState& state,
                                   const DecompositionState& base, const NonlinearitySpec& spec);

/// E(Q_c) by quadrature on the grid.
double soliton_energy(const Grid& grid, const NonlinearitySpec& spec, const SolitonParams& sp);

/// int_{s > 0} s^2 u^2 with s = x - origin.
double halfline_x2_mass(const Field& u, double origin);

/// Time-indexed named channels in insertion order.
class FunctionalSeries {
 public:
  std::vector<double> times;

  void append(double t, const std::vector<std::pair<std::string, double>>& values);
  bool has(const std::string& name) const { return data_.count(name) != 0; }
  const std::vector<double>& channel(const std::string& name) const;
  /// Adds or replaces a whole channel aligned with times.
  void set_channel(const std::string& name, std::vector<double> values);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::vector<double>> data_;
};

/// stepwise: X_{i+1} - X_i - int_{t_i}^{t_{i+1}} w;
/// anchored: X_j - X_0 - int_0^{t_j} w;
/// cumulative: max over i < j of X_j - X_i - int_{t_i}^{t_j} w.
enum class MonotoneCheck { stepwise, anchored, cumulative };

/// Allowed increase: integral of the density (trapezoid on the series
/// times; empty density means zero) plus the floor.
struct SlackRule {
  MonotoneCheck check = MonotoneCheck::stepwise;
  double floor = 0.0;
  std::vector<double> density;

  static SlackRule absolute(double epsilon, MonotoneCheck check = MonotoneCheck::stepwise);
  static SlackRule integrated(std::vector<double> density, double floor,
                              MonotoneCheck check = MonotoneCheck::cumulative);
};

struct MonotonicityReport {
  std::string channel;
  std::string direction = "non-increasing up to slack";
  double max_violation = 0.0;
  double bound = 0.0;
  double worst_time = 0.0;
  bool pass = true;
};

/// Never throws on a violation; unknown channels raise InvalidArgument.
MonotonicityReport check_monotone(const FunctionalSeries& series, const std::string& channel,
                                  const SlackRule& rule);

/// Same check on raw samples.
MonotonicityReport check_monotone_values(const std::string& name, const std::vector<double>& t,
                                         const std::vector<double>& x, const SlackRule& rule);

/// Smallest C >= 0 for which the rule with density C w and the given floor
/// passes; +inf when none does.
double minimal_slack_constant(const std::vector<double>& t, const std::vector<double>& x,
                              const std::vector<double>& w, double floor, MonotoneCheck check);

/// Largest kappa for which x passes the cumulative rule with density
/// w - kappa d (d >= 0); -inf when a violation has no dissipation to offset it.
double max_dissipation_rate(const std::vector<double>& t, const std::vector<double>& x,
                            const std::vector<double>& w, const std::vector<double>& d,
                            double floor);

/// Cumulative trapezoid integral, starting at 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& y);

}  // namespace gkdv
