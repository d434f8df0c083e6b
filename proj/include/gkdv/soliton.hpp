#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "gkdv/model.hpp"

namespace gkdv {

struct SolitonParams {
  double c = 1.0;
  double rho = 0.0;
};

/// Profile value and derivatives at offset s = x - rho.
struct ProfilePoint {
  double Q = 0.0;
  double Qx = 0.0;
  double Qxx = 0.0;
  double dQdc = 0.0;
  double dQxdc = 0.0;
};

class FirstIntegralProfile;

/// Speed-dependent constants of the closed-form power profile.
struct PowerConstants {
  int p = 2;
  double c = 1.0;
  double two_a = 2.0;  // 2/(p-1)
  double beta = 0.5;   // (p-1)/2
  double amp = 1.5;    // ((p+1)/2)^{1/(p-1)}
  double sc = 1.0;     // sqrt(c)
  double ca = 1.0;     // c^{1/(p-1)}
};

/// Pointwise evaluator of Q_c for one speed c. Pure powers use the closed
/// form; perturbed nonlinearities invert the first integral
/// (Q')^2 = cQ^2 - 2F(Q) and take c-derivatives by central differences.
class ProfileEvaluator {
 public:
  ProfileEvaluator(const NonlinearitySpec& spec, double c);

  double c() const { return c_; }
  const NonlinearitySpec& spec() const { return spec_; }
  /// Q_c(0), the turning point of the first integral.
  double peak() const { return peak_; }
  ProfilePoint operator()(double s) const;
  /// int Q_c^2 over the line.
  double mass() const;

 private:
  NonlinearitySpec spec_;
  double c_;
  double peak_ = 0.0;
  std::shared_ptr<const FirstIntegralProfile> table_;
  std::shared_ptr<const FirstIntegralProfile> table_minus_;
  std::shared_ptr<const FirstIntegralProfile> table_plus_;
  double dc_ = 0.0;
  PowerConstants power_;
};

/// Samples of Q_c(x - rho) and its derived profiles on a grid.
/// LambdaQ = 2/(p-1) Q + sQ', LambdaLambdaQ = 2/(p-1) LambdaQ + s LambdaQ',
/// dQdc = dQ_c/dc (equal to LambdaQ/(2c) for pure powers), s = x - rho wrapped.
struct ProfileFamily {
  SolitonParams params;
  NonlinearitySpec spec{2};
  Field Q;
  Field Qx;
  Field Qxx;
  Field LambdaQ;
  Field LambdaLambdaQ;
  Field dQdc;
};

/// Wrapped offsets x - rho on the grid.
Field offsets(const Grid& grid, double rho);

/// Closed-form power profile; throws when Q_c at the antipode exceeds 1e-13.
ProfileFamily power_profile(int p, const SolitonParams& params, const Grid& grid);

/// Profile of Q'' + f(Q) = cQ for a general nonlinearity.
ProfileFamily general_profile(const NonlinearitySpec& spec, const SolitonParams& params,
                              const Grid& grid);

/// Either constructor, chosen by spec.pure_power().
ProfileFamily make_profile(const NonlinearitySpec& spec, const SolitonParams& params,
                           const Grid& grid);

struct SolitonInvariants {
  double massQ = 0.0;    // int Q_c^2
  double energyQ = 0.0;  // E(Q_c)
  double intQp1 = 0.0;   // int Q_c^{p+1}
  double intQx2 = 0.0;   // int (Q_c')^2
};

/// int Q^2 of the c = 1 power profile, by the rectangle rule (cached per p).
double base_mass(int p);

SolitonInvariants soliton_invariants(int p, double c);

/// -v'' + cv - f'(Q_c)v.
Field apply_linearized(const ProfileFamily& family, const Field& v);

struct CoercivityOptions {
  int max_iterations = 20000;
  double tolerance = 1e-12;
};

struct CoercivityResult {
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Minimal Rayleigh quotient of int w (v_x^2 + (c - f'(Q_c)) v^2) over
/// int w (v_x^2 + c v^2), restricted to v orthogonal to the constraints.
/// w = 1 when no weight is given.
CoercivityResult coercivity_estimate(const ProfileFamily& family,
                                     const std::vector<Field>& constraints,
                                     const std::optional<Field>& weight = std::nullopt,
                                     const CoercivityOptions& options = {});

struct StabilityIndex {
  double value = 0.0;
  /// 2q c^{2q-1} int Q^2 for pure powers, NaN otherwise.
  double closed_form = 0.0;
};

/// d/dc int Q_c^2 by central differences with step 1e-3 c.
StabilityIndex stability_index(const NonlinearitySpec& spec, double c);

/// Smallest c at which the turning-point equation stops having a simple root;
/// +inf if none is found below c = 1e6.
double existence_threshold(const NonlinearitySpec& spec);

}  // namespace gkdv
