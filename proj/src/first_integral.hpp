#pragma once

#include <vector>

#include "gkdv/model.hpp"

namespace gkdv {

/// Even profile of Q'' + f(Q) = cQ built from the first integral
/// G(q) = cq^2 - 2F(q) = (Q')^2. With q = Qmax sin(theta),
/// x(theta) = int_theta^{pi/2} Qmax cos(phi) / sqrt(G(Qmax sin phi)) dphi
/// has a bounded integrand; it is tabulated on panels and inverted by Newton.
class FirstIntegralProfile {
 public:
  FirstIntegralProfile(const NonlinearitySpec& spec, double c);

  double c() const { return c_; }
  double peak() const { return qmax_; }

  struct Value {
    double Q;
    double Qx;
  };
  /// Q and Q' at offset s.
  Value operator()(double s) const;
  /// int Q^2 over the line.
  double mass() const;

  /// Smallest positive root of G with G'(root) < 0; throws NumericalFailure
  /// if there is none.
  static double turning_point(const NonlinearitySpec& spec, double c);

 private:
  double integrand(double theta) const;
  double sqrt_G(double theta) const;
  double x_of_theta(double theta, std::size_t panel) const;

  NonlinearitySpec spec_;
  double c_;
  double qmax_;
  std::vector<double> theta_;  // decreasing panel endpoints, theta_[0] = pi/2
  std::vector<double> x_;      // x_[i] = x(theta_[i]), increasing
};

}  // namespace gkdv
