#include "first_integral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace gkdv {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kUniformStep = 0.05;
constexpr double kUniformFloor = 0.1;
constexpr double kThetaMin = 1e-280;

// h(q) = G(q)/q^2 = c - 2F(q)/q^2, accurate for small q.
double h_of(const NonlinearitySpec& spec, double c, double q) {
  double s = 0.0;
  for (const PolyTerm& t : spec.terms()) s += t.coeff * std::pow(q, t.degree - 1) / (t.degree + 1);
  return c - 2.0 * s;
}

// -H(q) with G(q) = (q - qmax) H(q); accurate near qmax.
double minus_H(const NonlinearitySpec& spec, double c, double qmax, double q) {
  double s = 0.0;
  for (const PolyTerm& t : spec.terms()) {
    double acc = 0.0;
    double qi = 1.0;
    for (int i = 0; i <= t.degree; ++i) {
      acc += qi * std::pow(qmax, t.degree - i);
      qi *= q;
    }
    s += t.coeff * acc / (t.degree + 1);
  }
  return 2.0 * s - c * (q + qmax);
}

}  // namespace

double FirstIntegralProfile::turning_point(const NonlinearitySpec& spec, double c) {
  if (!(c > 0.0)) throw InvalidArgument("soliton speed c must be positive");
  const int p = spec.p();
  const double guess = std::pow(0.5 * (p + 1) * c, 1.0 / (p - 1));
  double lo = 1e-6 * guess;
  if (h_of(spec, c, lo) <= 0.0) throw NumericalFailure("turning point: G not positive near 0");
  auto fn = [&](double q) { return h_of(spec, c, q); };
  // Geometric scan for the first sign change; a local minimum of h between
  // scan points is refined so that narrow dips below zero are not skipped.
  double prev = lo;
  double cur = lo * 1.01;
  double h_prev = fn(prev);
  double h_cur = fn(cur);
  double a = 0.0;
  double b = 0.0;
  bool bracketed = false;
  while (cur < 1e8) {
    if (h_cur <= 0.0) {
      a = prev;
      b = cur;
      bracketed = true;
      break;
    }
    const double next = cur * 1.01;
    const double h_next = fn(next);
    if (h_cur < h_prev && h_cur < h_next) {
      auto [qmin, hmin] = boost::math::tools::brent_find_minima(fn, prev, next, 52);
      if (hmin <= 0.0) {
        a = prev;
        b = qmin;
        bracketed = true;
        break;
      }
    }
    prev = cur;
    h_prev = h_cur;
    cur = next;
    h_cur = h_next;
  }
  if (!bracketed) throw NumericalFailure("no positive turning point: no soliton at this speed");
  double root = b;
  if (fn(b) < 0.0) {
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    auto [r0, r1] = boost::math::tools::toms748_solve(fn, a, b, tol, iters);
    root = 0.5 * (r0 + r1);
  }
  // A simple root is needed for a finite x(Q); a tangential root is a front.
  const double slope = spec.f(root) - c * root;
  if (!(slope > 1e-9 * c * root))
    throw NumericalFailure("degenerate turning point: no soliton at this speed");
  return root;
}

FirstIntegralProfile::FirstIntegralProfile(const NonlinearitySpec& spec, double c)
    : spec_(spec), c_(c), qmax_(turning_point(spec, c)) {
  theta_.push_back(kHalfPi);
  const int uniform = static_cast<int>(std::ceil((kHalfPi - kUniformFloor) / kUniformStep));
  const double step = (kHalfPi - kUniformFloor) / uniform;
  for (int i = 1; i <= uniform; ++i) theta_.push_back(kHalfPi - i * step);
  while (theta_.back() > kThetaMin) theta_.push_back(0.5 * theta_.back());

  x_.assign(theta_.size(), 0.0);
  auto g = [this](double th) { return integrand(th); };
  for (std::size_t i = 0; i + 1 < theta_.size(); ++i)
    x_[i + 1] = x_[i] + Gauss::integrate(g, theta_[i + 1], theta_[i]);
}

double FirstIntegralProfile::integrand(double theta) const {
  const double q = qmax_ * std::sin(theta);
  if (theta < std::numbers::pi / 6.0)
    return std::cos(theta) / (std::sin(theta) * std::sqrt(h_of(spec_, c_, q)));
  const double psi = kHalfPi - theta;
  return std::sqrt(2.0 * qmax_) * std::cos(0.5 * psi) / std::sqrt(minus_H(spec_, c_, qmax_, q));
}

double FirstIntegralProfile::sqrt_G(double theta) const {
  const double q = qmax_ * std::sin(theta);
  if (theta < std::numbers::pi / 6.0) return q * std::sqrt(h_of(spec_, c_, q));
  const double psi = kHalfPi - theta;
  return std::sqrt(2.0 * qmax_) * std::sin(0.5 * psi) * std::sqrt(minus_H(spec_, c_, qmax_, q));
}

double FirstIntegralProfile::x_of_theta(double theta, std::size_t panel) const {
  if (theta >= theta_[panel]) return x_[panel];
  auto g = [this](double th) { return integrand(th); };
  return x_[panel] + Gauss::integrate(g, theta, theta_[panel]);
}

FirstIntegralProfile::Value FirstIntegralProfile::operator()(double s) const {
  const double a = std::abs(s);
  if (a == 0.0) return {qmax_, 0.0};
  if (a >= x_.back()) return {0.0, 0.0};
  // Panel i satisfies x_[i] <= a < x_[i+1].
  const auto it = std::upper_bound(x_.begin(), x_.end(), a);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double th_hi = theta_[i];
  const double th_lo = theta_[i + 1];
  const double frac = (a - x_[i]) / (x_[i + 1] - x_[i]);
  double theta = (th_lo < kUniformFloor - 1e-12)
                     ? th_hi * std::pow(th_lo / th_hi, frac)
                     : th_hi + frac * (th_lo - th_hi);
  for (int iter = 0; iter < 60; ++iter) {
    const double r = x_of_theta(theta, i) - a;
    if (std::abs(r) <= 2e-16 * std::max(a, 1.0)) break;
    double next = theta + r / integrand(theta);
    next = std::clamp(next, th_lo, th_hi);
    const double delta = std::abs(next - theta);
    theta = next;
    if (delta <= 2e-16 * theta) break;
  }
  const double Q = qmax_ * std::cos(kHalfPi - theta);
  const double Qx = -sqrt_G(theta);
  return {Q, s > 0.0 ? Qx : -Qx};
}

double FirstIntegralProfile::mass() const {
  auto g = [this](double th) {
    const double q = qmax_ * std::sin(th);
    return q * q * integrand(th);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < theta_.size(); ++i)
    total += Gauss::integrate(g, theta_[i + 1], theta_[i]);
  return 2.0 * total;
}

}  // namespace gkdv
