#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

/// Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative numerical procedure fails (no convergence,
/// blow-up, missing turning point, ...).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One monomial coeff * u^degree of the higher-order perturbation f1.
struct PolyTerm {
  int degree = 0;
  double coeff = 0.0;

  bool operator==(const PolyTerm&) const = default;
};

struct NonlinearityValue {
  double f = 0.0;
  double f_prime = 0.0;
  double F = 0.0;
};

/// f(u) = u^p + f1(u) with p in {2,3,4} and f1 a polynomial whose lowest
/// degree exceeds p, so f1(u)/u^p -> 0 at the origin and F stays exact.
class NonlinearitySpec {
 public:
  explicit NonlinearitySpec(int p, std::vector<PolyTerm> perturbation = {});

  int p() const { return p_; }
  bool pure_power() const { return perturbation_.empty(); }
  const std::vector<PolyTerm>& perturbation() const { return perturbation_; }
  /// Leading term followed by the perturbation.
  std::vector<PolyTerm> terms() const;

  /// q = 1/(p-1) - 1/4, the L2 scaling exponent: int Q_c^2 = c^{2q} int Q^2.
  double q() const { return 1.0 / (p_ - 1) - 0.25; }

  double f(double u) const;
  double f_prime(double u) const;
  double f_second(double u) const;
  /// Antiderivative with F(0) = 0.
  double F(double u) const;
  NonlinearityValue eval(double u) const;

  /// c_*(f) reported for pure powers (+inf); perturbed nonlinearities use
  /// soliton::existence_threshold.
  double c_star_pure() const;

  bool operator==(const NonlinearitySpec&) const = default;

 private:
  int p_;
  std::vector<PolyTerm> perturbation_;
};

NonlinearityValue eval_nonlinearity(const NonlinearitySpec& spec, double u);

/// Periodic grid on [-L/2, L/2) with n equispaced nodes.
struct Grid {
  double length = 0.0;
  std::size_t n = 0;

  Grid() = default;
  Grid(double length, std::size_t n);

  double dx() const { return length / static_cast<double>(n); }
  double x(std::size_t k) const { return -0.5 * length + static_cast<double>(k) * dx(); }
  /// Wavenumber of the r2c mode k in [0, n/2].
  double wavenumber(std::size_t k) const;
  std::size_t modes() const { return n / 2 + 1; }
  std::vector<double> nodes() const;

  bool operator==(const Grid&) const = default;
};

/// Maps s onto [-L/2, L/2), the nearest periodic image.
double wrap(double s, double length);

/// Real samples on a Grid.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(const Grid& grid, Fn&& fn) {
    std::vector<double> v(grid.n);
    for (std::size_t k = 0; k < grid.n; ++k) v[k] = fn(grid.x(k));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& data() const { return values_; }

  bool all_finite() const;
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
/// Pointwise product.
Field multiply(const Field& a, const Field& b);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Exact Fourier-multiplier derivative, order in {1,2,3}; the Nyquist mode
/// is dropped for odd orders.
Field spectral_derivative(const Field& v, int order);

/// Periodic rectangle rule.
double integrate(const Field& v);
/// int a*b
double inner(const Field& a, const Field& b);
double l2_norm(const Field& v);
/// (int v_x^2 + c v^2)^{1/2}
double h1c_norm(const Field& v, double c);

}  // namespace gkdv
