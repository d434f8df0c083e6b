#include "gkdv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gkdv/fft.hpp"

namespace gkdv {

namespace {

double ipow(double u, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= u;
  return r;
}

}  // namespace

NonlinearitySpec::NonlinearitySpec(int p, std::vector<PolyTerm> perturbation)
    : p_(p), perturbation_(std::move(perturbation)) {
  if (p_ < 2 || p_ > 4) throw InvalidArgument("nonlinearity exponent p must be 2, 3 or 4");
  std::erase_if(perturbation_, [](const PolyTerm& t) { return t.coeff == 0.0; });
  for (const PolyTerm& t : perturbation_) {
    if (t.degree <= p_)
      throw InvalidArgument("perturbation terms must have degree greater than p");
    if (!std::isfinite(t.coeff)) throw InvalidArgument("perturbation coefficient is not finite");
  }
  std::sort(perturbation_.begin(), perturbation_.end(),
            [](const PolyTerm& a, const PolyTerm& b) { return a.degree < b.degree; });
  // Merge repeated degrees so equality compares canonical forms.
  std::vector<PolyTerm> merged;
  for (const PolyTerm& t : perturbation_) {
    if (!merged.empty() && merged.back().degree == t.degree)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  perturbation_ = std::move(merged);
}

std::vector<PolyTerm> NonlinearitySpec::terms() const {
  std::vector<PolyTerm> all{{p_, 1.0}};
  all.insert(all.end(), perturbation_.begin(), perturbation_.end());
  return all;
}

double NonlinearitySpec::f(double u) const {
  double r = ipow(u, p_);
  for (const PolyTerm& t : perturbation_) r += t.coeff * ipow(u, t.degree);
  return r;
}

double NonlinearitySpec::f_prime(double u) const {
  double r = p_ * ipow(u, p_ - 1);
  for (const PolyTerm& t : perturbation_) r += t.coeff * t.degree * ipow(u, t.degree - 1);
  return r;
}

double NonlinearitySpec::f_second(double u) const {
  double r = p_ * (p_ - 1) * ipow(u, p_ - 2);
  for (const PolyTerm& t : perturbation_)
    r += t.coeff * t.degree * (t.degree - 1) * ipow(u, t.degree - 2);
  return r;
}

double NonlinearitySpec::F(double u) const {
  double r = ipow(u, p_ + 1) / (p_ + 1);
  for (const PolyTerm& t : perturbation_) r += t.coeff * ipow(u, t.degree + 1) / (t.degree + 1);
  return r;
}

NonlinearityValue NonlinearitySpec::eval(double u) const { return {f(u), f_prime(u), F(u)}; }

double NonlinearitySpec::c_star_pure() const {
  return std::numeric_limits<double>::infinity();
}

NonlinearityValue eval_nonlinearity(const NonlinearitySpec& spec, double u) {
  return spec.eval(u);
}

Grid::Grid(double length_, std::size_t n_) : length(length_), n(n_) {
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid length must be > 0");
  if (n < 16 || n % 2 != 0) throw InvalidArgument("grid size must be even and at least 16");
}

double Grid::wavenumber(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / length;
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) xs[k] = x(k);
  return xs;
}

double wrap(double s, double length) {
  double r = s - length * std::floor(s / length + 0.5);
  if (r >= 0.5 * length) r -= length;
  if (r < -0.5 * length) r += length;
  return r;
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.n, value) {}

Field::Field(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n) throw InvalidArgument("field size does not match grid");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field +=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field -=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

Field multiply(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "multiply");
  Field r(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] * b[k];
  return r;
}

Field spectral_derivative(const Field& v, int order) {
  if (order < 1 || order > 3) throw InvalidArgument("spectral_derivative: order must be 1, 2 or 3");
  const Grid& g = v.grid();
  std::vector<fft::Complex> hat(g.modes());
  fft::forward(v.values(), hat);
  const fft::Complex ik_unit(0.0, 1.0);
  for (std::size_t k = 0; k < hat.size(); ++k) {
    const double kk = g.wavenumber(k);
    if (k == g.n / 2 && order % 2 == 1) {
      hat[k] = 0.0;
      continue;
    }
    fft::Complex m = 1.0;
    for (int i = 0; i < order; ++i) m *= ik_unit * kk;
    hat[k] *= m;
  }
  Field out(g);
  fft::inverse(hat, out.values());
  return out;
}

double integrate(const Field& v) {
  double s = 0.0;
  for (double x : v.values()) s += x;
  return s * v.grid().dx();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().dx();
}

double l2_norm(const Field& v) { return std::sqrt(inner(v, v)); }

double h1c_norm(const Field& v, double c) {
  const Field vx = spectral_derivative(v, 1);
  return std::sqrt(inner(vx, vx) + c * inner(v, v));
}

}  // namespace gkdv
