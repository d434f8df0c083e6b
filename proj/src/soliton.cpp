#include "gkdv/soliton.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "first_integral.hpp"

namespace gkdv {

namespace {

constexpr double kTailBound = 1e-13;
constexpr double kDcRelative = 1e-4;

// Closed form Q_c for f = u^p, with Q' = -Q tanh(beta y) and
// Q'' = Q (1 - (1 + beta) sech^2(beta y)) in the unit-speed variable y.
// Points with Q_c below 1e-40 of its peak return zero; this skips the far
// field and keeps products of profiles out of the subnormal range.
PowerConstants power_constants(int p, double c) {
  const double a = 1.0 / (p - 1);
  return {p, c, 2.0 * a, 0.5 * (p - 1), std::pow(0.5 * (p + 1), a), std::sqrt(c), std::pow(c, a)};
}

ProfilePoint power_point(const PowerConstants& k, double s) {
  const double y = k.sc * s;
  const double b = k.beta * std::abs(y);
  ProfilePoint r;
  if (k.two_a * b > 92.0) return r;
  const double e = std::exp(-b);
  double sech, tanh_abs;
  if (b > 20.0) {
    sech = 2.0 * e;
    tanh_abs = 1.0;
  } else {
    const double e2 = e * e;
    sech = 2.0 * e / (1.0 + e2);
    tanh_abs = (1.0 - e2) / (1.0 + e2);
  }
  const double tanh = y >= 0.0 ? tanh_abs : -tanh_abs;
  const double sech2 = sech * sech;
  double root;  // sech^{2/(p-1)}
  switch (k.p) {
    case 2:
      root = sech2;
      break;
    case 3:
      root = sech;
      break;
    case 4:
      root = std::cbrt(sech2);
      break;
    default:
      root = std::pow(sech, k.two_a);
  }
  const double base = k.amp * root;
  const double c = k.c;
  r.Q = k.ca * base;
  r.Qx = -k.ca * k.sc * base * tanh;
  r.Qxx = k.ca * c * base * (1.0 - (1.0 + k.beta) * sech2);
  r.dQdc = (k.two_a * r.Q + s * r.Qx) / (2.0 * c);
  r.dQxdc = ((k.two_a + 1.0) * r.Qx + s * r.Qxx) / (2.0 * c);
  return r;
}

void require_tail(const ProfileEvaluator& ev, const Grid& grid) {
  const double edge = ev(0.5 * grid.length).Q;
  if (!(std::abs(edge) < kTailBound)) {
    std::ostringstream msg;
    msg << "box too small for the requested speed: profile tail " << edge << " at the box edge";
    throw InvalidArgument(msg.str());
  }
}

ProfileFamily sample_family(const ProfileEvaluator& ev, const SolitonParams& params,
                            const Grid& grid) {
  const int p = ev.spec().p();
  const double a2 = 2.0 / (p - 1);
  ProfileFamily fam;
  fam.params = params;
  fam.spec = ev.spec();
  fam.Q = Field(grid);
  fam.Qx = Field(grid);
  fam.Qxx = Field(grid);
  fam.LambdaQ = Field(grid);
  fam.LambdaLambdaQ = Field(grid);
  fam.dQdc = Field(grid);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double s = wrap(grid.x(k) - params.rho, grid.length);
    const ProfilePoint pt = ev(s);
    fam.Q[k] = pt.Q;
    fam.Qx[k] = pt.Qx;
    fam.Qxx[k] = pt.Qxx;
    fam.dQdc[k] = pt.dQdc;
    fam.LambdaQ[k] = a2 * pt.Q + s * pt.Qx;
    fam.LambdaLambdaQ[k] = a2 * a2 * pt.Q + (2.0 * a2 + 1.0) * s * pt.Qx + s * s * pt.Qxx;
  }
  return fam;
}

}  // namespace

ProfileEvaluator::ProfileEvaluator(const NonlinearitySpec& spec, double c) : spec_(spec), c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("soliton speed c must be positive");
  if (spec_.pure_power()) {
    power_ = power_constants(spec_.p(), c_);
    peak_ = power_point(power_, 0.0).Q;
    return;
  }
  table_ = std::make_shared<const FirstIntegralProfile>(spec_, c_);
  dc_ = kDcRelative * c_;
  table_minus_ = std::make_shared<const FirstIntegralProfile>(spec_, c_ - dc_);
  table_plus_ = std::make_shared<const FirstIntegralProfile>(spec_, c_ + dc_);
  peak_ = table_->peak();
}

ProfilePoint ProfileEvaluator::operator()(double s) const {
  if (!table_) return power_point(power_, s);
  const auto v = (*table_)(s);
  const auto vm = (*table_minus_)(s);
  const auto vp = (*table_plus_)(s);
  ProfilePoint r;
  r.Q = v.Q;
  r.Qx = v.Qx;
  r.Qxx = c_ * v.Q - spec_.f(v.Q);
  r.dQdc = (vp.Q - vm.Q) / (2.0 * dc_);
  r.dQxdc = (vp.Qx - vm.Qx) / (2.0 * dc_);
  return r;
}

double ProfileEvaluator::mass() const {
  if (!table_) return std::pow(c_, 2.0 * spec_.q()) * base_mass(spec_.p());
  return table_->mass();
}

Field offsets(const Grid& grid, double rho) {
  return Field::from_function(grid, [&](double x) { return wrap(x - rho, grid.length); });
}

ProfileFamily power_profile(int p, const SolitonParams& params, const Grid& grid) {
  const ProfileEvaluator ev(NonlinearitySpec(p), params.c);
  require_tail(ev, grid);
  return sample_family(ev, params, grid);
}

ProfileFamily general_profile(const NonlinearitySpec& spec, const SolitonParams& params,
                              const Grid& grid) {
  if (!(params.c > 0.0)) throw InvalidArgument("soliton speed c must be positive");
  // Pure powers are routed through the first integral as well, so this
  // constructor stays independent of the closed form.
  auto table = std::make_shared<const FirstIntegralProfile>(spec, params.c);
  if (spec.pure_power()) {
    const double h = kDcRelative * params.c;
    const FirstIntegralProfile minus(spec, params.c - h);
    const FirstIntegralProfile plus(spec, params.c + h);
    const int p = spec.p();
    const double a2 = 2.0 / (p - 1);
    ProfileFamily fam;
    fam.params = params;
    fam.spec = spec;
    fam.Q = Field(grid);
    fam.Qx = Field(grid);
    fam.Qxx = Field(grid);
    fam.LambdaQ = Field(grid);
    fam.LambdaLambdaQ = Field(grid);
    fam.dQdc = Field(grid);
    if (!(std::abs((*table)(0.5 * grid.length).Q) < kTailBound))
      throw InvalidArgument("box too small for the requested speed");
    for (std::size_t k = 0; k < grid.n; ++k) {
      const double s = wrap(grid.x(k) - params.rho, grid.length);
      const auto v = (*table)(s);
      const double qxx = params.c * v.Q - spec.f(v.Q);
      fam.Q[k] = v.Q;
      fam.Qx[k] = v.Qx;
      fam.Qxx[k] = qxx;
      fam.dQdc[k] = (plus(s).Q - minus(s).Q) / (2.0 * h);
      fam.LambdaQ[k] = a2 * v.Q + s * v.Qx;
      fam.LambdaLambdaQ[k] = a2 * a2 * v.Q + (2.0 * a2 + 1.0) * s * v.Qx + s * s * qxx;
    }
    return fam;
  }
  const ProfileEvaluator ev(spec, params.c);
  require_tail(ev, grid);
  return sample_family(ev, params, grid);
}

ProfileFamily make_profile(const NonlinearitySpec& spec, const SolitonParams& params,
                           const Grid& grid) {
  if (spec.pure_power()) return power_profile(spec.p(), params, grid);
  return general_profile(spec, params, grid);
}

double base_mass(int p) {
  if (p < 2 || p > 4) throw InvalidArgument("p must be 2, 3 or 4");
  static const std::array<double, 3> cache = [] {
    std::array<double, 3> out{};
    for (int pp = 2; pp <= 4; ++pp) {
      const double h = 0.01;
      const int half = 8000;
      double s = 0.0;
      for (int k = -half; k <= half; ++k) {
        const double q = power_point(power_constants(pp, 1.0), k * h).Q;
        s += q * q;
      }
      out[pp - 2] = s * h;
    }
    return out;
  }();
  return cache[p - 2];
}

SolitonInvariants soliton_invariants(int p, double c) {
  if (!(c > 0.0)) throw InvalidArgument("soliton speed c must be positive");
  const double m0 = base_mass(p);
  const double q = 1.0 / (p - 1) - 0.25;
  const double c2q = std::pow(c, 2.0 * q);
  const double c2q1 = c2q * c;
  SolitonInvariants r;
  r.massQ = c2q * m0;
  r.energyQ = -(5.0 - p) / (2.0 * (p + 3)) * c2q1 * m0;
  r.intQp1 = 2.0 * (p + 1) / (p + 3) * c2q1 * m0;
  r.intQx2 = (p - 1.0) / (p + 3) * c2q1 * m0;
  return r;
}

Field apply_linearized(const ProfileFamily& family, const Field& v) {
  require_same_grid(family.Q.grid(), v.grid(), "apply_linearized");
  const Field vxx = spectral_derivative(v, 2);
  const double c = family.params.c;
  Field out(v.grid());
  for (std::size_t k = 0; k < v.size(); ++k)
    out[k] = -vxx[k] + c * v[k] - family.spec.f_prime(family.Q[k]) * v[k];
  return out;
}

StabilityIndex stability_index(const NonlinearitySpec& spec, double c) {
  if (!(c > 0.0)) throw InvalidArgument("soliton speed c must be positive");
  const double h = 1e-3 * c;
  const double m_minus = FirstIntegralProfile(spec, c - h).mass();
  const double m_plus = FirstIntegralProfile(spec, c + h).mass();
  StabilityIndex r;
  r.value = (m_plus - m_minus) / (2.0 * h);
  if (spec.pure_power()) {
    const double q = spec.q();
    r.closed_form = 2.0 * q * std::pow(c, 2.0 * q - 1.0) * base_mass(spec.p());
  } else {
    r.closed_form = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double existence_threshold(const NonlinearitySpec& spec) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (spec.pure_power()) return kInf;
  auto exists = [&](double c) {
    try {
      FirstIntegralProfile::turning_point(spec, c);
      return true;
    } catch (const NumericalFailure&) {
      return false;
    }
  };
  double lo = 1e-3;
  while (!exists(lo)) {
    lo *= 0.5;
    if (lo < 1e-12) return 0.0;
  }
  double hi = lo;
  while (exists(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (exists(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace gkdv
