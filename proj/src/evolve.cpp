#include "gkdv/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gkdv/fft.hpp"

namespace gkdv {

namespace {

using Complex = std::complex<double>;
constexpr int kContourPoints = 32;

}  // namespace

void EvolveConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("evolve: dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("evolve: T must be positive");
  if (observer_stride < 1) throw InvalidArgument("evolve: observer_stride must be >= 1");
  if (!(blowup_factor > 1.0)) throw InvalidArgument("evolve: blowup_factor must exceed 1");
  if (sponge && (!(sponge->width > 0.0) || !(sponge->strength >= 0.0) || sponge->stride < 1))
    throw InvalidArgument("evolve: sponge needs positive width and stride, non-negative strength");
  if (sponge && reverse) throw InvalidArgument("evolve: sponge is not time-reversible");
  if (!std::isfinite(frame_velocity)) throw InvalidArgument("evolve: frame_velocity must be finite");
}

bool EvolveConfig::dealias_for(const NonlinearitySpec& spec) const {
  return dealias.value_or(spec.p() >= 3);
}

Conserved conserved_quantities(const Field& u, const NonlinearitySpec& spec) {
  const Field ux = spectral_derivative(u, 1);
  double kin = 0.0;
  double pot = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    mass += u[k] * u[k];
    kin += ux[k] * ux[k];
    pot += spec.F(u[k]);
  }
  const double dx = u.grid().dx();
  return {mass * dx, (0.5 * kin - pot) * dx};
}

Stepper::Stepper(const Grid& grid, const NonlinearitySpec& spec, const EvolveConfig& config)
    : grid_(grid), spec_(spec), sign_(config.reverse ? -1.0 : 1.0), dt_(config.dt) {
  config.validate();
  const std::size_t m = grid_.modes();
  const bool dealias = config.dealias_for(spec_);
  mask_.assign(m, 1.0);
  ik_.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    if (dealias && 3 * k > grid_.n) mask_[k] = 0.0;
    // Odd-order derivatives drop the Nyquist mode.
    if (k != grid_.n / 2) ik_[k] = Complex(0.0, grid_.wavenumber(k));
  }
  set_frame_velocity(config.frame_velocity);
  Nv_.resize(m);
  Na_.resize(m);
  Nb_.resize(m);
  Nc_.resize(m);
  a_.resize(m);
  b_.resize(m);
  c_.resize(m);
  u_.resize(grid_.n);
  gamma_.assign(grid_.n, 0.0);
  if (config.sponge) {
    const double half = grid_.length / 2.0;
    if (config.sponge->width >= half) throw InvalidArgument("evolve: sponge wider than half the cell");
    for (std::size_t k = 0; k < grid_.n; ++k) {
      const double into = config.sponge->width - (half - std::abs(grid_.x(k)));
      if (into > 0.0) {
        const double r = std::sin(0.5 * std::numbers::pi * into / config.sponge->width);
        gamma_[k] = config.sponge->strength * r * r;
      }
    }
  }
}

void Stepper::set_frame_velocity(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("evolve: frame velocity must be finite");
  velocity_ = v;
  const std::size_t m = grid_.modes();
  const double h = dt_;
  E_.resize(m);
  E2_.resize(m);
  Qc_.resize(m);
  f1_.resize(m);
  f2_.resize(m);
  f3_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double kk = grid_.wavenumber(k);
    const bool nyquist = (k == grid_.n / 2);
    const Complex L = nyquist ? Complex(0.0) : Complex(0.0, sign_ * (kk * kk * kk + v * kk));
    const Complex Lh = L * h;
    E_[k] = std::exp(Lh);
    E2_[k] = std::exp(0.5 * Lh);
    Complex q = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    for (int j = 0; j < kContourPoints; ++j) {
      const double th = 2.0 * std::numbers::pi * (j + 0.5) / kContourPoints;
      const Complex z = Lh + std::exp(Complex(0.0, th));
      const Complex ez = std::exp(z);
      const Complex z3 = z * z * z;
      q += (std::exp(0.5 * z) - 1.0) / z;
      a1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      a2 += (2.0 + z + ez * (z - 2.0)) / z3;
      a3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    const double inv = 1.0 / kContourPoints;
    Qc_[k] = h * q * inv;
    f1_[k] = h * a1 * inv;
    f2_[k] = h * a2 * inv;
    f3_[k] = h * a3 * inv;
  }
}

void Stepper::nonlinear(const Cvec& vhat, Cvec& out, bool record_max) {
  fft::inverse(vhat, u_);
  double mx = 0.0;
  for (double& v : u_) {
    if (record_max) mx = std::max(mx, std::abs(v));
    v = spec_.f(v);
  }
  if (record_max) last_max_ = mx;
  fft::forward(u_, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= -sign_ * ik_[k] * mask_[k];
}

std::pair<double, double> Stepper::absorb(Cvec& vhat, double tau) {
  fft::inverse(vhat, u_);
  double left = 0.0;
  double right = 0.0;
  for (std::size_t k = 0; k < u_.size(); ++k) {
    if (gamma_[k] == 0.0) continue;
    const double before = u_[k];
    u_[k] *= std::exp(-gamma_[k] * tau);
    (grid_.x(k) < 0.0 ? left : right) += before * before - u_[k] * u_[k];
  }
  fft::forward(u_, vhat);
  return {left * grid_.dx(), right * grid_.dx()};
}

void Stepper::advance(Cvec& v) {
  const std::size_t m = v.size();
  nonlinear(v, Nv_, true);
  for (std::size_t k = 0; k < m; ++k) a_[k] = E2_[k] * v[k] + Qc_[k] * Nv_[k];
  nonlinear(a_, Na_, false);
  for (std::size_t k = 0; k < m; ++k) b_[k] = E2_[k] * v[k] + Qc_[k] * Na_[k];
  nonlinear(b_, Nb_, false);
  for (std::size_t k = 0; k < m; ++k) c_[k] = E2_[k] * a_[k] + Qc_[k] * (2.0 * Nb_[k] - Nv_[k]);
  nonlinear(c_, Nc_, false);
  for (std::size_t k = 0; k < m; ++k)
    v[k] = E_[k] * v[k] + f1_[k] * Nv_[k] + 2.0 * f2_[k] * (Na_[k] + Nb_[k]) + f3_[k] * Nc_[k];
}

std::vector<Complex> Stepper::to_fourier(const Field& u) const {
  require_same_grid(grid_, u.grid(), "Stepper");
  std::vector<Complex> vhat(grid_.modes());
  fft::forward(u.values(), vhat);
  return vhat;
}

Field Stepper::to_physical(const std::vector<Complex>& vhat) const {
  Field u(grid_);
  fft::inverse(vhat, u.values());
  return u;
}

Field Stepper::step(const Field& u) {
  auto vhat = to_fourier(u);
  advance(vhat);
  return to_physical(vhat);
}

Field step(const Field& u, const NonlinearitySpec& spec, const EvolveConfig& config) {
  Stepper stepper(u.grid(), spec, config);
  return stepper.step(u);
}

Trajectory run(const Field& u0, const NonlinearitySpec& spec, const EvolveConfig& config,
               const std::vector<Observer>& observers, const FrameRule& frame_rule) {
  config.validate();
  if (!u0.all_finite()) throw InvalidArgument("evolve: initial data is not finite");
  Stepper stepper(u0.grid(), spec, config);
  const long nsteps = std::lround(config.T / config.dt);
  if (nsteps < 1) throw InvalidArgument("evolve: T shorter than one step");
  const double bound = config.blowup_factor * std::max(u0.max_abs(), 1e-300);

  Trajectory traj;
  double absorbed = 0.0;
  double absorbed_right = 0.0;
  Frame frame{config.frame_velocity, 0.0};
  auto observe = [&](double t, const Field& u) {
    traj.times.push_back(t);
    Conserved cq = conserved_quantities(u, spec);
    cq.absorbed = absorbed;
    cq.absorbed_right = absorbed_right;
    traj.conserved.push_back(cq);
    traj.frames.push_back(frame);
    if (config.keep_snapshots) traj.snapshots.push_back(u);
    for (const Observer& obs : observers) obs(t, u, frame);
    if (frame_rule) {
      if (const auto v = frame_rule(t, u, frame); v && *v != frame.velocity) {
        stepper.set_frame_velocity(*v);
        frame.velocity = *v;
      }
    }
  };
  observe(0.0, u0);
  auto vhat = stepper.to_fourier(u0);
  for (long s = 1; s <= nsteps; ++s) {
    stepper.advance(vhat);
    frame.offset += frame.velocity * config.dt;
    if (config.sponge && config.sponge->strength > 0.0 && s % config.sponge->stride == 0) {
      const auto [left, right] = stepper.absorb(vhat, config.sponge->stride * config.dt);
      absorbed += left + right;
      absorbed_right += right;
    }
    const double t = static_cast<double>(s) * config.dt;
    const bool at_obs = (s % config.observer_stride == 0) || s == nsteps;
    if (stepper.last_max_abs() > bound || !std::isfinite(stepper.last_max_abs()))
      throw NumericalFailure("evolve: blow-up guard tripped near t = " +
                             std::to_string(t - config.dt));
    if (at_obs) {
      Field u = stepper.to_physical(vhat);
      if (!u.all_finite() || u.max_abs() > bound)
        throw NumericalFailure("evolve: blow-up guard tripped at t = " + std::to_string(t));
      observe(t, u);
    }
  }
  return traj;
}

}  // namespace gkdv
