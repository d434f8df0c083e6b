#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gkdv/model.hpp"

namespace gkdv {

/// Absorbing layer u_t = -gamma(x) u, split off and applied exactly as
/// u *= exp(-gamma tau) every stride steps. gamma vanishes outside the band
/// of the given width on each side of the cell edge x = +-L/2 and rises to
/// strength as sin^2 of the distance into the band.
struct Sponge {
  double width = 0.0;
  double strength = 0.0;
  int stride = 10;
};

struct EvolveConfig {
  double dt = 1e-3;
  double T = 1.0;
  /// 2/3-rule mask on f(u); defaults to on for p in {3,4}.
  std::optional<bool> dealias;
  int observer_stride = 1;
  /// Abort once max|u| exceeds this multiple of the initial max|u|.
  double blowup_factor = 10.0;
  /// Integrate u_t = u_xxx + f(u)_x, the time-reversed flow.
  bool reverse = false;
  bool keep_snapshots = true;
  std::optional<Sponge> sponge;
  /// Initial velocity v of the computational frame. Fields live in the
  /// frame coordinate x - X(t) with X' = v; solitons moving near v are
  /// almost stationary there, where the exponential integrator is exact.
  double frame_velocity = 0.0;

  void validate() const;
  bool dealias_for(const NonlinearitySpec& spec) const;
};

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
  /// Mass removed by the sponge since t = 0 (zero without a sponge).
  double absorbed = 0.0;
  /// The part removed in the band below the right cell edge.
  double absorbed_right = 0.0;
};

/// mass = int u^2, energy = 1/2 int u_x^2 - int F(u).
Conserved conserved_quantities(const Field& u, const NonlinearitySpec& spec);

/// Lab position = frame position + offset.
struct Frame {
  double velocity = 0.0;
  double offset = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<Conserved> conserved;
  std::vector<Frame> frames;
};

/// Read-only observer called at t = 0 and every observer_stride steps.
using Observer = std::function<void(double t, const Field& u, const Frame& frame)>;

/// Called after the observers; a returned velocity replaces the frame
/// velocity from the next step on.
using FrameRule = std::function<std::optional<double>(double t, const Field& u, const Frame& frame)>;

/// Fourth-order exponential time differencing Runge-Kutta scheme for
/// u_t + (u_xx + f(u))_x = 0. The dispersive part is the exact multiplier
/// exp(i k^3 dt); phi-function coefficients are contour averages.
class Stepper {
 public:
  Stepper(const Grid& grid, const NonlinearitySpec& spec, const EvolveConfig& config);

  const Grid& grid() const { return grid_; }
  /// Advances the Fourier coefficients by one dt in place.
  void advance(std::vector<std::complex<double>>& vhat);
  /// Physical-space convenience wrapper around advance.
  Field step(const Field& u);

  std::vector<std::complex<double>> to_fourier(const Field& u) const;
  Field to_physical(const std::vector<std::complex<double>>& vhat) const;

  /// Largest |u| seen in the most recent nonlinear evaluation at stage one.
  double last_max_abs() const { return last_max_; }
  /// Sponge coefficient on the grid (all zeros without a sponge).
  const std::vector<double>& sponge_profile() const { return gamma_; }
  /// Applies exp(-gamma tau) in physical space; returns the mass removed
  /// in the left and right bands.
  std::pair<double, double> absorb(std::vector<std::complex<double>>& vhat, double tau);

  double frame_velocity() const { return velocity_; }
  /// Rebuilds the exponential coefficients for a new frame velocity.
  void set_frame_velocity(double v);

 private:
  using Cvec = std::vector<std::complex<double>>;
  void nonlinear(const Cvec& vhat, Cvec& out, bool record_max);

  Grid grid_;
  NonlinearitySpec spec_;
  double sign_;
  double dt_;
  double velocity_ = 0.0;
  std::vector<double> mask_;
  Cvec ik_;
  Cvec E_, E2_, Qc_, f1_, f2_, f3_;
  Cvec Nv_, Na_, Nb_, Nc_, a_, b_, c_;
  std::vector<double> u_;
  std::vector<double> gamma_;
  double last_max_ = 0.0;
};

/// One step of the scheme from physical data.
Field step(const Field& u, const NonlinearitySpec& spec, const EvolveConfig& config);

/// round(T/dt) steps; snapshots and conserved pair at t = 0 and every stride.
/// Mass plus absorbed mass is the conserved quantity when a sponge is set.
Trajectory run(const Field& u0, const NonlinearitySpec& spec, const EvolveConfig& config,
               const std::vector<Observer>& observers = {}, const FrameRule& frame_rule = {});

}  // namespace gkdv
