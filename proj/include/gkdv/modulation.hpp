#pragma once

#include <string>
#include <vector>

#include "gkdv/evolve.hpp"
#include "gkdv/model.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

/// moment: int R_j eta = int (x - rho_j) R_j eta = 0.
/// derivative: int R_j eta = int R_j' eta = 0.
enum class Orthogonality { moment, derivative };

struct DecomposeOptions {
  Orthogonality orthogonality = Orthogonality::moment;
  int max_iterations = 50;
  int max_halvings = 8;
  /// Converged once max|G| < tolerance * max(1, |u|_{L2}).
  double tolerance = 1e-12;
  /// Extra Newton steps taken after convergence while |G| keeps dropping.
  int polish_steps = 3;
};

/// u = sum_j R_j + eta with R_j = Q_{c_j}(x - rho_j). Positions are kept
/// unwrapped; profiles are evaluated at the nearest periodic image.
struct DecompositionState {
  std::vector<SolitonParams> solitons;
  Field eta;
  std::vector<double> ortho_residuals;
  double t = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Residual vector G (two entries per soliton) and its analytic Jacobian,
/// ordered (c_1, rho_1, c_2, rho_2, ...).
struct OrthogonalitySystem {
  std::vector<double> G;
  std::vector<std::vector<double>> J;
  Field eta;
};

OrthogonalitySystem orthogonality_system(const Field& u, const NonlinearitySpec& spec,
                                         const std::vector<SolitonParams>& params,
                                         Orthogonality mode = Orthogonality::moment);

/// Damped Newton solve of G = 0 started from the guess. Throws
/// NumericalFailure on divergence or a singular Jacobian.
DecompositionState decompose(const Field& u, const NonlinearitySpec& spec,
                             const std::vector<SolitonParams>& guess,
                             const DecomposeOptions& options = {}, double t = 0.0);

/// Sum of the soliton profiles on the grid.
Field soliton_sum(const Grid& grid, const NonlinearitySpec& spec,
                  const std::vector<SolitonParams>& solitons);

/// Local maxima of u above the floor, strongest first, at most max_count,
/// with c from the power-law peak height c = (u_peak / Q(0))^{p-1}.
std::vector<SolitonParams> initial_guess(const Field& u, const NonlinearitySpec& spec,
                                         double amplitude_floor, std::size_t max_count);

struct ModulationSeries {
  std::vector<double> times;
  /// c[j][i], rho[j][i] for soliton j at times[i].
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> rho;
  std::vector<double> eta_l2;
  std::vector<double> eta_h1;
  /// H^1_c norm with c the smallest c_j at that time.
  std::vector<double> eta_h1c;
  /// Delta_j = c_j^{2q}(t) / c_j^{2q}(0) - 1.
  std::vector<std::vector<double>> delta;
  /// int eta R_j^p, used by the leading-order rate.
  std::vector<std::vector<double>> eta_Rp;

  std::size_t size() const { return times.size(); }
  std::size_t solitons() const { return c.size(); }
};

/// Streaming continuation along a trajectory. Each solve starts from the
/// previous parameters extrapolated in time, falling back to rho_j + c_j dt
/// and then to the nearest peaks of u. Fields may live in a moving frame:
/// states keep frame positions, the series records lab positions
/// rho + frame_offset.
class ModulationTracker {
 public:
  ModulationTracker(const NonlinearitySpec& spec, std::vector<SolitonParams> initial_guess,
                    DecomposeOptions options = {});

  /// The initial guess is in frame coordinates of the first update.
  const DecompositionState& update(double t, const Field& u, double frame_offset = 0.0);
  const DecompositionState& last() const { return last_; }
  const ModulationSeries& series() const { return series_; }
  const NonlinearitySpec& spec() const { return spec_; }

 private:
  NonlinearitySpec spec_;
  std::vector<SolitonParams> guess_;
  DecomposeOptions options_;
  DecompositionState last_;
  bool started_ = false;
  double t_prev_ = 0.0;
  double offset_prev_ = 0.0;
  ModulationSeries series_;
};

/// Tracks every snapshot of the trajectory (using its frame offsets);
/// states are appended when given.
ModulationSeries track(const Trajectory& traj, const NonlinearitySpec& spec,
                       const std::vector<SolitonParams>& initial_guess,
                       const DecomposeOptions& options = {},
                       std::vector<DecompositionState>* states = nullptr);

struct ModulationRates {
  std::vector<double> times;
  std::vector<std::vector<double>> cdot;
  /// rho_j' - c_j.
  std::vector<std::vector<double>> rho_residual;
  /// 2(p-3) int eta R_j^p / (c_j^{2q} int Q^2).
  std::vector<std::vector<double>> leading;
};

/// Centered differences in the interior, second-order one-sided at the ends.
ModulationRates modulation_rates(const ModulationSeries& series, const NonlinearitySpec& spec);

/// Second-order finite-difference derivative of samples y(t) on a
/// nonuniform grid.
std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace gkdv
