#include "gkdv/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace gkdv {

namespace {

struct Samples {
  Field s, R, Rx, Rxx, D, Dx;
};

Samples sample(const Grid& grid, const ProfileEvaluator& ev, double rho) {
  Samples out{Field(grid), Field(grid), Field(grid), Field(grid), Field(grid), Field(grid)};
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double s = wrap(grid.x(k) - rho, grid.length);
    const ProfilePoint pt = ev(s);
    out.s[k] = s;
    out.R[k] = pt.Q;
    out.Rx[k] = pt.Qx;
    out.Rxx[k] = pt.Qxx;
    out.D[k] = pt.dQdc;
    out.Dx[k] = pt.dQxdc;
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void validate_params(const std::vector<SolitonParams>& params) {
  if (params.empty() || params.size() > 2)
    throw InvalidArgument("decompose: one or two solitons are supported");
  for (const SolitonParams& sp : params)
    if (!(sp.c > 0.0) || !std::isfinite(sp.c) || !std::isfinite(sp.rho))
      throw InvalidArgument("decompose: invalid soliton parameters");
}

}  // namespace

OrthogonalitySystem orthogonality_system(const Field& u, const NonlinearitySpec& spec,
                                         const std::vector<SolitonParams>& params,
                                         Orthogonality mode) {
  validate_params(params);
  const Grid& grid = u.grid();
  const std::size_t N = params.size();
  std::vector<Samples> S;
  S.reserve(N);
  Field eta = u;
  for (const SolitonParams& sp : params) {
    S.push_back(sample(grid, ProfileEvaluator(spec, sp.c), sp.rho));
    eta -= S.back().R;
  }
  OrthogonalitySystem sys;
  sys.G.assign(2 * N, 0.0);
  sys.J.assign(2 * N, std::vector<double>(2 * N, 0.0));
  const bool moment = (mode == Orthogonality::moment);
  for (std::size_t j = 0; j < N; ++j) {
    const Samples& a = S[j];
    // Second direction Y_j and its parameter derivatives.
    Field Y = moment ? multiply(a.s, a.R) : a.Rx;
    Field dY_dc = moment ? multiply(a.s, a.D) : a.Dx;
    Field dY_drho(grid);
    for (std::size_t k = 0; k < grid.n; ++k)
      dY_drho[k] = moment ? -(a.R[k] + a.s[k] * a.Rx[k]) : -a.Rxx[k];
    sys.G[2 * j] = inner(a.R, eta);
    sys.G[2 * j + 1] = inner(Y, eta);
    for (std::size_t k = 0; k < N; ++k) {
      const Samples& b = S[k];
      // d eta / d c_k = -D_k, d eta / d rho_k = R_k'.
      sys.J[2 * j][2 * k] = -inner(a.R, b.D);
      sys.J[2 * j][2 * k + 1] = inner(a.R, b.Rx);
      sys.J[2 * j + 1][2 * k] = -inner(Y, b.D);
      sys.J[2 * j + 1][2 * k + 1] = inner(Y, b.Rx);
    }
    sys.J[2 * j][2 * j] += inner(a.D, eta);
    sys.J[2 * j][2 * j + 1] -= inner(a.Rx, eta);
    sys.J[2 * j + 1][2 * j] += inner(dY_dc, eta);
    sys.J[2 * j + 1][2 * j + 1] += inner(dY_drho, eta);
  }
  sys.eta = std::move(eta);
  return sys;
}

Field soliton_sum(const Grid& grid, const NonlinearitySpec& spec,
                  const std::vector<SolitonParams>& solitons) {
  Field sum(grid);
  for (const SolitonParams& sp : solitons) {
    const ProfileEvaluator ev(spec, sp.c);
    for (std::size_t k = 0; k < grid.n; ++k) sum[k] += ev(wrap(grid.x(k) - sp.rho, grid.length)).Q;
  }
  return sum;
}

DecompositionState decompose(const Field& u, const NonlinearitySpec& spec,
                             const std::vector<SolitonParams>& guess,
                             const DecomposeOptions& options, double t) {
  validate_params(guess);
  if (!u.all_finite()) throw InvalidArgument("decompose: field is not finite");
  const std::size_t N = guess.size();
  const std::size_t dim = 2 * N;
  const double tol = options.tolerance * std::max(1.0, l2_norm(u));

  std::vector<SolitonParams> params = guess;
  OrthogonalitySystem sys = orthogonality_system(u, spec, params, options.orthogonality);
  double res = max_abs(sys.G);
  int iterations = 0;
  int polish = 0;
  bool converged = res < tol;
  while (true) {
    if (converged) {
      if (polish >= options.polish_steps) break;
    } else if (iterations >= options.max_iterations) {
      std::ostringstream msg;
      msg << "decompose: Newton did not converge in " << options.max_iterations
          << " iterations (residual " << res << ") at t = " << t;
      throw NumericalFailure(msg.str());
    }
    Eigen::MatrixXd J(dim, dim);
    Eigen::VectorXd G(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      G(i) = sys.G[i];
      for (std::size_t k = 0; k < dim; ++k) J(i, k) = sys.J[i][k];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto sv = svd.singularValues();
    if (!(sv(dim - 1) > 1e-13 * sv(0))) {
      std::ostringstream msg;
      msg << "decompose: singular Jacobian at t = " << t;
      throw NumericalFailure(msg.str());
    }
    const Eigen::VectorXd delta = J.fullPivLu().solve(-G);

    double lambda = 1.0;
    bool accepted = false;
    std::vector<SolitonParams> trial = params;
    OrthogonalitySystem trial_sys;
    for (int h = 0; h <= options.max_halvings; ++h, lambda *= 0.5) {
      bool positive = true;
      for (std::size_t j = 0; j < N; ++j) {
        trial[j].c = params[j].c + lambda * delta(2 * j);
        trial[j].rho = params[j].rho + lambda * delta(2 * j + 1);
        positive = positive && trial[j].c > 0.0;
      }
      if (!positive) continue;
      trial_sys = orthogonality_system(u, spec, trial, options.orthogonality);
      if (max_abs(trial_sys.G) < res) {
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) {
      if (converged) break;
      std::ostringstream msg;
      msg << "decompose: residual growth, damping exhausted (residual " << res << ") at t = " << t;
      throw NumericalFailure(msg.str());
    }
    params = trial;
    sys = std::move(trial_sys);
    res = max_abs(sys.G);
    if (converged) ++polish;
    converged = converged || res < tol;
  }

  DecompositionState state;
  state.solitons = params;
  state.eta = std::move(sys.eta);
  state.ortho_residuals = sys.G;
  state.t = t;
  state.iterations = iterations;
  if (N == 2) {
    if (!(params[0].rho > params[1].rho)) {
      std::ostringstream msg;
      msg << "decompose: soliton order lost (rho_1 <= rho_2) at t = " << t;
      throw NumericalFailure(msg.str());
    }
    const double sep = params[0].rho - params[1].rho;
    const double slow = std::min(params[0].c, params[1].c);
    if (sep < 10.0 / std::sqrt(slow)) {
      std::ostringstream msg;
      msg << "separation " << sep << " below 10 decay lengths of the slower soliton";
      state.warnings.push_back(msg.str());
    }
  }
  return state;
}

std::vector<SolitonParams> initial_guess(const Field& u, const NonlinearitySpec& spec,
                                         double amplitude_floor, std::size_t max_count) {
  const Grid& g = u.grid();
  const std::size_t n = g.n;
  const int p = spec.p();
  const double peak1 = std::pow(0.5 * (p + 1), 1.0 / (p - 1));
  std::vector<std::pair<double, double>> peaks;  // (height, position)
  for (std::size_t k = 0; k < n; ++k) {
    const double um = u[(k + n - 1) % n];
    const double u0 = u[k];
    const double up = u[(k + 1) % n];
    if (u0 > amplitude_floor && u0 >= um && u0 > up) {
      // Parabolic refinement of the peak.
      const double den = um - 2.0 * u0 + up;
      const double off = den != 0.0 ? 0.5 * (um - up) / den : 0.0;
      const double height = u0 - 0.25 * (um - up) * off;
      peaks.emplace_back(height, g.x(k) + off * g.dx());
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  if (peaks.size() > max_count) peaks.resize(max_count);
  std::vector<SolitonParams> out;
  for (const auto& [h, x] : peaks) out.push_back({std::pow(h / peak1, p - 1.0), x});
  return out;
}

ModulationTracker::ModulationTracker(const NonlinearitySpec& spec,
                                     std::vector<SolitonParams> initial_guess,
                                     DecomposeOptions options)
    : spec_(spec), guess_(std::move(initial_guess)), options_(options) {
  validate_params(guess_);
  const std::size_t N = guess_.size();
  series_.c.resize(N);
  series_.rho.resize(N);
  series_.delta.resize(N);
  series_.eta_Rp.resize(N);
}

const DecompositionState& ModulationTracker::update(double t, const Field& u,
                                                   double frame_offset) {
  std::vector<std::vector<SolitonParams>> guesses;
  if (!started_) {
    guesses.push_back(guess_);
  } else {
    const double dt = t - t_prev_;
    const double shift = offset_prev_ - frame_offset;
    const std::size_t n = series_.times.size();
    // Linear extrapolation of (c, rho) from the last two samples.
    if (n >= 2) {
      const double h = series_.times[n - 1] - series_.times[n - 2];
      if (h > 0.0) {
        std::vector<SolitonParams> g = last_.solitons;
        bool ok = true;
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double r = dt / h;
          g[j].c += r * (series_.c[j][n - 1] - series_.c[j][n - 2]);
          g[j].rho += shift + r * (series_.rho[j][n - 1] - series_.rho[j][n - 2]);
          ok = ok && g[j].c > 0.0;
        }
        if (ok) guesses.push_back(std::move(g));
      }
    }
    std::vector<SolitonParams> g = last_.solitons;
    for (SolitonParams& sp : g) sp.rho += shift + sp.c * dt;
    guesses.push_back(g);
  }
  std::string failures;
  bool done = false;
  auto attempt = [&](const std::vector<SolitonParams>& g) {
    try {
      last_ = decompose(u, spec_, g, options_, t);
      done = true;
    } catch (const NumericalFailure& e) {
      failures += failures.empty() ? e.what() : std::string("; ") + e.what();
    }
  };
  for (const auto& g : guesses) {
    attempt(g);
    if (done) break;
  }
  if (!done && started_) {
    // Peaks of u nearest to the predicted positions.
    const auto peaks = initial_guess(u, spec_, 1e-3, 16);
    std::vector<SolitonParams> from_peaks = guesses.back();
    bool found = !peaks.empty();
    for (SolitonParams& sp : from_peaks) {
      const SolitonParams* best = nullptr;
      double dist = 0.0;
      for (const SolitonParams& pk : peaks) {
        const double d = std::abs(wrap(pk.rho - sp.rho, u.grid().length));
        if (!best || d < dist) {
          best = &pk;
          dist = d;
        }
      }
      if (best && dist < 10.0 / std::sqrt(sp.c)) {
        sp.rho += wrap(best->rho - sp.rho, u.grid().length);
        sp.c = best->c;
      } else {
        found = false;
      }
    }
    if (found) attempt(from_peaks);
  }
  if (!done) {
    std::ostringstream msg;
    msg << "tracking failed at t = " << t << ": " << failures;
    throw NumericalFailure(msg.str());
  }
  started_ = true;
  t_prev_ = t;
  offset_prev_ = frame_offset;

  const double q2 = 2.0 * spec_.q();
  const Field eta_x = spectral_derivative(last_.eta, 1);
  const double e2 = inner(last_.eta, last_.eta);
  const double ex2 = inner(eta_x, eta_x);
  double cmin = last_.solitons[0].c;
  series_.times.push_back(t);
  for (std::size_t j = 0; j < last_.solitons.size(); ++j) {
    const SolitonParams& sp = last_.solitons[j];
    cmin = std::min(cmin, sp.c);
    series_.c[j].push_back(sp.c);
    series_.rho[j].push_back(sp.rho + frame_offset);
    series_.delta[j].push_back(series_.c[j].size() == 1
                                   ? 0.0
                                   : std::pow(sp.c, q2) / std::pow(series_.c[j][0], q2) - 1.0);
    const ProfileEvaluator ev(spec_, sp.c);
    const Grid& g = u.grid();
    double acc = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
      const double R = ev(wrap(g.x(k) - sp.rho, g.length)).Q;
      double Rp = R;
      for (int i = 1; i < spec_.p(); ++i) Rp *= R;
      acc += last_.eta[k] * Rp;
    }
    series_.eta_Rp[j].push_back(acc * g.dx());
  }
  series_.eta_l2.push_back(std::sqrt(e2));
  series_.eta_h1.push_back(std::sqrt(ex2 + e2));
  series_.eta_h1c.push_back(std::sqrt(ex2 + cmin * e2));
  return last_;
}

ModulationSeries track(const Trajectory& traj, const NonlinearitySpec& spec,
                       const std::vector<SolitonParams>& initial_guess,
                       const DecomposeOptions& options,
                       std::vector<DecompositionState>* states) {
  if (traj.snapshots.size() != traj.times.size() || traj.times.empty())
    throw InvalidArgument("track: trajectory has no snapshots");
  ModulationTracker tracker(spec, initial_guess, options);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double offset = i < traj.frames.size() ? traj.frames[i].offset : 0.0;
    const DecompositionState& st = tracker.update(traj.times[i], traj.snapshots[i], offset);
    if (states) states->push_back(st);
  }
  return tracker.series();
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 3 || y.size() != n) throw InvalidArgument("time_derivative: need at least 3 samples");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i] +
           h1 / (h2 * (h1 + h2)) * y[i + 1];
  }
  {
    const double h1 = t[1] - t[0];
    const double h2 = t[2] - t[1];
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1] -
           h1 / (h2 * (h1 + h2)) * y[2];
  }
  {
    const double h1 = t[n - 2] - t[n - 3];
    const double h2 = t[n - 1] - t[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * y[n - 3] - (h1 + h2) / (h1 * h2) * y[n - 2] +
               (2.0 * h2 + h1) / (h2 * (h1 + h2)) * y[n - 1];
  }
  return d;
}

ModulationRates modulation_rates(const ModulationSeries& series, const NonlinearitySpec& spec) {
  if (series.size() < 3) throw InvalidArgument("modulation_rates: series shorter than 3 samples");
  const int p = spec.p();
  const double m0 = base_mass(p);
  const double q2 = 2.0 * spec.q();
  ModulationRates r;
  r.times = series.times;
  for (std::size_t j = 0; j < series.solitons(); ++j) {
    r.cdot.push_back(time_derivative(series.times, series.c[j]));
    std::vector<double> rd = time_derivative(series.times, series.rho[j]);
    std::vector<double> lead(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      rd[i] -= series.c[j][i];
      lead[i] = 2.0 * (p - 3) * series.eta_Rp[j][i] / (std::pow(series.c[j][i], q2) * m0);
    }
    r.rho_residual.push_back(std::move(rd));
    r.leading.push_back(std::move(lead));
  }
  return r;
}

}  // namespace gkdv
