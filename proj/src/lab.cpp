#include "gkdv/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "gkdv/weights.hpp"

namespace gkdv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soliton_mass(const NonlinearitySpec& spec, double c) {
  return ProfileEvaluator(spec, c).mass();
}

bool requested(const ScenarioConfig& cfg, const char* monitor) {
  return std::find(cfg.monitors.begin(), cfg.monitors.end(), monitor) != cfg.monitors.end();
}

/// Samples of a series with t in [lo, hi].
std::vector<double> window(const std::vector<double>& t, const std::vector<double>& y, double lo,
                           double hi) {
  std::vector<double> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) out.push_back(y[i]);
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

std::string check_name(MonotoneCheck c) {
  switch (c) {
    case MonotoneCheck::stepwise:
      return "stepwise";
    case MonotoneCheck::anchored:
      return "anchored";
    case MonotoneCheck::cumulative:
      return "cumulative";
  }
  return "";
}

Json report_json(const MonotonicityReport& r, MonotoneCheck check, double constant,
                 double minimal) {
  Json j;
  j["channel"] = r.channel;
  j["direction"] = r.direction;
  j["check"] = check_name(check);
  j["floor"] = r.bound;
  j["slack_constant"] = constant;
  j["max_violation"] = r.max_violation;
  j["worst_time"] = r.worst_time;
  j["minimal_constant"] = minimal;
  j["pass"] = r.pass;
  return j;
}

/// Observer state of one run: decomposition, channels, frame schedule and
/// the optional baseline record or replay.
class Recorder {
 public:
  Recorder(const ScenarioConfig& cfg, const RunOptions& opts)
      : cfg_(cfg),
        opts_(opts),
        tracker_(cfg.spec, cfg.solitons, DecomposeOptions{cfg.orthogonality}),
        two_(cfg.solitons.size() == 2),
        expansion_(requested(cfg, "expansion")) {
    if (opts_.record_baseline) {
      if (opts_.residual_stride < 1) throw InvalidArgument("run: residual_stride must be >= 1");
      record_.emplace();
      record_->residual_stride = opts_.residual_stride;
    }
  }

  void observe(double t, const Field& u, const Frame& frame) {
    const DecompositionState& st = tracker_.update(t, u, frame.offset);
    const ModulationSeries& ms = tracker_.series();
    const std::size_t idx = ms.size() - 1;
    if (idx == 0) {
      base_ = st;
      c1_0_ = st.solitons[0].c;
      c2_0_ = two_ ? st.solitons[1].c : c1_0_;
      Tc_ = decoupling_time(two_ ? c2_0_ / c1_0_ : 1.0);
    }
    const double c = c2_0_;
    const double m = midpoint(st);
    const double I = localized_mass(u, m);
    const EtaNorms nn = eta_norms(st, c, m);
    std::vector<std::pair<std::string, double>> ch;
    ch.reserve(48);
    ch.emplace_back("frame_velocity", frame.velocity);
    ch.emplace_back("frame_offset", frame.offset);
    ch.emplace_back("tube", ms.eta_h1c.back());
    ch.emplace_back("I", I);
    ch.emplace_back("g", nn.g);
    ch.emplace_back("g1", nn.g1);
    ch.emplace_back("gt1", nn.gt1);
    if (two_) {
      ch.emplace_back("g2", nn.g2);
      ch.emplace_back("gt2", nn.gt2);
    }

    const SolitonParams& s1 = st.solitons[0];
    const double mass1 = soliton_mass(cfg_.spec, s1.c);
    const double en1 = soliton_energy(u.grid(), cfg_.spec, s1);
    const double kappa = cfg_.options.combination;
    const LocalizedPair w1 = monotonicity_quantities(
        st, cfg_.spec, MonotonicityWindow{0.0, 0.0, 0.5, c}, WindowSide::right_of_rho1);
    const double C1 = mass1 + w1.M;
    ch.emplace_back("M1", w1.M);
    ch.emplace_back("E1", w1.E);
    ch.emplace_back("C1", C1);
    ch.emplace_back("C2", 2.0 * en1 + 2.0 * w1.E + kappa * C1);
    if (two_) {
      const SolitonParams& s2 = st.solitons[1];
      const double mass2 = soliton_mass(cfg_.spec, s2.c);
      const double en2 = soliton_energy(u.grid(), cfg_.spec, s2);
      const LocalizedPair w2 = monotonicity_quantities(
          st, cfg_.spec, MonotonicityWindow{0.0, 0.0, 0.5 * c, c}, WindowSide::right_of_rho2);
      const double C3 = mass1 + mass2 + w2.M;
      ch.emplace_back("M2", w2.M);
      ch.emplace_back("E2", w2.E);
      ch.emplace_back("C3", C3);
      ch.emplace_back("C4", 2.0 * (en1 + en2) + 2.0 * w2.E + c * kappa * C3);
    }

    const VirialValues vir = virial_functional(st, cfg_.spec, cfg_.options.virial_A);
    const std::vector<double> J = l1_functional(st, cfg_.spec);
    for (std::size_t j = 0; j < st.solitons.size(); ++j) {
      const std::string k = std::to_string(j + 1);
      ch.emplace_back("K" + k, vir.K[j]);
      ch.emplace_back("N" + k, vir.N[j]);
      ch.emplace_back("Hstar" + k, vir.Hstar[j]);
      ch.emplace_back("J" + k, J[j]);
      ch.emplace_back("Delta" + k, ms.delta[j].back());
    }
    ch.emplace_back("H", quadratic_form_H(st, cfg_.spec, c1_0_, c2_0_, m));
    ch.emplace_back("F_weinstein", weinstein_functional(u, I, c1_0_, c2_0_, cfg_.spec));
    ch.emplace_back("halfline_x2_mass", halfline_x2_mass(u, s1.rho));
    if (two_) ch.emplace_back("separation", ms.rho[0].back() - ms.rho[1].back());
    if (expansion_) {
      const ExpansionResiduals ex = expansion_audit(st, base_, cfg_.spec);
      double inter = 0.0;
      if (two_) {
        const ProfileFamily a = make_profile(cfg_.spec, st.solitons[0], u.grid());
        const ProfileFamily b = make_profile(cfg_.spec, st.solitons[1], u.grid());
        inter = 2.0 * inner(a.Q, b.Q);
      }
      ch.emplace_back("dd1", ex.dd1);
      ch.emplace_back("dd2", ex.dd2);
      ch.emplace_back("dd3", ex.dd3);
      for (std::size_t j = 0; j < ex.dd5.size(); ++j)
        ch.emplace_back("dd5_" + std::to_string(j + 1), ex.dd5[j]);
      ch.emplace_back("interaction", inter);
    }
    series_.append(t, ch);

    const int stride = opts_.baseline ? opts_.baseline->residual_stride : opts_.residual_stride;
    if (record_ && idx % stride == 0)
      record_->eta.emplace_back(st.eta.data().begin(), st.eta.data().end());
    if (opts_.baseline) {
      const BaselineRecord& b = *opts_.baseline;
      if (idx >= b.times.size() || b.times[idx] != t)
        throw InvalidArgument("run: baseline observation schedule does not match at t = " +
                              format_number(t));
      if (idx % stride == 0 && idx / stride < b.eta.size()) {
        const std::vector<float>& e0 = b.eta[idx / stride];
        Field d = st.eta;
        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= static_cast<double>(e0[k]);
        response_t_.push_back(t);
        response_.push_back(h1c_norm(d, c));
      }
    }
  }

  std::optional<double> frame_rule(double t, const Frame& frame) {
    std::optional<double> next;
    if (opts_.baseline) {
      const std::size_t idx = tracker_.series().size() - 1;
      if (idx >= opts_.baseline->velocities.size())
        throw InvalidArgument("run: baseline frame schedule too short at t = " + format_number(t));
      next = opts_.baseline->velocities[idx];
    } else if (cfg_.frame.mode == FramePolicy::Mode::track) {
      const double v = tracker_.last().solitons[0].c;
      if (std::abs(v - frame.velocity) > cfg_.frame.threshold) next = v;
    }
    if (record_) {
      record_->times.push_back(t);
      record_->velocities.push_back(next.value_or(frame.velocity));
    }
    return next;
  }

  const ScenarioConfig& cfg_;
  const RunOptions& opts_;
  ModulationTracker tracker_;
  bool two_;
  bool expansion_;
  FunctionalSeries series_;
  DecompositionState base_;
  double c1_0_ = 1.0;
  double c2_0_ = 1.0;
  double Tc_ = 1.0;
  std::optional<BaselineRecord> record_;
  std::vector<double> response_t_;
  std::vector<double> response_;
};

struct Context {
  const ScenarioConfig& cfg;
  const Recorder& rec;
  RunArtifact& art;
  const std::vector<double>& t;
};

void add_verdict(RunArtifact& art, const std::string& name, bool pass, std::string detail) {
  art.verdicts.push_back({name, pass, std::move(detail)});
}

void monitor_conservation(Context& cx) {
  const FunctionalSeries& fs = cx.art.functionals;
  const auto& mass = fs.channel("mass");
  const auto& absorbed = fs.channel("absorbed");
  const auto& energy = fs.channel("energy");
  double defect = 0.0;
  double edrift = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    defect = std::max(defect, std::abs(mass[i] + absorbed[i] - mass[0]) / mass[0]);
    edrift = std::max(edrift, std::abs(energy[i] - energy[0]) / std::max(std::abs(energy[0]), 1e-300));
  }
  if (!std::isfinite(defect)) defect = kInf;
  const bool sponge = cx.cfg.evolve.sponge.has_value();
  const double tol = cx.cfg.options.conservation_tolerance;
  const bool pass = defect <= tol && (sponge || edrift <= tol);
  cx.art.summary["conservation"] = {{"mass_defect", defect},
                                    {"energy_drift", edrift},
                                    {"energy_checked", !sponge},
                                    {"tolerance", tol}};
  add_verdict(cx.art, "conservation", pass,
              "mass defect " + format_number(defect) +
                  (sponge ? "" : ", energy drift " + format_number(edrift)));
}

struct SupSplit {
  double sup = 0.0;
  double early = 0.0;
  double late = 0.0;
  bool finite = true;
};

SupSplit split_sup(const std::vector<double>& t, const std::vector<double>& y, double T) {
  SupSplit s;
  s.early = -kInf;
  s.late = -kInf;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(y[i])) s.finite = false;
    (t[i] <= 0.75 * T ? s.early : s.late) = std::max(t[i] <= 0.75 * T ? s.early : s.late, y[i]);
  }
  s.sup = std::max(s.early, s.late);
  return s;
}

Json sup_json(const SupSplit& s, double scale) {
  return {{"sup", s.sup},
          {"sup_before_final_quarter", s.early},
          {"sup_final_quarter", s.late},
          {"finite", s.finite},
          {"non_escaping", s.late <= s.early},
          {"normalized", scale > 0.0 ? s.sup / scale : std::nan("")}};
}

void monitor_tube(Context& cx, double scale) {
  const double T = cx.t.back();
  const SupSplit tube = split_sup(cx.t, cx.art.functionals.channel("tube"), T);
  cx.art.summary["tube"] = sup_json(tube, scale);
  bool pass = tube.finite && tube.sup < kInf;
  std::string detail = "sup " + format_number(tube.sup);
  if (!cx.rec.response_.empty()) {
    const SupSplit resp = split_sup(cx.rec.response_t_, cx.rec.response_, T);
    pass = pass && resp.finite && resp.late <= resp.early;
    detail += ", response sup " + format_number(resp.sup) + " (final quarter " +
              format_number(resp.late) + ")";
  } else {
    pass = pass && tube.late <= tube.early;
    detail += " (final quarter " + format_number(tube.late) + ")";
  }
  add_verdict(cx.art, "tube", pass, detail);
}

void monitor_separation(Context& cx) {
  const auto& sep = cx.art.functionals.channel("separation");
  double margin = kInf;
  double at = 0.0;
  for (std::size_t i = 0; i < sep.size(); ++i) {
    const double m = sep[i] - (0.5 * cx.t[i] + 0.25 * cx.rec.Tc_);
    if (!(m >= margin)) {
      margin = m;
      at = cx.t[i];
    }
  }
  add_verdict(cx.art, "separation", margin >= 0.0,
              "min margin " + format_number(margin) + " at t = " + format_number(at));
}

/// The monotone floor is relative to the channel's magnitude once that
/// exceeds one, so roundoff on large channels does not register as growth.
double scaled_floor(double floor, const std::vector<double>& x) {
  double top = 1.0;
  for (double v : x)
    if (std::isfinite(v)) top = std::max(top, std::abs(v));
  return floor * top;
}

void monitor_monotonicity(Context& cx) {
  const FunctionalSeries& fs = cx.art.functionals;
  const auto& t = cx.t;
  const SlackConstants& K = cx.cfg.options.constants;
  const double floor = cx.cfg.options.monotone_floor;
  const double c = cx.rec.c2_0_;
  const double sc = std::sqrt(c);
  const double Tc = cx.rec.Tc_;
  const std::size_t n = t.size();
  std::vector<double> kI(n), d1(n), d3(n), d4(n);
  const double expo = std::exp(-std::pow(c, -0.5 - 1.0 / 400.0));
  for (std::size_t i = 0; i < n; ++i) {
    kI[i] = c * std::exp(-t[i] / 32.0) * expo;
    const double tail = std::exp(-sc * (t[i] + Tc) / 32.0);
    d1[i] = std::exp(-t[i] / 16.0) * fs.channel("g1")[i] + tail;
    if (cx.rec.two_) {
      const double decay = std::exp(-c * sc * t[i] / 16.0) * fs.channel("g2")[i];
      d3[i] = decay * sc + tail;
      d4[i] = decay * c * sc + tail;
    }
  }
  bool pass = true;
  std::string detail;
  auto audit = [&](const std::string& name, const std::vector<double>& w, double constant,
                   MonotoneCheck check) {
    std::vector<double> density(w);
    for (double& v : density) v *= constant;
    const double fl = scaled_floor(floor, fs.channel(name));
    const MonotonicityReport r =
        check_monotone(fs, name, SlackRule::integrated(density, fl, check));
    const double minimal = minimal_slack_constant(t, fs.channel(name), w, fl, check);
    cx.art.reports.push_back(report_json(r, check, constant, minimal));
    pass = pass && r.pass;
    if (!detail.empty()) detail += ", ";
    detail += name + (r.pass ? " ok" : " violated by " + format_number(r.max_violation));
  };
  audit("I", kI, K.I, MonotoneCheck::anchored);
  audit("C1", d1, K.M1, MonotoneCheck::cumulative);
  audit("C2", d1, K.E1, MonotoneCheck::cumulative);
  if (cx.rec.two_) {
    audit("C3", d3, K.M2, MonotoneCheck::cumulative);
    audit("C4", d4, K.E2, MonotoneCheck::cumulative);
  }
  add_verdict(cx.art, "monotonicity", pass, detail);
}

void monitor_virial(Context& cx) {
  const FunctionalSeries& fs = cx.art.functionals;
  const auto& t = cx.t;
  const double floor = cx.cfg.options.monotone_floor;
  const double Cv = cx.cfg.options.constants.virial;
  const ModulationSeries& ms = cx.art.modulation;
  bool pass = true;
  std::string detail;
  for (std::size_t j = 0; j < ms.solitons(); ++j) {
    const std::string k = std::to_string(j + 1);
    const double scj = std::sqrt(ms.c[j][0]);
    std::vector<double> kernel(t.size()), w(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      kernel[i] = std::exp(-scj * (t[i] + cx.rec.Tc_) / 8.0);
      w[i] = Cv * kernel[i];
    }
    const auto& K = fs.channel("K" + k);
    const auto& N = fs.channel("N" + k);
    const double fl = scaled_floor(floor, K);
    const double kappa = max_dissipation_rate(t, K, w, N, fl);
    const double minimal = minimal_slack_constant(t, K, kernel, fl, MonotoneCheck::cumulative);
    const bool ok = kappa > 0.0;
    Json r;
    r["channel"] = "K" + k;
    r["direction"] = "dK/dt <= -kappa N + slack";
    r["check"] = "cumulative";
    r["floor"] = fl;
    r["slack_constant"] = Cv;
    r["kappa_hat"] = kappa;
    r["minimal_constant"] = minimal;
    r["pass"] = ok;
    cx.art.reports.push_back(r);
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += "kappa_hat_" + k + " " + format_number(kappa);
  }
  add_verdict(cx.art, "virial", pass, detail);
}

void monitor_coercivity(Context& cx) {
  const auto& H = cx.art.functionals.channel("H");
  const auto& g = cx.art.functionals.channel("g");
  double lam = kInf;
  for (std::size_t i = 0; i < H.size(); ++i) {
    const double r = H[i] / g[i];
    const double v = r > 0.0 ? std::min(r, 1.0 / r) : r;
    if (!(v >= lam)) lam = v;
  }
  Json r;
  r["channel"] = "H/g";
  r["direction"] = "lambda0 g <= H <= g / lambda0";
  r["lambda0_hat"] = lam;
  r["samples"] = H.size();
  r["pass"] = lam > 0.0;
  cx.art.reports.push_back(r);
  bool pass = lam > 0.0;
  std::string detail =
      "lambda0_hat " + format_number(lam) + " over " + std::to_string(H.size()) + " samples";
  // H*_j >= lambda N_j; N_j carries the sqrt(c_j) factor.
  for (std::size_t j = 0; j < cx.art.modulation.solitons(); ++j) {
    const std::string k = std::to_string(j + 1);
    const auto& Hs = cx.art.functionals.channel("Hstar" + k);
    const auto& N = cx.art.functionals.channel("N" + k);
    double ls = kInf;
    for (std::size_t i = 0; i < Hs.size(); ++i) {
      const double v = Hs[i] / N[i];
      if (!(v >= ls)) ls = v;
    }
    Json h;
    h["channel"] = "Hstar" + k + "/N" + k;
    h["direction"] = "Hstar >= lambda N";
    h["lambda_hat"] = ls;
    h["samples"] = Hs.size();
    h["pass"] = ls > 0.0;
    cx.art.reports.push_back(h);
    pass = pass && ls > 0.0;
    detail += ", Hstar" + k + " lambda_hat " + format_number(ls);
  }
  add_verdict(cx.art, "coercivity", pass, detail);
}

/// Tail means and drifts; always part of the summary.
Json plateau_summary(Context& cx, bool* pass_out) {
  const auto& t = cx.t;
  const ModulationSeries& ms = cx.art.modulation;
  const MonitorOptions& o = cx.cfg.options;
  const double T = t.back();
  const double lo = (1.0 - o.tail_fraction) * T;
  bool pass = true;
  Json sol = Json::array();
  for (std::size_t j = 0; j < ms.solitons(); ++j) {
    const std::vector<double> ct = window(t, ms.c[j], lo, T);
    const double cplus = mean(ct);
    std::vector<double> shift(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) shift[i] = ms.rho[j][i] - cplus * t[i];
    const std::vector<double> st = window(t, shift, lo, T);
    const double cdrift = spread(ct);
    const double sdrift = spread(st);
    const bool cp = cdrift < o.c_tolerance;
    const bool sp = sdrift < o.shift_tolerance;
    pass = pass && cp && sp;
    sol.push_back({{"c0", ms.c[j][0]},
                   {"rho0", ms.rho[j][0]},
                   {"c_plus", cplus},
                   {"x_plus", mean(st)},
                   {"c_drift", cdrift},
                   {"shift_drift", sdrift},
                   {"c_plateau", cp},
                   {"shift_plateau", sp}});
  }
  // The tail is integrated on its own window; total minus the running sum
  // rounds to zero once g1 has decayed below the total's roundoff.
  const auto& g1 = cx.art.functionals.channel("g1");
  const double total = cumulative_trapezoid(t, g1).back();
  double tail = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i - 1] >= lo) tail += 0.5 * (t[i] - t[i - 1]) * (g1[i] + g1[i - 1]);
  const double frac = total > 0.0 ? tail / total : 0.0;
  pass = pass && frac < o.g1_tail_limit;
  cx.art.summary["solitons"] = sol;
  cx.art.summary["g1_integral"] = {{"total", total},
                                   {"tail", tail},
                                   {"tail_fraction", frac},
                                   {"limit", o.g1_tail_limit}};
  if (pass_out) *pass_out = pass;
  return sol;
}

void monitor_l1(Context& cx) {
  const auto& t = cx.t;
  const ModulationSeries& ms = cx.art.modulation;
  const FunctionalSeries& fs = cx.art.functionals;
  const int p = cx.cfg.spec.p();
  const double k = (5.0 - p) / (2.0 * (p - 1)) * base_mass(p);
  const std::vector<double> dJ = time_derivative(t, fs.channel("J1"));
  const std::vector<double> drho = time_derivative(t, ms.rho[0]);
  const auto& g1 = fs.channel("g1");
  const double C = cx.cfg.options.constants.J;
  const double floor = cx.cfg.options.j_floor;
  std::vector<double> X(t.size());
  double worst = -kInf;
  double at = 0.0;
  double minimal = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    X[i] = dJ[i] + k * (drho[i] - ms.c[0][i]);
    const double v = std::abs(X[i]) - (C * g1[i] + floor);
    if (!(v <= worst)) {
      worst = std::isfinite(v) ? v : kInf;
      at = t[i];
    }
    const double need = std::abs(X[i]) - floor;
    if (need > 0.0) minimal = std::max(minimal, g1[i] > 0.0 ? need / g1[i] : kInf);
  }
  cx.art.functionals.set_channel("J1_rate", X);
  const bool pass = worst <= 0.0;
  Json r;
  r["channel"] = "J1_rate";
  r["direction"] = "|J1' + k (rho1' - c1)| <= C g1 + floor";
  r["check"] = "pointwise";
  r["floor"] = floor;
  r["slack_constant"] = C;
  r["max_violation"] = worst;
  r["worst_time"] = at;
  r["minimal_constant"] = minimal;
  r["pass"] = pass;
  cx.art.reports.push_back(r);
  add_verdict(cx.art, "l1_audit", pass,
              "minimal constant " + format_number(minimal) + ", calibrated " + format_number(C));
}

void monitor_expansion(Context& cx) {
  const FunctionalSeries& fs = cx.art.functionals;
  const auto& dd1 = fs.channel("dd1");
  const auto& inter = fs.channel("interaction");
  const double scale = fs.channel("mass")[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < dd1.size(); ++i)
    worst = std::max(worst, std::abs(dd1[i] - std::abs(inter[i])) / scale);
  if (!std::isfinite(worst)) worst = kInf;
  add_verdict(cx.art, "expansion", worst <= 1e-8,
              "mass expansion defect " + format_number(worst) + " (relative)");
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Puts the sponge losses back into the localized channels at the weight
/// each carries on the band it was removed from: psi is 0 on the left and
/// 1 on the right, Theta_1 is 0 and 2 L0 A, Theta_2 is -2 L0 A and 0.
void restore_absorbed(FunctionalSeries& fs, const ScenarioConfig& cfg, double c,
                      const std::vector<double>& absorbed, const std::vector<double>& right) {
  if (absorbed.empty() || absorbed.back() == 0.0) return;
  const double kappa = cfg.options.combination;
  const double L0A = plateau_L0() * cfg.options.virial_A;
  const bool two = cfg.solitons.size() == 2;
  auto shift = [&](const std::string& name, double wl, double wr) {
    std::vector<double> v = fs.channel(name);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += wl * (absorbed[i] - right[i]) + wr * right[i];
    fs.set_channel(name, std::move(v));
  };
  shift("I", 0.0, 1.0);
  shift("M1", 0.0, 1.0);
  shift("C1", 0.0, 1.0);
  shift("C2", 0.0, kappa);
  shift("K1", 0.0, 2.0 * L0A);
  if (two) {
    shift("M2", 0.0, 1.0);
    shift("C3", 0.0, 1.0);
    shift("C4", 0.0, c * kappa);
    shift("K2", -2.0 * L0A, 0.0);
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool RunArtifact::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const MonitorVerdict& v) { return v.pass; });
}

RunArtifact run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  RunArtifact art;
  art.warnings = config.validate();
  art.config = to_json(config);
  const Field u0 = initial_data(config);

  Recorder rec(config, options);
  EvolveConfig ev = config.evolve;
  ev.keep_snapshots = false;
  const Observer obs = [&](double t, const Field& u, const Frame& f) { rec.observe(t, u, f); };
  FrameRule rule;
  if (options.baseline || config.frame.mode == FramePolicy::Mode::track || options.record_baseline)
    rule = [&](double t, const Field&, const Frame& f) { return rec.frame_rule(t, f); };
  const Trajectory traj = run(u0, config.spec, ev, {obs}, rule);

  art.modulation = rec.tracker_.series();
  art.functionals = std::move(rec.series_);
  const std::size_t n = traj.conserved.size();
  std::vector<double> mass(n), energy(n), absorbed(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    mass[i] = traj.conserved[i].mass;
    energy[i] = traj.conserved[i].energy;
    absorbed[i] = traj.conserved[i].absorbed;
    right[i] = traj.conserved[i].absorbed_right;
  }
  art.functionals.set_channel("mass", mass);
  art.functionals.set_channel("energy", energy);
  art.functionals.set_channel("absorbed", absorbed);
  restore_absorbed(art.functionals, config, rec.c2_0_, absorbed, right);

  const std::vector<double> t = art.functionals.times;
  Context cx{config, rec, art, t};
  double smallest = config.solitons[0].c;
  for (const SolitonParams& sp : config.solitons) smallest = std::min(smallest, sp.c);
  const double scale = config.perturbation.alpha * std::pow(smallest, config.spec.q() + 0.5);

  art.summary["config"] = art.config;
  art.summary["kind"] = to_string(config.kind);
  art.summary["T_c"] = rec.Tc_;
  art.summary["observations"] = t.size();
  art.summary["alpha_scale"] = scale;
  art.summary["halfline_x2_mass_initial"] = art.functionals.channel("halfline_x2_mass").front();
  bool plateau_pass = true;
  plateau_summary(cx, &plateau_pass);
  if (!rec.response_.empty()) {
    art.summary["response"] = sup_json(split_sup(rec.response_t_, rec.response_, t.back()), scale);
    Json r;
    r["channel"] = "response";
    r["times"] = rec.response_t_;
    r["values"] = rec.response_;
    art.reports.push_back(r);
  }
  if (!requested(config, "tube")) art.summary["tube"] = sup_json(split_sup(t, art.functionals.channel("tube"), t.back()), scale);

  for (const std::string& m : config.monitors) {
    if (m == "conservation")
      monitor_conservation(cx);
    else if (m == "tube")
      monitor_tube(cx, scale);
    else if (m == "separation")
      monitor_separation(cx);
    else if (m == "monotonicity")
      monitor_monotonicity(cx);
    else if (m == "virial")
      monitor_virial(cx);
    else if (m == "coercivity")
      monitor_coercivity(cx);
    else if (m == "plateau")
      add_verdict(art, "plateau", plateau_pass, "tail drifts and g1 integral, see solitons");
    else if (m == "l1_audit")
      monitor_l1(cx);
    else if (m == "expansion")
      monitor_expansion(cx);
  }

  Json table = Json::object();
  Json verdicts = Json::array();
  for (const MonitorVerdict& v : art.verdicts) {
    table[v.monitor] = v.pass;
    verdicts.push_back({{"monitor", v.monitor}, {"pass", v.pass}, {"detail", v.detail}});
  }
  art.summary["pass"] = art.pass();
  art.summary["monitors"] = table;
  art.summary["verdicts"] = verdicts;
  art.summary["warnings"] = art.warnings;
  if (rec.record_) art.baseline = std::move(rec.record_);
  return art;
}

void write_artifact(const RunArtifact& art, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const std::string echo = "# config " + art.config.dump() + "\n";

  std::string s = echo + "t";
  const FunctionalSeries& fs = art.functionals;
  for (const std::string& name : fs.names()) s += "," + name;
  s += "\n";
  for (std::size_t i = 0; i < fs.times.size(); ++i) {
    s += format_number(fs.times[i]);
    for (const std::string& name : fs.names()) s += "," + format_number(fs.channel(name)[i]);
    s += "\n";
  }
  write_text(dir / "series.csv", s);

  const ModulationSeries& ms = art.modulation;
  s = echo + "t";
  for (std::size_t j = 0; j < ms.solitons(); ++j) {
    const std::string k = std::to_string(j + 1);
    s += ",c" + k + ",rho" + k + ",delta" + k;
  }
  s += ",eta_l2,eta_h1,eta_h1c\n";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    s += format_number(ms.times[i]);
    for (std::size_t j = 0; j < ms.solitons(); ++j)
      s += "," + format_number(ms.c[j][i]) + "," + format_number(ms.rho[j][i]) + "," +
           format_number(ms.delta[j][i]);
    s += "," + format_number(ms.eta_l2[i]) + "," + format_number(ms.eta_h1[i]) + "," +
         format_number(ms.eta_h1c[i]) + "\n";
  }
  write_text(dir / "modulation.csv", s);

  Json reports;
  reports["config"] = art.config;
  reports["reports"] = art.reports;
  write_text(dir / "reports.json", dump(reports));
  write_text(dir / "summary.json", dump(art.summary));
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

constexpr const char* kAxes[] = {"p", "c_ratio", "alpha", "separation", "seed"};

/// Applies one grid point to a copy of the base config.
Json point_json(const Json& base, const std::vector<std::pair<std::string, double>>& params) {
  Json j = base;
  for (const auto& [key, v] : params) {
    if (key == "p") {
      j["nonlinearity"]["p"] = static_cast<int>(std::lround(v));
    } else if (key == "c_ratio") {
      Json& sol = j["initial"]["solitons"];
      if (!sol.is_array() || sol.size() != 2) throw InvalidArgument("sweep: c_ratio needs two solitons");
      sol[1]["c"] = v * sol[0].value("c", 1.0);
    } else if (key == "alpha") {
      j["initial"]["perturbation"]["alpha"] = v;
    } else if (key == "separation") {
      j["initial"]["separation"] = v;
    } else if (key == "seed") {
      j["seed"] = static_cast<std::uint64_t>(std::llround(v));
    }
  }
  return j;
}

std::vector<std::vector<std::pair<std::string, double>>> grid_points(const SweepConfig& sc) {
  std::vector<std::vector<std::pair<std::string, double>>> pts(1);
  for (const auto& [key, values] : sc.axes) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& pt : pts)
      for (double v : values) {
        auto q = pt;
        q.emplace_back(key, v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

template <class Task>
void run_pool(std::size_t count, int workers, Task task) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < w; ++k) pool.emplace_back(loop);
  loop();
  for (std::thread& th : pool) th.join();
}

std::string point_dir(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point_%03zu", i);
  return buf;
}

}  // namespace

SweepConfig parse_sweep(const Json& j, bool strict, std::vector<std::string>* warnings) {
  if (!j.is_object() || !j.contains("base")) throw InvalidArgument("sweep: config needs a base scenario");
  SweepConfig sc;
  sc.base = j.at("base");
  for (const auto& [key, value] : j.items()) {
    if (key == "base" || key == "grid" || key == "baseline") continue;
    const std::string msg = "sweep: unknown key " + key;
    if (strict) throw InvalidArgument(msg);
    if (warnings) warnings->push_back(msg);
  }
  sc.baseline = j.value("baseline", false);
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    if (!g.is_object()) throw InvalidArgument("sweep: grid must be an object");
    for (const auto& [key, value] : g.items()) {
      if (std::find(std::begin(kAxes), std::end(kAxes), key) == std::end(kAxes))
        throw InvalidArgument("sweep: unknown grid axis " + key);
    }
    for (const char* key : kAxes)
      if (g.contains(key)) {
        std::vector<double> values = g.at(key).get<std::vector<double>>();
        if (values.empty()) throw InvalidArgument(std::string("sweep: empty axis ") + key);
        sc.axes.emplace_back(key, std::move(values));
      }
  }
  // Every point must be valid on its own.
  for (const auto& pt : grid_points(sc)) parse_scenario(point_json(sc.base, pt), strict, warnings);
  return sc;
}

bool SweepResult::pass() const {
  return std::all_of(points.begin(), points.end(),
                     [](const SweepPoint& p) { return p.ok && p.summary.value("pass", false); });
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || !(std::abs(den) > 1e-300)) return std::nan("");
  return (n * sxy - sx * sy) / den;
}

SweepResult sweep(const SweepConfig& sc, int workers, const std::filesystem::path& out) {
  const auto pts = grid_points(sc);
  SweepResult result;
  result.points.resize(pts.size());
  std::vector<ScenarioConfig> cfgs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Json params = Json::object();
    for (const auto& [k, v] : pts[i]) params[k] = v;
    result.points[i].parameters = params;
    cfgs.push_back(parse_scenario(point_json(sc.base, pts[i]), false, nullptr));
  }

  // Reference runs at alpha = 0, one per distinct remaining configuration.
  std::map<std::string, std::size_t> base_index;
  std::vector<ScenarioConfig> base_cfgs;
  std::vector<std::size_t> point_base(pts.size(), SIZE_MAX);
  if (sc.baseline) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (cfgs[i].perturbation.alpha == 0.0) continue;
      ScenarioConfig b = cfgs[i];
      b.perturbation.alpha = 0.0;
      b.monitors.clear();
      const std::string key = to_json(b).dump();
      auto [it, fresh] = base_index.emplace(key, base_cfgs.size());
      if (fresh) base_cfgs.push_back(b);
      point_base[i] = it->second;
    }
  }
  std::vector<std::optional<BaselineRecord>> records(base_cfgs.size());
  std::vector<std::string> base_errors(base_cfgs.size());
  run_pool(base_cfgs.size(), workers, [&](std::size_t i) {
    try {
      RunOptions ro;
      ro.record_baseline = true;
      records[i] = run_scenario(base_cfgs[i], ro).baseline;
    } catch (const std::exception& e) {
      base_errors[i] = e.what();
    }
  });

  run_pool(pts.size(), workers, [&](std::size_t i) {
    SweepPoint& sp = result.points[i];
    try {
      RunOptions ro;
      if (point_base[i] != SIZE_MAX) {
        const std::size_t b = point_base[i];
        if (!records[b]) throw std::runtime_error("reference run failed: " + base_errors[b]);
        ro.baseline = &*records[b];
      }
      const RunArtifact art = run_scenario(cfgs[i], ro);
      if (!out.empty()) write_artifact(art, out / point_dir(i));
      sp.summary = art.summary;
      sp.ok = true;
    } catch (const std::exception& e) {
      sp.error = e.what();
    }
  });

  // Scaling fits over the successful points.
  std::vector<double> c2, alpha, tube, resp;
  std::vector<std::vector<double>> dc(2), dx(2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const SweepPoint& sp = result.points[i];
    if (!sp.ok) continue;
    const Json& sol = sp.summary["solitons"];
    alpha.push_back(cfgs[i].perturbation.alpha);
    tube.push_back(sp.summary["tube"].value("sup", std::nan("")));
    resp.push_back(sp.summary.contains("response") ? sp.summary["response"].value("sup", std::nan(""))
                                                   : std::nan(""));
    c2.push_back(cfgs[i].solitons.back().c);
    for (std::size_t j = 0; j < sol.size() && j < 2; ++j) {
      const double c0 = sol[j].value("c0", std::nan(""));
      dc[j].push_back(std::abs(sol[j].value("c_plus", std::nan("")) / c0 - 1.0));
      dx[j].push_back(std::abs(sol[j].value("x_plus", std::nan("")) - sol[j].value("rho0", std::nan(""))));
    }
  }
  Json slopes = Json::object();
  for (std::size_t j = 0; j < 2; ++j) {
    if (dc[j].size() != c2.size()) continue;
    const std::string k = std::to_string(j + 1);
    slopes["c" + k + "_plus_vs_c2"] = loglog_slope(c2, dc[j]);
    slopes["x" + k + "_plus_vs_c2"] = loglog_slope(c2, dx[j]);
  }
  slopes["tube_vs_alpha"] = loglog_slope(alpha, tube);
  slopes["response_vs_alpha"] = loglog_slope(alpha, resp);
  result.slopes = slopes;
  return result;
}

void write_sweep(const SweepResult& result, const SweepConfig& config,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  Json j;
  j["base"] = config.base;
  Json axes = Json::object();
  for (const auto& [k, v] : config.axes) axes[k] = v;
  j["grid"] = axes;
  j["baseline"] = config.baseline;
  Json rows = Json::array();
  for (const SweepPoint& p : result.points) {
    Json r;
    r["parameters"] = p.parameters;
    r["ok"] = p.ok;
    if (!p.ok) r["error"] = p.error;
    if (p.ok) {
      Json s = p.summary;
      s.erase("config");
      r["summary"] = s;
    }
    rows.push_back(r);
  }
  j["points"] = rows;
  j["slopes"] = result.slopes;
  j["pass"] = result.pass();
  write_text(dir / "sweep.json", dump(j));

  std::string csv = "# config " + Json{{"base", config.base}, {"grid", axes}}.dump() + "\n";
  std::vector<std::string> keys;
  for (const auto& [k, v] : config.axes) keys.push_back(k);
  csv += "index";
  for (const std::string& k : keys) csv += "," + k;
  csv += ",ok,pass,tube_sup,response_sup,c1_plus,x1_plus,c2_plus,x2_plus\n";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const SweepPoint& p = result.points[i];
    csv += std::to_string(i);
    for (const std::string& k : keys) csv += "," + format_number(p.parameters.value(k, std::nan("")));
    auto get = [&](const Json& obj, const char* key) {
      return obj.is_object() && obj.contains(key) && obj[key].is_number() ? obj[key].get<double>()
                                                                          : std::nan("");
    };
    const Json none = Json::object();
    const Json& s = p.ok ? p.summary : none;
    csv += std::string(",") + (p.ok ? "1" : "0") + "," + (p.ok && s.value("pass", false) ? "1" : "0");
    csv += "," + format_number(s.contains("tube") ? get(s["tube"], "sup") : std::nan(""));
    csv += "," + format_number(s.contains("response") ? get(s["response"], "sup") : std::nan(""));
    for (std::size_t j = 0; j < 2; ++j) {
      const bool have = s.contains("solitons") && s["solitons"].size() > j;
      csv += "," + format_number(have ? get(s["solitons"][j], "c_plus") : std::nan(""));
      csv += "," + format_number(have ? get(s["solitons"][j], "x_plus") : std::nan(""));
    }
    csv += "\n";
  }
  write_text(dir / "sweep.csv", csv);
}

// ---------------------------------------------------------------------------
// Built-in verification

std::vector<VerifyLine> verify_suite() {
  std::vector<VerifyLine> lines;
  auto line = [&](std::string name, double value, double tol) {
    lines.push_back({std::move(name), value < tol,
                     format_number(value) + " (tolerance " + format_number(tol) + ")"});
  };
  for (int p : {2, 3, 4}) {
    const NonlinearitySpec spec(p);
    const double q = spec.q();
    const double m1 = base_mass(p);
    double worst_id = 0.0;
    double worst_lin = 0.0;
    for (double c : {0.05, 1.0, 4.0}) {
      const Grid grid(120.0 / std::sqrt(c), 2048);
      const ProfileFamily fam = make_profile(spec, {c, 0.0}, grid);
      const double mass = inner(fam.Q, fam.Q);
      double qp1 = 0.0;
      double qx2 = 0.0;
      double en = 0.0;
      for (std::size_t k = 0; k < grid.n; ++k) {
        qp1 += std::pow(fam.Q[k], p + 1);
        qx2 += fam.Qx[k] * fam.Qx[k];
        en += 0.5 * fam.Qx[k] * fam.Qx[k] - spec.F(fam.Q[k]);
      }
      qp1 *= grid.dx();
      qx2 *= grid.dx();
      en *= grid.dx();
      auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
      // Pohozaev identities at speed c carry one factor of c.
      worst_id = std::max({worst_id, rel(qp1, c * 2.0 * (p + 1) / (p + 3) * mass),
                           rel(qx2, c * (p - 1.0) / (p + 3) * mass),
                           rel(mass, std::pow(c, 2 * q) * m1),
                           rel(en, -(5.0 - p) / (2.0 * (p + 3)) * std::pow(c, 2 * q + 1) * m1)});
      const double amp = fam.Q.max_abs();
      const Field L1 = apply_linearized(fam, fam.Qx);
      const Field L2 = apply_linearized(fam, fam.LambdaQ) + 2.0 * c * fam.Q;
      const Field s = offsets(grid, 0.0);
      Field xq = multiply(s, fam.Q);
      Field L3 = apply_linearized(fam, spectral_derivative(xq, 1)) + 2.0 * c * fam.Q;
      for (std::size_t k = 0; k < grid.n; ++k) L3[k] += (p - 3) * std::pow(fam.Q[k], p);
      worst_lin = std::max({worst_lin, L1.max_abs() / (c * amp), L2.max_abs() / (c * amp),
                            L3.max_abs() / (c * amp)});
    }
    const std::string tag = "p=" + std::to_string(p);
    line("soliton identities " + tag, worst_id, 1e-8);
    line("linearized identities " + tag, worst_lin, 1e-8);
    const Grid grid(100.0, 1024);
    const ProfileFamily fam = make_profile(spec, {1.0, 0.0}, grid);
    const CoercivityResult cr =
        coercivity_estimate(fam, {fam.Q, multiply(offsets(grid, 0.0), fam.Q)});
    lines.push_back({"coercivity " + tag, cr.lambda > 0.0, "lambda_hat " + format_number(cr.lambda)});
  }
  line("closed-form mass p=2", std::abs(base_mass(2) - 6.0), 1e-10);
  line("closed-form mass p=3", std::abs(base_mass(3) - 4.0), 1e-10);
  return lines;
}

}  // namespace gkdv
