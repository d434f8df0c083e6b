#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "gkdv/fft.hpp"
#include "gkdv/lab.hpp"

namespace gkdv {

namespace {

constexpr const char* kKinds[] = {"single_soliton_asymptotics", "two_soliton_decoupled",
                                  "monotonicity_audit", "virial_audit", "shift_convergence"};
constexpr const char* kShapes[] = {"none", "derivative", "gaussian", "bump", "noise"};

/// Collects unknown keys of one JSON object level.
class KeyCheck {
 public:
  KeyCheck(const Json& obj, std::string where, std::vector<std::string>* warnings, bool strict)
      : obj_(obj), where_(std::move(where)), warnings_(warnings), strict_(strict) {
    if (!obj_.is_object()) throw InvalidArgument("config: " + where_ + " must be an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }
  template <class T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    try {
      return obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config: " + where_ + "." + key + ": " + e.what());
    }
  }
  const Json& at(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void finish() {
    for (const auto& [key, value] : obj_.items()) {
      if (seen_.count(key)) continue;
      const std::string msg = "config: unknown key " + where_ + "." + key;
      if (strict_) throw InvalidArgument(msg);
      if (warnings_) warnings_->push_back(msg);
    }
  }

 private:
  const Json& obj_;
  std::string where_;
  std::vector<std::string>* warnings_;
  bool strict_;
  std::set<std::string> seen_;
};

bool two_soliton_kind(ScenarioKind k) {
  return k == ScenarioKind::two_soliton_decoupled || k == ScenarioKind::monotonicity_audit ||
         k == ScenarioKind::virial_audit;
}

Field shape_field(const ScenarioConfig& cfg) {
  const Grid& g = cfg.grid;
  const PerturbationConfig& pc = cfg.perturbation;
  const std::size_t target = pc.target.value_or(cfg.solitons.size() - 1);
  const SolitonParams& sp = cfg.solitons.at(target);
  const ProfileEvaluator ev(cfg.spec, sp.c);
  Field v(g);
  switch (pc.shape) {
    case PerturbationShape::none:
      break;
    case PerturbationShape::derivative:
      for (std::size_t k = 0; k < g.n; ++k) v[k] = ev(wrap(g.x(k) - sp.rho, g.length)).Qx;
      break;
    case PerturbationShape::gaussian:
      for (std::size_t k = 0; k < g.n; ++k) {
        const double s = wrap(g.x(k) - sp.rho - pc.offset, g.length) / pc.width;
        v[k] = std::exp(-s * s);
      }
      break;
    case PerturbationShape::bump:
      for (std::size_t k = 0; k < g.n; ++k) {
        const double s = wrap(g.x(k) - sp.rho - pc.offset, g.length) / pc.width;
        v[k] = std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
      }
      break;
    case PerturbationShape::noise: {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<fft::Complex> coef(g.modes(), 0.0);
      for (std::size_t m = 1; m < g.modes() && m != g.n / 2; ++m) {
        if (g.wavenumber(m) > pc.band) break;
        const double re = normal(rng);
        const double im = normal(rng);
        coef[m] = {re, im};
      }
      fft::inverse(coef, v.values());
      for (std::size_t k = 0; k < g.n; ++k) {
        const double s = wrap(g.x(k) - sp.rho - pc.offset, g.length) / pc.width;
        v[k] *= std::exp(-s * s);
      }
      break;
    }
  }
  return v;
}

double h1_norm(const Field& v) { return h1c_norm(v, 1.0); }

}  // namespace

std::string to_string(ScenarioKind kind) { return kKinds[static_cast<int>(kind)]; }

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kKinds[i]) return static_cast<ScenarioKind>(i);
  throw InvalidArgument("config: unknown scenario kind '" + name + "'");
}

std::string to_string(PerturbationShape shape) { return kShapes[static_cast<int>(shape)]; }

PerturbationShape parse_perturbation_shape(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kShapes[i]) return static_cast<PerturbationShape>(i);
  throw InvalidArgument("config: unknown perturbation shape '" + name + "'");
}

double decoupling_time(double c) {
  if (!(c > 0.0)) throw InvalidArgument("decoupling_time: c must be positive");
  return std::pow(c, -0.5 - 0.01);
}

const std::vector<std::string>& known_monitors() {
  static const std::vector<std::string> names = {
      "conservation", "tube", "separation", "monotonicity", "virial",
      "coercivity",   "plateau", "l1_audit", "expansion"};
  return names;
}

std::vector<std::string> default_monitors(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::single_soliton_asymptotics:
      return {"conservation", "tube", "plateau", "l1_audit"};
    case ScenarioKind::two_soliton_decoupled:
      return {"conservation", "tube", "separation"};
    case ScenarioKind::monotonicity_audit:
      return {"conservation", "tube", "separation", "monotonicity"};
    case ScenarioKind::virial_audit:
      return {"tube", "separation", "virial"};
    case ScenarioKind::shift_convergence:
      return {"conservation", "plateau"};
  }
  return {};
}

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> warnings;
  evolve.validate();
  if (grid.n < 16 || grid.n % 2 != 0 || !(grid.length > 0.0))
    throw InvalidArgument("config: grid needs even n >= 16 and L > 0");
  if (solitons.empty() || solitons.size() > 2)
    throw InvalidArgument("config: one or two solitons are supported");
  for (const SolitonParams& sp : solitons)
    if (!(sp.c > 0.0) || !std::isfinite(sp.rho))
      throw InvalidArgument("config: soliton speeds must be positive, positions finite");
  const bool two = solitons.size() == 2;
  if (two_soliton_kind(kind) && !two)
    throw InvalidArgument("config: " + to_string(kind) + " needs two solitons");
  if (!two_soliton_kind(kind) && two)
    throw InvalidArgument("config: " + to_string(kind) + " takes one soliton");
  if (two && !(solitons[0].c > solitons[1].c))
    throw InvalidArgument("config: solitons must be ordered fastest first");
  if (separation && !two) throw InvalidArgument("config: separation needs two solitons");
  if (two) {
    const double X0 = solitons[0].rho - solitons[1].rho;
    const double Tc = decoupling_time(solitons[1].c / solitons[0].c);
    if (!(X0 > 0.0)) throw InvalidArgument("config: the fast soliton must start to the right");
    if (X0 < 0.5 * Tc || X0 > 1.5 * Tc)
      warnings.push_back("config: separation " + format_number(X0) + " outside [T_c/2, 3T_c/2] = [" +
                         format_number(0.5 * Tc) + ", " + format_number(1.5 * Tc) + "]");
  }
  const PerturbationConfig& pc = perturbation;
  if (!(pc.alpha >= 0.0) || !std::isfinite(pc.alpha))
    throw InvalidArgument("config: perturbation alpha must be non-negative");
  if (!(pc.width > 0.0) || !(pc.band > 0.0))
    throw InvalidArgument("config: perturbation width and band must be positive");
  if (pc.target && *pc.target >= solitons.size())
    throw InvalidArgument("config: perturbation target out of range");
  if (pc.shape == PerturbationShape::none && pc.alpha > 0.0)
    throw InvalidArgument("config: alpha > 0 needs a perturbation shape");
  for (const std::string& m : monitors) {
    const auto& known = known_monitors();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw InvalidArgument("config: unknown monitor '" + m + "'");
    if (m == "separation" && !two) throw InvalidArgument("config: separation monitor needs two solitons");
  }
  if (frame.mode == FramePolicy::Mode::track && !(frame.threshold > 0.0))
    throw InvalidArgument("config: frame threshold must be positive");
  const MonitorOptions& o = options;
  if (!(o.virial_A > 0.0) || !(o.tail_fraction > 0.0 && o.tail_fraction < 1.0) ||
      !(o.monotone_floor >= 0.0) || !(o.j_floor >= 0.0) || !(o.combination >= 0.0))
    throw InvalidArgument("config: invalid monitor options");
  return warnings;
}

ScenarioConfig parse_scenario(const Json& j, bool strict, std::vector<std::string>* warnings) {
  ScenarioConfig cfg;
  KeyCheck top(j, "config", warnings, strict);
  cfg.kind = parse_scenario_kind(top.get<std::string>("kind", "single_soliton_asymptotics"));

  if (top.has("nonlinearity")) {
    KeyCheck nl(top.at("nonlinearity"), "nonlinearity", warnings, strict);
    const int p = nl.get<int>("p", 2);
    std::vector<PolyTerm> terms;
    if (nl.has("perturbation")) {
      for (const Json& t : nl.at("perturbation")) {
        KeyCheck tk(t, "nonlinearity.perturbation[]", warnings, strict);
        terms.push_back({tk.get<int>("degree", 0), tk.get<double>("coeff", 0.0)});
        tk.finish();
      }
    }
    nl.finish();
    cfg.spec = NonlinearitySpec(p, std::move(terms));
  }

  if (top.has("grid")) {
    KeyCheck gk(top.at("grid"), "grid", warnings, strict);
    cfg.grid = Grid(gk.get<double>("L", 80.0), gk.get<std::size_t>("n", 1024));
    gk.finish();
  }

  cfg.evolve.keep_snapshots = false;
  if (top.has("evolve")) {
    KeyCheck ek(top.at("evolve"), "evolve", warnings, strict);
    cfg.evolve.dt = ek.get<double>("dt", cfg.evolve.dt);
    cfg.evolve.T = ek.get<double>("T", cfg.evolve.T);
    cfg.evolve.observer_stride = ek.get<int>("observer_stride", 1);
    cfg.evolve.blowup_factor = ek.get<double>("blowup_factor", cfg.evolve.blowup_factor);
    if (ek.has("dealias")) cfg.evolve.dealias = ek.get<bool>("dealias", false);
    if (ek.has("sponge")) {
      KeyCheck sk(ek.at("sponge"), "evolve.sponge", warnings, strict);
      Sponge s;
      s.width = sk.get<double>("width", 0.0);
      s.strength = sk.get<double>("strength", 0.0);
      s.stride = sk.get<int>("stride", s.stride);
      sk.finish();
      cfg.evolve.sponge = s;
    }
    if (ek.has("frame")) {
      KeyCheck fk(ek.at("frame"), "evolve.frame", warnings, strict);
      const std::string mode = fk.get<std::string>("mode", "fixed");
      if (mode == "track")
        cfg.frame.mode = FramePolicy::Mode::track;
      else if (mode != "fixed")
        throw InvalidArgument("config: frame mode must be fixed or track");
      cfg.frame.velocity = fk.get<double>("velocity", 0.0);
      cfg.frame.threshold = fk.get<double>("threshold", cfg.frame.threshold);
      fk.finish();
    }
    ek.finish();
  }
  cfg.evolve.frame_velocity = cfg.frame.velocity;

  if (top.has("initial")) {
    KeyCheck ik(top.at("initial"), "initial", warnings, strict);
    if (ik.has("solitons")) {
      for (const Json& s : ik.at("solitons")) {
        KeyCheck sk(s, "initial.solitons[]", warnings, strict);
        cfg.solitons.push_back({sk.get<double>("c", 1.0), sk.get<double>("rho", 0.0)});
        sk.finish();
      }
    }
    if (ik.has("separation")) {
      const Json& sep = ik.at("separation");
      if (sep.is_string()) {
        if (sep.get<std::string>() != "T_c")
          throw InvalidArgument("config: separation must be a number or \"T_c\"");
        if (cfg.solitons.size() != 2) throw InvalidArgument("config: T_c needs two solitons");
        cfg.separation = decoupling_time(cfg.solitons[1].c / cfg.solitons[0].c);
      } else {
        cfg.separation = sep.get<double>();
      }
    }
    if (ik.has("perturbation")) {
      KeyCheck pk(ik.at("perturbation"), "initial.perturbation", warnings, strict);
      PerturbationConfig& pc = cfg.perturbation;
      pc.shape = parse_perturbation_shape(pk.get<std::string>("shape", "none"));
      pc.alpha = pk.get<double>("alpha", 0.0);
      if (pk.has("target")) pc.target = pk.get<std::size_t>("target", 0);
      pc.offset = pk.get<double>("offset", 0.0);
      pc.width = pk.get<double>("width", 1.0);
      pc.band = pk.get<double>("band", 1.0);
      pk.finish();
    }
    ik.finish();
  }
  if (cfg.separation && cfg.solitons.size() == 2)
    cfg.solitons[1].rho = cfg.solitons[0].rho - *cfg.separation;

  if (top.has("monitors"))
    cfg.monitors = top.get<std::vector<std::string>>("monitors", {});
  else
    cfg.monitors = default_monitors(cfg.kind);
  cfg.output = top.get<std::string>("output", "");
  cfg.seed = top.get<std::uint64_t>("seed", 0);
  const std::string ortho = top.get<std::string>("orthogonality", "moment");
  if (ortho == "derivative")
    cfg.orthogonality = Orthogonality::derivative;
  else if (ortho != "moment")
    throw InvalidArgument("config: orthogonality must be moment or derivative");

  if (top.has("options")) {
    KeyCheck ok(top.at("options"), "options", warnings, strict);
    MonitorOptions& o = cfg.options;
    o.virial_A = ok.get<double>("virial_A", o.virial_A);
    o.combination = ok.get<double>("combination", o.combination);
    o.monotone_floor = ok.get<double>("monotone_floor", o.monotone_floor);
    o.j_floor = ok.get<double>("j_floor", o.j_floor);
    o.tail_fraction = ok.get<double>("tail_fraction", o.tail_fraction);
    o.c_tolerance = ok.get<double>("c_tolerance", o.c_tolerance);
    o.shift_tolerance = ok.get<double>("shift_tolerance", o.shift_tolerance);
    o.g1_tail_limit = ok.get<double>("g1_tail_limit", o.g1_tail_limit);
    o.conservation_tolerance = ok.get<double>("conservation_tolerance", o.conservation_tolerance);
    if (ok.has("constants")) {
      KeyCheck ck(ok.at("constants"), "options.constants", warnings, strict);
      SlackConstants& k = o.constants;
      k.I = ck.get<double>("I", k.I);
      k.M1 = ck.get<double>("M1", k.M1);
      k.E1 = ck.get<double>("E1", k.E1);
      k.M2 = ck.get<double>("M2", k.M2);
      k.E2 = ck.get<double>("E2", k.E2);
      k.virial = ck.get<double>("virial", k.virial);
      k.J = ck.get<double>("J", k.J);
      ck.finish();
    }
    ok.finish();
  }
  top.finish();

  for (std::string& w : cfg.validate()) {
    if (strict) throw InvalidArgument(w);
    if (warnings) warnings->push_back(std::move(w));
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& file, bool strict,
                             std::vector<std::string>* warnings) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read config " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config: " + file.string() + ": " + e.what());
  }
  return parse_scenario(j, strict, warnings);
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  Json terms = Json::array();
  for (const PolyTerm& t : c.spec.perturbation()) terms.push_back({{"degree", t.degree}, {"coeff", t.coeff}});
  j["nonlinearity"] = {{"p", c.spec.p()}, {"perturbation", terms}};
  j["grid"] = {{"L", c.grid.length}, {"n", c.grid.n}};
  Json ev;
  ev["dt"] = c.evolve.dt;
  ev["T"] = c.evolve.T;
  ev["observer_stride"] = c.evolve.observer_stride;
  ev["blowup_factor"] = c.evolve.blowup_factor;
  ev["dealias"] = c.evolve.dealias_for(c.spec);
  if (c.evolve.sponge)
    ev["sponge"] = {{"width", c.evolve.sponge->width},
                    {"strength", c.evolve.sponge->strength},
                    {"stride", c.evolve.sponge->stride}};
  ev["frame"] = {{"mode", c.frame.mode == FramePolicy::Mode::track ? "track" : "fixed"},
                 {"velocity", c.frame.velocity},
                 {"threshold", c.frame.threshold}};
  j["evolve"] = ev;
  Json sol = Json::array();
  for (const SolitonParams& sp : c.solitons) sol.push_back({{"c", sp.c}, {"rho", sp.rho}});
  Json init;
  init["solitons"] = sol;
  const PerturbationConfig& pc = c.perturbation;
  Json pert;
  pert["shape"] = to_string(pc.shape);
  pert["alpha"] = pc.alpha;
  if (pc.target) pert["target"] = *pc.target;
  pert["offset"] = pc.offset;
  pert["width"] = pc.width;
  pert["band"] = pc.band;
  init["perturbation"] = pert;
  j["initial"] = init;
  j["monitors"] = c.monitors;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["orthogonality"] = c.orthogonality == Orthogonality::moment ? "moment" : "derivative";
  const MonitorOptions& o = c.options;
  j["options"] = {{"virial_A", o.virial_A},
                  {"combination", o.combination},
                  {"monotone_floor", o.monotone_floor},
                  {"j_floor", o.j_floor},
                  {"tail_fraction", o.tail_fraction},
                  {"c_tolerance", o.c_tolerance},
                  {"shift_tolerance", o.shift_tolerance},
                  {"g1_tail_limit", o.g1_tail_limit},
                  {"conservation_tolerance", o.conservation_tolerance},
                  {"constants",
                   {{"I", o.constants.I},
                    {"M1", o.constants.M1},
                    {"E1", o.constants.E1},
                    {"M2", o.constants.M2},
                    {"E2", o.constants.E2},
                    {"virial", o.constants.virial},
                    {"J", o.constants.J}}}};
  return j;
}

Field initial_data(const ScenarioConfig& config) {
  Field u = soliton_sum(config.grid, config.spec, config.solitons);
  const PerturbationConfig& pc = config.perturbation;
  if (pc.shape == PerturbationShape::none || pc.alpha == 0.0) return u;
  Field v = shape_field(config);
  const double norm = h1_norm(v);
  if (!(norm > 0.0)) throw InvalidArgument("config: perturbation shape vanishes on the grid");
  double c = config.solitons[0].c;
  for (const SolitonParams& sp : config.solitons) c = std::min(c, sp.c);
  const double target = pc.alpha * std::pow(c, config.spec.q() + 0.5);
  v *= target / norm;
  u += v;
  return u;
}

}  // namespace gkdv
