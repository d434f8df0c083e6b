#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gkdv/evolve.hpp"
#include "gkdv/functionals.hpp"
#include "gkdv/modulation.hpp"

namespace gkdv {

using Json = nlohmann::ordered_json;

enum class ScenarioKind {
  single_soliton_asymptotics,
  two_soliton_decoupled,
  monotonicity_audit,
  virial_audit,
  shift_convergence
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& name);

/// derivative: Q_c'(x - rho) of the target soliton (a pure translation).
/// gaussian: exp(-(s/width)^2), s = x - rho - offset.
/// bump: exp(1 - 1/(1 - (s/width)^2)) on |s| < width, zero outside.
/// noise: seeded Fourier modes with |k| <= band times a Gaussian envelope.
enum class PerturbationShape { none, derivative, gaussian, bump, noise };

std::string to_string(PerturbationShape shape);
PerturbationShape parse_perturbation_shape(const std::string& name);

struct PerturbationConfig {
  PerturbationShape shape = PerturbationShape::none;
  /// Scaled so that |u0 - sum R_j|_{H^1} = alpha c^{q+1/2}, c the smallest speed.
  double alpha = 0.0;
  /// Soliton the perturbation is attached to; defaults to the slowest.
  std::optional<std::size_t> target;
  double offset = 0.0;
  double width = 1.0;
  double band = 1.0;
};

/// fixed: constant frame velocity. track: the frame follows the fastest
/// soliton, switching to its current speed whenever they differ by more
/// than threshold.
struct FramePolicy {
  enum class Mode { fixed, track };
  Mode mode = Mode::fixed;
  double velocity = 0.0;
  double threshold = 2e-3;
};

/// Multipliers of the slack kernels. Each monotone channel passes when its
/// increase between any two samples stays below floor + constant times the
/// integrated kernel.
struct SlackConstants {
  double I = 0.0;
  double M1 = 0.0;
  double E1 = 0.0;
  double M2 = 0.0;
  double E2 = 0.0;
  double virial = 0.0;
  double J = 0.0;
};

/// Frozen values; see calibration.cpp.
SlackConstants calibrated_constants();

struct MonitorOptions {
  /// Virial plateau scale.
  double virial_A = 5.0;
  /// Weight of the mass channel inside the combined energy channels.
  double combination = 0.01;
  /// Scaled by max(1, sup of the channel magnitude).
  double monotone_floor = 1e-8;
  double j_floor = 1e-6;
  /// Plateau tolerances on the last tenth of the horizon.
  double tail_fraction = 0.1;
  double c_tolerance = 1e-4;
  double shift_tolerance = 1e-2;
  double g1_tail_limit = 0.01;
  /// |mass + absorbed - mass(0)| / mass(0).
  double conservation_tolerance = 1e-3;
  SlackConstants constants = calibrated_constants();
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::single_soliton_asymptotics;
  NonlinearitySpec spec{2};
  Grid grid{80.0, 1024};
  EvolveConfig evolve;
  FramePolicy frame;
  /// Soliton speeds and frame positions at t = 0, fastest first.
  std::vector<SolitonParams> solitons;
  /// rho_1 - rho_2 for two solitons; overrides the second position.
  std::optional<double> separation;
  PerturbationConfig perturbation;
  std::vector<std::string> monitors;
  std::string output;
  std::uint64_t seed = 0;
  Orthogonality orthogonality = Orthogonality::moment;
  MonitorOptions options;

  /// Throws InvalidArgument on hard errors, returns soft warnings.
  std::vector<std::string> validate() const;
};

/// T_c = c^{-1/2 - 1/100}.
double decoupling_time(double c);

/// Unknown keys become warnings, or errors when strict.
ScenarioConfig parse_scenario(const Json& j, bool strict, std::vector<std::string>* warnings);
ScenarioConfig load_scenario(const std::filesystem::path& file, bool strict,
                             std::vector<std::string>* warnings);
/// Normalized echo; parse_scenario(to_json(c)) reproduces c.
Json to_json(const ScenarioConfig& config);

/// Default monitor list of a scenario kind.
std::vector<std::string> default_monitors(ScenarioKind kind);
const std::vector<std::string>& known_monitors();

/// Soliton sum plus the normalized perturbation on the config grid.
Field initial_data(const ScenarioConfig& config);

struct MonitorVerdict {
  std::string monitor;
  bool pass = true;
  std::string detail;
};

/// Residuals kept from a reference run, for the response of a perturbed run
/// against it.
struct BaselineRecord {
  std::vector<double> times;
  /// Frame velocity in force after each observation.
  std::vector<double> velocities;
  /// eta at every residual_stride-th observation, single precision.
  std::vector<std::vector<float>> eta;
  int residual_stride = 4;
};

struct RunOptions {
  /// Replay this frame schedule and report |eta - eta_base|_{H^1_c}.
  const BaselineRecord* baseline = nullptr;
  bool record_baseline = false;
  int residual_stride = 4;
};

struct RunArtifact {
  Json config;
  FunctionalSeries functionals;
  ModulationSeries modulation;
  /// One JSON object per monotone channel or audit.
  Json reports = Json::array();
  std::vector<MonitorVerdict> verdicts;
  Json summary = Json::object();
  std::vector<std::string> warnings;
  std::optional<BaselineRecord> baseline;

  bool pass() const;
};

RunArtifact run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// series.csv, modulation.csv, reports.json, summary.json.
void write_artifact(const RunArtifact& artifact, const std::filesystem::path& dir);

/// printf %.17g; non-finite values print as nan, inf, -inf.
std::string format_number(double v);

/// Grid over the keys p, c_ratio (c_2/c_1), alpha, separation, seed;
/// the cartesian product is taken in key order with the last key fastest.
struct SweepConfig {
  /// Scenario JSON each point is derived from; a "T_c" separation follows c_2.
  Json base;
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  /// Also run each point at alpha = 0 and report the response against it.
  bool baseline = false;
};

SweepConfig parse_sweep(const Json& j, bool strict, std::vector<std::string>* warnings);

struct SweepPoint {
  Json parameters;
  bool ok = false;
  std::string error;
  Json summary;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  /// Least-squares log-log slopes against c_2, and of tube distance against alpha.
  Json slopes = Json::object();
  bool pass() const;
};

/// Points run on a pool of workers; results keep grid order. Each point's
/// artifact goes to <out>/point_<index, three digits> when out is non-empty.
SweepResult sweep(const SweepConfig& config, int workers, const std::filesystem::path& out);

void write_sweep(const SweepResult& result, const SweepConfig& config,
                 const std::filesystem::path& dir);

/// Least-squares slope of log y against log x over entries with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct VerifyLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Built-in identity and coercivity checks on the soliton family.
std::vector<VerifyLine> verify_suite();

}  // namespace gkdv
