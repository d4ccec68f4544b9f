#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpkdv/bridge.hpp"
#include "gpkdv/fit.hpp"
#include "gpkdv/presets.hpp"

namespace gpkdv {

inline constexpr int kStudyConfigVersion = 1;
inline constexpr int kReportVersion = 1;

struct GridConfig {
  /// Target slow spacing; the point count is the next power of two.
  double slow_spacing = 0.1;
  /// Slow half-width added on both sides of the distance travelled by the two waves.
  double margin = 30.0;
  /// Fixed slow window length; overrides the automatic size.
  std::optional<double> slow_length;
};

struct SolverConfig {
  double gp_dt = 0.02;
  double kdv_dtau = 1e-4;
  std::size_t check_every = 500;
  double resolution_tol = 1e-10;
  double kdv_cfl = 1.0;
};

struct WaveConfig {
  /// Runs cover t in [0, time_factor / eps^3].
  double time_factor = 0.1;
  int samples = 10;
  /// Fixed value of t * eps for the scaling fit.
  double product = 10.0;
  /// Fixed t for the companion scaling fit.
  double fixed_time = 10.0;
};

struct ResidualConfig {
  double epsilon = 0.1;
  double tau_center = 0.05;
  double dtau = 1e-4;
  /// GP steps per half interval dtau / 2.
  int substeps = 20;
};

struct PresetSpec {
  std::string name = "sech2";
  PresetParams params;
};

struct StudyConfig {
  int version = kStudyConfigVersion;
  std::string study;
  std::vector<double> epsilons{0.2, 0.141, 0.1};
  double tau_final = 0.3;
  int tau_samples = 6;
  std::vector<int> ks{2};
  std::vector<Frame> frames{Frame::minus, Frame::plus};
  PresetSpec preset;
  GridConfig grid;
  SolverConfig solver;
  WaveConfig wave;
  ResidualConfig residual;
  /// Sobolev order of the bound monitor; series above envelope_factor times their
  /// initial value are flagged.
  int monitor_k = 2;
  double envelope_factor = 2.0;
  std::string output_dir;
  int workers = 0;
};

/// Parses and validates a config object. Unknown keys and wrong types raise
/// ValidationError naming the key; epsilons are sorted descending.
StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StudyConfig& cfg);
/// Reads a config file: IoError if unreadable, ValidationError with the byte offset on
/// a parse error.
StudyConfig load_study_config(const std::string& path);
void validate(StudyConfig& cfg);

/// Slow tau sample times 0, tau_final / tau_samples, ..., tau_final.
std::vector<double> tau_grid(const StudyConfig& cfg);

/// Slow and fast grids for one epsilon run reaching fast time t_max. The slow window
/// is centered at 0 and the fast grid is its exact pull-back with the same point count.
struct RunGrids {
  SpectralGrid slow;
  SpectralGrid fast;
};
RunGrids run_grids(const GridConfig& g, double epsilon, double t_max);

/// Half-width of the region where |N0| + |W0| exceeds rel_tol times its maximum.
double support_radius(const RealField& n0, const RealField& w0, double rel_tol = 1e-10);

struct RunInfo {
  double epsilon = 0.0;
  std::string label;
  double slow_length = 0.0;
  std::size_t points = 0;
  double t_final = 0.0;
  std::size_t gp_steps = 0;
  double wall_seconds = 0.0;
};

/// Relative drift (absolute when the initial value is 0) between the first and last state.
struct InvariantAudit {
  double epsilon = 0.0;
  double energy = 0.0;
  double energy_drift = 0.0;
  double e2_drift = 0.0;
  double e3_drift = 0.0;
  double e4_drift = 0.0;
  double m_plus_drift = 0.0;
  double m_minus_drift = 0.0;
};

struct ErrorSample {
  double epsilon = 0.0;
  double tau = 0.0;
  Frame frame = Frame::minus;
  int k = 0;
  /// ||U - U_kdv||_{H^k} (convergence) or n_error + w_error (unidirectional).
  double hk_error = 0.0;
  /// int_0^tau ||d^k Z||^2, trapezoid over the samples.
  double cumulative = 0.0;
  double n_error = 0.0;
  double w_error = 0.0;
  /// ||V(., tau)||_{H^k}.
  double v_norm = 0.0;
};

struct OrderFit {
  Frame frame = Frame::minus;
  int k = 0;
  double tau = 0.0;
  std::string quantity;
  double order = 0.0;
  double r2 = 0.0;
};

struct EnvelopeSummary {
  Frame frame = Frame::minus;
  int k = 0;
  EnvelopeFit fit;
  double collapse = 1.0;
};

/// Unidirectional runs with a fixed counter-wave: error at tau_final against ||V0||.
struct PlateauSummary {
  Frame frame = Frame::minus;
  int k = 0;
  double v0_norm = 0.0;
  std::vector<double> ratios;  // hk_error / v0_norm per epsilon
  double spread = 1.0;         // max / min of ratios
  double eps2_coef = 0.0;      // fit hk_error = eps2_coef eps^2 + plateau
  double plateau = 0.0;
};

struct BoundSample {
  double epsilon = 0.0;
  double tau = 0.0;
  double hk_n = 0.0;
  double eps_dk1_n = 0.0;
  double hk_dtheta = 0.0;
  double m_n = 0.0;
  double m_dtheta = 0.0;
  double gamma = 0.0;
};

struct BoundSeries {
  double epsilon = 0.0;
  std::string series;
  /// Baseline: the tau = 0 value, or for the H^k and m_norm pairs of N and Theta_x the
  /// root sum of squares of both tau = 0 values.
  double initial = 0.0;
  double max_ratio = 1.0;
  /// Smallest K with v(tau) <= initial * exp(K |tau|).
  double growth_constant = 0.0;
  bool flagged = false;
};

struct BoundReport {
  int k = 2;
  std::vector<BoundSample> samples;
  std::vector<BoundSeries> series;
  /// Smallest S_eps with m_norm(N)(tau) <= m_norm(N0) + S_eps |tau|, per epsilon.
  std::vector<double> epsilons;
  std::vector<double> m_slopes;
  double m_slope = 0.0;         // max over epsilon: one slope bounding every run
  double m_slope_spread = 1.0;  // max / min over epsilon
};

/// gamma = ||d^k N||^2 + ||M^{1/2} d^k Y||^2, M = 1 - eps^2 N/6, Y = Theta_x + (i eps/sqrt2) N_x / M.
double gamma_functional(const SlowFrame& sf, int k);

/// Bound diagnostics along one run's slow frames (sorted by tau, first at tau = 0).
BoundReport bound_monitor(const std::vector<SlowFrame>& series, int k, double envelope_factor = 2.0);

struct ConvergenceReport {
  std::string study;
  StudyConfig config;
  std::vector<RunInfo> runs;
  std::vector<ErrorSample> errors;
  std::vector<OrderFit> orders;
  std::vector<EnvelopeSummary> envelopes;
  std::vector<PlateauSummary> plateaus;
  std::vector<InvariantAudit> audit;
  BoundReport bounds;
};

/// Both-frame KdV approximation: U^- against KdV from U^-(., 0), U^+ against the
/// time-reversed KdV from U^+(., 0), for every epsilon, tau sample and k.
ConvergenceReport kdv_convergence_study(const StudyConfig& cfg);

/// N and Theta_x against KdV evolutions of N0 and Theta0_x in each frame.
ConvergenceReport unidirectional_study(const StudyConfig& cfg);

struct WaveSample {
  double epsilon = 0.0;
  double t = 0.0;
  double error = 0.0;
};

struct WaveLimitReport {
  StudyConfig config;
  std::vector<RunInfo> runs;
  std::vector<WaveSample> samples;
  /// Per epsilon: error against t over [0, time_factor / eps^3].
  std::vector<double> epsilons;
  std::vector<LineFit> linear_fits;
  /// Error at t = product / eps and at t = fixed_time, with exponents in eps.
  std::vector<double> product_errors;
  std::vector<double> fixed_time_errors;
  std::optional<LineFit> product_fit;
  std::optional<LineFit> fixed_time_fit;
};

/// (n, w) = (6 eta / eps^2, 6 sqrt2 phi_x / eps^2) in y = eps x against the d'Alembert
/// solution with profiles N^+- = (N0 -+ W0)/2 moving at -+ sqrt2 in s = eps t.
WaveLimitReport wave_limit_study(const StudyConfig& cfg);

struct ResidualRow {
  Frame frame = Frame::minus;
  std::string equation;
  double coarse = 0.0;
  double fine = 0.0;
  double ratio = 0.0;
};

struct ResidualReport {
  StudyConfig config;
  double transport = 0.0;
  double v_forcing = 0.0;
  std::vector<ResidualRow> rows;
};

/// Slow-system residuals at tau_center from spacing dtau and dtau / 2.
ResidualReport residual_refinement_study(const StudyConfig& cfg);

/// CSV tables plus summary.json in `dir` (created if needed). Output bytes depend only on
/// the report contents; wall-clock times are written only when include_timings is set.
void write_report(const ConvergenceReport& report, const std::string& dir, bool include_timings = false);
void write_report(const WaveLimitReport& report, const std::string& dir, bool include_timings = false);
void write_report(const ResidualReport& report, const std::string& dir);

nlohmann::json summary_json(const ConvergenceReport& report);
nlohmann::json summary_json(const WaveLimitReport& report);
nlohmann::json summary_json(const ResidualReport& report);

}  // namespace gpkdv
