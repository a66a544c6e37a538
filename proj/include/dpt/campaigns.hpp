#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpt/cumulant.hpp"
#include "dpt/exact.hpp"
#include "dpt/gaussian.hpp"
#include "dpt/model.hpp"
#include "dpt/oneloop.hpp"
#include "dpt/scaling.hpp"

// Parameter sweeps shared by the command-line front end and the acceptance driver.
namespace dpt::campaigns {

/// Base parameters of a symmetry class: kappa1 = 0 for Strong, `kappa1` otherwise.
ModelParams class_params(SymmetryClass c, double omega, double kappa1, double kappa2);

/// Comparison of one observable against a predicted power law.
struct ExponentCell {
  std::string observable;
  gaussian::Prediction predicted;
  std::optional<scaling::PowerLawFit> fit;
  /// Set when the prediction vanishes: the largest |value| over the sweep.
  std::optional<double> max_abs;
  bool exponent_match = false;
  /// Only meaningful when coefficient_checked.
  bool coefficient_match = false;
  bool coefficient_checked = false;
  double coefficient_ratio = 0.0;
  std::string note;
  bool pass() const { return exponent_match && (!coefficient_checked || coefficient_match); }
};

/// Fits `series` (sign-aware) and compares with `predicted`; a vanishing prediction is checked
/// as |value| <= zero_tol everywhere. Fit errors are recorded in the note.
ExponentCell compare(const std::string& observable, const scaling::ScalingSeries& series,
                     const gaussian::Prediction& predicted, double exponent_tol,
                     std::optional<double> coefficient_tol, const scaling::FitRules& rules = {},
                     double zero_tol = 1e-10);

// ---------------------------------------------------------------- Gaussian eps sweeps

struct GaussianPoint {
  double eps = 0.0;
  double lambda = 0.0;
  gaussian::GaussianReport report;
};

/// Gaussian fluctuations at lambda = lambda_c -+ eps (normal / superradiant side).
std::vector<GaussianPoint> gaussian_eps_sweep(const ModelParams& base, Phase phase, const std::vector<double>& eps,
                                              int workers = 1);

/// delta_n, Re delta_m, Im delta_m, purity and ADR against eps.
std::vector<scaling::ScalingSeries> gaussian_series(const std::vector<GaussianPoint>& pts);

struct Table1Options {
  double omega = 1.0;
  double kappa1 = 0.1;
  double kappa2 = 1e-9;
  double eps_lo = 1e-8;
  double eps_hi = 1e-4;
  int points = 41;
  double exponent_tol = 0.02;
  double coefficient_tol = 0.05;
  int workers = 1;
};

struct Table1Row {
  SymmetryClass symmetry = SymmetryClass::Weak;
  Phase phase = Phase::Normal;
  std::vector<GaussianPoint> sweep;
  /// delta_n, re_delta_m, im_delta_m, purity, adr.
  std::vector<ExponentCell> cells;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  /// The eps window reaches beyond 1e-3 lambda_c.
  bool outside_asymptotic_window = false;
  bool exponents_pass = false;
  /// Coefficients of delta_n, delta_m and purity (the ADR prefactor is judged separately).
  bool coefficients_pass = false;
};

Table1Result table1(const Table1Options& opt);

// ---------------------------------------------------------------- ADR

struct AdrOptions {
  SymmetryClass symmetry = SymmetryClass::Weak;
  Phase phase = Phase::Normal;
  double omega = 1.0;
  double kappa1 = 0.1;
  double eps_lo = 1e-8;
  double eps_hi = 1e-4;
  int points = 41;
  double kappa2_lo = 1e-9;
  double kappa2_hi = 1e-5;
  int kappa2_points = 17;
  bool gaussian = true;
  bool oneloop = true;
  bool exact = false;
  /// Exact level: eps sweep at this kappa2, kappa2 sweep at lambda_c.
  double exact_kappa2 = 1e-3;
  double exact_eps_lo = 1e-3;
  double exact_eps_hi = 1e-1;
  double exact_kappa2_lo = 1e-3;
  double exact_kappa2_hi = 1e-1;
  int exact_points = 9;
  int n_max = 60;
  int workers = 1;
};

struct AdrSeries {
  std::string level;
  /// "eps" or "kappa2".
  std::string control;
  scaling::ScalingSeries series;
  ExponentCell cell;
  /// Part of the pass/fail verdict (exact-level fits are reported only).
  bool acceptance = true;
};

struct AdrResult {
  std::vector<AdrSeries> series;
  std::vector<std::string> warnings;
  bool pass = false;
};

AdrResult adr(const AdrOptions& opt);

// ---------------------------------------------------------------- critical sweeps

struct CriticalOptions {
  SymmetryClass symmetry = SymmetryClass::Weak;
  double omega = 1.0;
  double kappa1 = 0.1;
  double kappa2_lo = 1e-9;
  double kappa2_hi = 1e-5;
  int points = 17;
  double exponent_tol = 0.02;
  cumulant::Closure closure = cumulant::Closure::Expanded;
};

/// Cumulant roots at lambda_c by continuation from kappa2_hi down to kappa2_lo (ascending output).
std::vector<cumulant::SweepPoint> cumulant_critical_sweep(const CriticalOptions& opt);

struct Table2Result {
  SymmetryClass symmetry = SymmetryClass::Weak;
  std::vector<cumulant::SweepPoint> cumulant;
  /// delta_n, re_delta_m, im_delta_m, purity against kappa2 (cumulant route).
  std::vector<ExponentCell> cumulant_cells;
  oneloop::Table2Report oneloop;
  std::size_t failures = 0;
  bool cumulant_pass = false;
  bool oneloop_pass = false;
};

Table2Result table2(const CriticalOptions& opt);

// ---------------------------------------------------------------- collapse

struct CollapseOptions {
  SymmetryClass symmetry = SymmetryClass::Weak;
  double omega = 1.0;
  double kappa1 = 0.1;
  std::vector<double> kappa2{1e-9, 1e-8, 1e-7};
  /// Defaults per class: 1/2 weak, 2/3 strong.
  std::optional<double> zeta_x;
  double nu_x = 1.0;
  /// Largest eps of each sweep; defaults 5e-4 weak, 2e-4 strong.
  std::optional<double> eps_max;
  /// Smallest scaled distance x = eps kappa2^-zeta attempted.
  double x_min = 0.2;
  int points = 40;
  double perturbation = 0.05;
  double spread_tol = 0.05;
  cumulant::Closure closure = cumulant::Closure::Expanded;
  int workers = 1;
};

struct CollapseRun {
  /// Superradiant broken-branch chain per kappa2, from large to small eps.
  std::vector<std::vector<cumulant::SweepPoint>> chains;
  std::vector<scaling::CollapseCurve> curves;
  scaling::CollapseResult result;
  scaling::CollapseResult minus;
  scaling::CollapseResult plus;
  /// Curves that kept fewer than eight broken-branch points.
  std::size_t failures = 0;
  std::size_t attempted = 0;
  bool spread_pass = false;
  bool optimality_pass = false;
};

CollapseRun collapse(const CollapseOptions& opt);

// ---------------------------------------------------------------- coherence number

struct CoherenceOptions {
  SymmetryClass symmetry = SymmetryClass::Weak;
  double omega = 1.0;
  double kappa1 = 0.1;
  double eps_lo = 1e-8;
  double eps_hi = 1e-4;
  int eps_points = 41;
  double kappa2_lo = 1e-9;
  double kappa2_hi = 1e-5;
  int kappa2_points = 17;
  cumulant::Closure closure = cumulant::Closure::Expanded;
};

struct CoherenceRun {
  scaling::CoherenceInputs inputs;
  scaling::CoherenceResult result;
  double expected_xi = 0.0;
  /// Systematic budget of one route's estimate of xi (finite-window and finite-kappa2 corrections).
  double tolerance = 0.0;
  /// hypot of both routes' errors, each the budget combined with the fit error.
  double combined_error = 0.0;
  bool static_pass = false;
  /// |xi - xi_t| <= combined_error. result.consistent is the fit-error-only comparison.
  bool consistent = false;
  bool pass = false;
};

/// Static route: Gaussian delta_n vs eps (normal phase) and cumulant delta_n vs kappa2 at lambda_c.
/// Dynamic route: Gaussian ADR vs eps (normal phase weak, superradiant strong) and one-loop ADR vs kappa2.
CoherenceRun coherence(const CoherenceOptions& opt);

// ---------------------------------------------------------------- eps sweeps of the moment equations

struct SuppOptions {
  SymmetryClass symmetry = SymmetryClass::Weak;
  double omega = 1.0;
  double kappa1 = 0.1;
  double kappa2 = 1e-12;
  double eps_lo = 1e-6;
  double eps_hi = 1e-4;
  int points = 21;
  double exponent_tol = 0.03;
  cumulant::Closure closure = cumulant::Closure::Expanded;
};

struct SuppPhaseRun {
  Phase phase = Phase::Normal;
  /// Continuation chain from eps_hi towards lambda_c.
  std::vector<cumulant::SweepPoint> chain;
  /// |<a>| (superradiant only), delta_n, re_delta_m, im_delta_m, purity.
  std::vector<ExponentCell> cells;
};

struct SuppResult {
  std::vector<SuppPhaseRun> phases;
  std::size_t failures = 0;
  std::size_t attempted = 0;
  bool pass = false;
};

SuppResult supp_figs(const SuppOptions& opt);

// ---------------------------------------------------------------- exact oracle

struct OracleOptions {
  exact::LindbladRates weak{1.0, 0.3, 0.2, 0.1};
  /// kappa1 = 0 companion for the degeneracy check.
  exact::LindbladRates strong{1.0, 0.3, 0.0, 0.1};
  int n_max = 40;
  double tolerance = 0.05;
  cumulant::Closure closure = cumulant::Closure::Expanded;
};

struct OracleResult {
  exact::ConvergedSteadyState exact;
  cumulant::Branch cumulant;
  double rel_n = 0.0;
  double rel_m = 0.0;
  bool certificate = false;
  int strong_kernel_dim = 0;
  double strong_adr = 0.0;
  bool agree = false;
  bool parity = false;
  bool degenerate = false;
};

OracleResult oracle(const OracleOptions& opt);

}  // namespace dpt::campaigns
