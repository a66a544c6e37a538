#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dpt::scaling {

/// (control, value) points of one observable; control is eps or kappa2.
struct ScalingSeries {
  std::vector<double> control;
  std::vector<double> values;
  std::string label;
};

struct FitRules {
  std::size_t min_points = 8;
  double min_decades = 2.0;
  double accept_r_squared = 0.999;
};

struct PowerLawFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double stderr_exponent = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::size_t points = 0;
  /// r_squared >= accept_r_squared.
  bool accepted = false;
};

/// Least squares line through (log control, log value).
/// Throws InsufficientRange for short or narrow series (or non-monotone control),
/// NonPositiveValue for controls or values <= 0.
PowerLawFit fit_power_law(const ScalingSeries& s, const FitRules& rules = {});

/// Same fit on |values| with the sign of the data restored on the coefficient.
/// Throws NonPositiveValue when values change sign or vanish.
PowerLawFit fit_signed_power_law(const ScalingSeries& s, const FitRules& rules = {});

/// Restriction of a series to controls in [lo, hi].
ScalingSeries window(const ScalingSeries& s, double lo, double hi);

/// Largest exponent drift between the full-window fit and nested windows that keep the
/// small-control end and drop the top half and full decade. Windows that no longer satisfy
/// the fit rules are skipped.
double window_sensitivity(const ScalingSeries& s, const FitRules& rules = {});

/// Log-spaced grid of n points from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

struct CollapseCurve {
  double kappa2 = 0.0;
  /// control eps = |lambda - lambda_c|, values delta_n.
  ScalingSeries series;
};

struct MasterPoint {
  double x = 0.0;
  /// Median of the rescaled curves at x.
  double f = 0.0;
  /// (max - min) / median across curves at x.
  double spread = 0.0;
};

struct CollapseResult {
  double zeta_x = 0.0;
  double nu_x = 0.0;
  double xi = 0.0;
  double spread = 0.0;
  std::pair<double, double> overlap{0.0, 0.0};
  std::vector<MasterPoint> master_curve;
  /// log-log slope of the master curve over its upper third; approaches -1 for large x.
  double tail_slope = 0.0;
};

struct CollapseOptions {
  int bins = 24;
};

/// Rescale each curve to x = eps^nu_x kappa2^-zeta_x, y = kappa2^zeta_x delta_n and compare on a
/// log-spaced grid over the common x range (log-log interpolation).
/// Throws InvalidParameter for fewer than three distinct kappa2, EmptyOverlap when the ranges do not overlap.
CollapseResult collapse(const std::vector<CollapseCurve>& data, double zeta_x, double nu_x,
                        const CollapseOptions& opt = {});

struct ExponentEstimate {
  double value = 0.0;
  /// max(fit stderr, window sensitivity).
  double error = 0.0;
  PowerLawFit fit;
};

/// Exponent with uncertainty; sign flips the slope (use -1 for diverging observables).
ExponentEstimate estimate_exponent(const ScalingSeries& s, double sign, const FitRules& rules = {});

struct CoherenceInputs {
  /// delta_n vs eps at fixed small kappa2 (or the Gaussian limit).
  ScalingSeries static_eps;
  /// delta_n vs kappa2 at lambda_c.
  ScalingSeries static_kappa2;
  /// ADR vs eps.
  ScalingSeries dynamic_eps;
  /// ADR vs kappa2 at lambda_c.
  ScalingSeries dynamic_kappa2;
};

struct CoherenceResult {
  ExponentEstimate nu_x, zeta_x, nu_t, zeta_t;
  double xi = 0.0;
  double xi_error = 0.0;
  double xi_t = 0.0;
  double xi_t_error = 0.0;
  /// |xi - xi_t| within the combined uncertainty.
  bool consistent = false;
};

/// xi = nu_x / zeta_x from the static fits and nu_t / zeta_t from the ADR fits.
CoherenceResult coherence_number(const CoherenceInputs& in, const FitRules& rules = {});

}  // namespace dpt::scaling
