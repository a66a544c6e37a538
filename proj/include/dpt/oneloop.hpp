#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dpt/gaussian.hpp"
#include "dpt/model.hpp"
#include "dpt/scaling.hpp"

namespace dpt::oneloop {

struct Options {
  double mixing = 0.5;
  int max_iter = 10'000;
  /// Relative fixed-point residual required for convergence.
  double fp_tol = 1e-12;
  /// Switch from mixing to Newton once the relative residual is below this.
  double polish_threshold = 1e-6;
  double min_mixing = 1e-8;
};

/// Self-consistent normal-sector state at the critical point.
struct OneLoopState {
  double n = 0.0;
  std::complex<double> m;
  /// kappa1 + 2 kappa2 n.
  double gamma_tilde = 0.0;
  /// kappa2 m / 2.
  std::complex<double> rho_tilde;
  bool converged = false;
  int iterations = 0;
  /// max(|n' - n|, |m' - m|) / max(1, n) at the returned point.
  double residual = 0.0;
  double purity = 1.0;
  /// -max Re eigenvalue of the corrected drift.
  double adr = 0.0;
  gaussian::CovarianceMatrix covariance;
};

/// Drift and diffusion with damping kappa1 + 2 kappa2 n and squeezing shift kappa2 m / 2 (alpha = 0).
gaussian::DriftDiffusion<double> corrected_drift(const ModelParams& p, double n, std::complex<double> m);

/// Damped fixed-point iteration of (n, m) -> covariance of the corrected drift, seeded at
/// (0, -i lambda / (i omega + kappa1 + kappa2)), finished by Newton steps.
/// Requires lambda = lambda_c within the phase tolerance (InvalidParameter otherwise).
/// Throws NoConvergence or NegativeOccupation.
OneLoopState self_consistent_critical_point(const ModelParams& p, const Options& opt = {});

enum class Observable { DeltaN, ReDeltaM, ImDeltaM, Purity, Adr };
std::string_view to_string(Observable o);
inline constexpr Observable kObservables[] = {Observable::DeltaN, Observable::ReDeltaM, Observable::ImDeltaM,
                                              Observable::Purity, Observable::Adr};

double observable_value(const OneLoopState& s, Observable o);

/// Critical amplitudes c kappa2^e of the non-Gaussian fluctuations.
gaussian::Prediction table2_prediction(const ModelParams& p, Observable o);

struct CriticalScalingRow {
  Observable observable = Observable::DeltaN;
  double predicted_coefficient = 0.0;
  double predicted_exponent = 0.0;
  double measured_coefficient = 0.0;
  double measured_exponent = 0.0;
  scaling::PowerLawFit fit;
  bool exponent_match = false;
  /// measured / predicted coefficient.
  double coefficient_ratio = 0.0;
};

struct Table2Report {
  SymmetryClass symmetry = SymmetryClass::Weak;
  std::vector<double> kappa2;
  std::vector<OneLoopState> states;
  std::vector<CriticalScalingRow> rows;
  std::vector<std::string> warnings;
};

/// Solves at lambda_c for every kappa2 in the grid and fits each observable against kappa2.
/// Grid points whose solve fails are skipped with a warning.
/// Throws InsufficientRange when the grid spans fewer than three decades.
Table2Report table2_report(const ModelParams& p, const std::vector<double>& kappa2_grid,
                           double exponent_tol = 0.02, const Options& opt = {});

}  // namespace dpt::oneloop
