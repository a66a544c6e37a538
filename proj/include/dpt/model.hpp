#pragma once

#include <complex>
#include <string_view>
#include <vector>

namespace dpt {

enum class SymmetryClass { Weak, Strong };
enum class Phase { Normal, Superradiant, Critical };

std::string_view to_string(SymmetryClass c);
std::string_view to_string(Phase p);

/// Rates of the squeezed single-mode model, H = omega a^dag a + lambda (a^2 + a^dag^2),
/// jump operators sqrt(kappa1) a and sqrt(kappa2) a^2.
///
/// Construction rejects omega <= 0, lambda < 0, kappa1 < 0 and kappa2 <= 0.
class ModelParams {
 public:
  ModelParams(double omega, double lambda, double kappa1, double kappa2);

  double omega() const { return omega_; }
  double lambda() const { return lambda_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }

  ModelParams with_lambda(double lambda) const { return {omega_, lambda, kappa1_, kappa2_}; }
  ModelParams with_kappa1(double kappa1) const { return {omega_, lambda_, kappa1, kappa2_}; }
  ModelParams with_kappa2(double kappa2) const { return {omega_, lambda_, kappa1_, kappa2}; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double omega_;
  double lambda_;
  double kappa1_;
  double kappa2_;
};

/// lambda_c = sqrt(omega^2 + kappa1^2) / 2.
double critical_lambda(const ModelParams& p);

/// Strong iff kappa1 is exactly zero.
SymmetryClass classify_symmetry(const ModelParams& p);

/// Floating-point guard around lambda_c: 1e-12 * lambda_c.
double phase_tolerance(const ModelParams& p);
Phase classify_phase(const ModelParams& p);

/// Signed distance lambda - lambda_c.
double distance_to_critical(const ModelParams& p);

struct MeanFieldSolution {
  std::complex<double> amplitude;
  double occupation = 0.0;
  /// No eigenvalue of the linearized drift has positive real part (marginal counts as stable).
  bool stable = false;
};

/// Residual of 0 = -(i omega + kappa1) a - 2 i lambda a^* - 2 kappa2 |a|^2 a.
std::complex<double> meanfield_residual(const ModelParams& p, std::complex<double> alpha);

/// All semiclassical steady states: the trivial branch first, then the parity pair
/// (+alpha, -alpha) when lambda > lambda_c.
std::vector<MeanFieldSolution> meanfield_steady_state(const ModelParams& p);

/// Condensate amplitude +alpha of the superradiant pair, or 0 at or below threshold.
std::complex<double> broken_amplitude(const ModelParams& p);

/// Leading small-eps amplitude implied by the moment equations (eps = lambda - lambda_c > 0):
/// sqrt(2 lambda_c / (kappa1 kappa2)) eps^(1/2) when kappa1 > 0, omega^(1/4) eps^(1/4) / sqrt(kappa2) otherwise.
double meanfield_amplitude_asymptote(const ModelParams& p, double eps);

/// The printed asymptotic amplitude, sqrt(lambda_c/(kappa1 kappa2)) eps^(1/2) or
/// omega^(1/4) eps^(1/4) / sqrt(2 kappa2). Differs from the above by sqrt(2).
double printed_amplitude_asymptote(const ModelParams& p, double eps);

}  // namespace dpt
