#include "dpt/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dpt/errors.hpp"
#include "dpt/gaussian.hpp"

namespace dpt {

std::string_view to_string(SymmetryClass c) { return c == SymmetryClass::Weak ? "weak" : "strong"; }

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Normal: return "normal";
    case Phase::Superradiant: return "superradiant";
    case Phase::Critical: return "critical";
  }
  return "?";
}

ModelParams::ModelParams(double omega, double lambda, double kappa1, double kappa2)
    : omega_(omega), lambda_(lambda), kappa1_(kappa1), kappa2_(kappa2) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be > 0, got " + std::to_string(omega));
  if (!(lambda >= 0.0)) throw InvalidParameter("lambda must be >= 0, got " + std::to_string(lambda));
  if (!(kappa1 >= 0.0)) throw InvalidParameter("kappa1 must be >= 0, got " + std::to_string(kappa1));
  if (!(kappa2 > 0.0)) throw InvalidParameter("kappa2 must be > 0, got " + std::to_string(kappa2));
}

double critical_lambda(const ModelParams& p) { return 0.5 * std::hypot(p.omega(), p.kappa1()); }

SymmetryClass classify_symmetry(const ModelParams& p) {
  return p.kappa1() == 0.0 ? SymmetryClass::Strong : SymmetryClass::Weak;
}

double phase_tolerance(const ModelParams& p) { return 1e-12 * critical_lambda(p); }

double distance_to_critical(const ModelParams& p) { return p.lambda() - critical_lambda(p); }

Phase classify_phase(const ModelParams& p) {
  const double d = distance_to_critical(p);
  const double tol = phase_tolerance(p);
  if (d < -tol) return Phase::Normal;
  if (d > tol) return Phase::Superradiant;
  return Phase::Critical;
}

std::complex<double> meanfield_residual(const ModelParams& p, std::complex<double> alpha) {
  constexpr std::complex<double> i{0.0, 1.0};
  return -(i * p.omega() + p.kappa1()) * alpha - 2.0 * i * p.lambda() * std::conj(alpha) -
         2.0 * p.kappa2() * std::norm(alpha) * alpha;
}

namespace {

// 4 lambda^2 - omega^2 - kappa1^2 written as a product to survive lambda -> lambda_c.
double threshold_excess(const ModelParams& p) {
  const double lc = critical_lambda(p);
  return 4.0 * (p.lambda() - lc) * (p.lambda() + lc);
}

bool is_stable(const ModelParams& p, std::complex<double> alpha) {
  const auto dd = gaussian::drift_diffusion(p, alpha);
  const double scale = p.omega() + p.kappa1() + 2.0 * p.lambda() + dd.gamma;
  return gaussian::max_real_eigenvalue(dd.drift) <= 1e-12 * scale;
}

}  // namespace

std::complex<double> broken_amplitude(const ModelParams& p) {
  const double excess = threshold_excess(p);
  if (!(excess > 0.0)) return {0.0, 0.0};
  const double root = std::sqrt(excess + p.kappa1() * p.kappa1());  // sqrt(4 lambda^2 - omega^2)
  const double r2 = excess / (root + p.kappa1()) / (2.0 * p.kappa2());
  // e^{-2 i theta} = -(kappa1 + 2 kappa2 r^2 + i omega) / (2 i lambda)
  const std::complex<double> phase_factor =
      -std::complex<double>(p.kappa1() + 2.0 * p.kappa2() * r2, p.omega()) /
      std::complex<double>(0.0, 2.0 * p.lambda());
  const double theta = -0.5 * std::arg(phase_factor);
  return std::polar(std::sqrt(r2), theta);
}

std::vector<MeanFieldSolution> meanfield_steady_state(const ModelParams& p) {
  std::vector<MeanFieldSolution> out;
  out.push_back({{0.0, 0.0}, 0.0, is_stable(p, {0.0, 0.0})});
  const std::complex<double> alpha = broken_amplitude(p);
  if (alpha != std::complex<double>(0.0, 0.0)) {
    const bool stable = is_stable(p, alpha);
    out.push_back({alpha, std::norm(alpha), stable});
    out.push_back({-alpha, std::norm(alpha), stable});
  }
  return out;
}

double meanfield_amplitude_asymptote(const ModelParams& p, double eps) {
  if (classify_symmetry(p) == SymmetryClass::Weak)
    return std::sqrt(2.0 * critical_lambda(p) / (p.kappa1() * p.kappa2())) * std::sqrt(eps);
  return std::pow(p.omega(), 0.25) * std::pow(eps, 0.25) / std::sqrt(p.kappa2());
}

double printed_amplitude_asymptote(const ModelParams& p, double eps) {
  return meanfield_amplitude_asymptote(p, eps) / std::numbers::sqrt2;
}

}  // namespace dpt
