#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpt/model.hpp"
#include "dpt/ode.hpp"

namespace dpt::cumulant {

/// Closure of <a^dag a^3>: Expanded uses 3nm - 2|a|^2 a^2 (parity covariant),
/// Printed uses 3nm - 2 a |a|^2.
enum class Closure { Expanded, Printed };
std::string_view to_string(Closure c);
Closure closure_from_string(std::string_view s);

struct MomentState {
  std::complex<double> a_mean;
  double n = 0.0;
  std::complex<double> m;

  double delta_n() const { return n - std::norm(a_mean); }
  std::complex<double> delta_m() const { return m - a_mean * a_mean; }
  /// Gaussian-state purity of the fluctuations; NaN outside the physical region.
  double purity() const;
  /// n >= 0 and |m| <= n + 1/2 + tol.
  bool physical(double tol = 1e-9) const;
  /// physical() and the fluctuations describe a Gaussian state (purity in (0, 1]).
  bool admissible(double tol = 1e-9) const;
};

/// Real coordinates (Re a, Im a, delta_n, Re delta_m, Im delta_m) used by the solvers.
using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

Vector5 to_fluctuation(const MomentState& s);
MomentState from_fluctuation(const Vector5& y);

/// Time derivative (d<a>/dt, dn/dt, dm/dt) of the second-order truncated moment equations,
/// returned in a MomentState.
MomentState cumulant_rhs(const MomentState& s, const ModelParams& p, Closure c = Closure::Expanded);

/// Same equations in fluctuation coordinates: d/dt (<a>, delta_n, delta_m).
Vector5 fluctuation_rhs(const Vector5& y, const ModelParams& p, Closure c = Closure::Expanded);

/// Analytic Jacobian of fluctuation_rhs.
Matrix5 fluctuation_jacobian(const Vector5& y, const ModelParams& p, Closure c = Closure::Expanded);

/// Residual of fluctuation_rhs with the <a> rows divided by R (1 + |a|) and the rest by
/// R (1 + |delta_n|), R = omega + 2 lambda + kappa1 + kappa2.
Vector5 scaled_residual(const Vector5& y, const ModelParams& p, Closure c = Closure::Expanded);

enum class BranchTag { Symmetric, BrokenPlus, BrokenMinus };
std::string_view to_string(BranchTag t);

struct Branch {
  MomentState state;
  BranchTag tag = BranchTag::Symmetric;
  /// Every eigenvalue of the Jacobian has negative real part.
  bool stable = false;
  /// Broken branches at finite kappa2 are never the true steady state.
  bool metastable = false;
  double max_real_eigenvalue = 0.0;
  /// Infinity norm of the scaled residual.
  double residual = 0.0;
  int iterations = 0;
  /// False when only an inadmissible root was found (outside the truncation's validity).
  bool physical = true;
};

struct SolverOptions {
  Closure closure = Closure::Expanded;
  double tol = 1e-11;
  int max_newton = 100;
  int max_ptc = 20'000;
  /// Explicit integration time allowed as the last fallback.
  double t_fallback = 1e4;
  bool gaussian_seeds = true;
};

BranchTag tag_for(std::complex<double> a_mean);

/// Damped Newton from a seed, then pseudo-transient continuation, then explicit time evolution
/// followed by Newton; the first admissible root wins. A seed with <a> = 0 is solved in the
/// parity-closed 3-dim subsystem.
/// Throws RootNotFound, or JacobianSingular when the Newton matrix is numerically singular.
Branch solve_from(const ModelParams& p, const MomentState& seed, const SolverOptions& opt = {});

struct BranchSet {
  std::vector<Branch> branches;
  /// Per-seed failures (not fatal).
  std::vector<std::string> failures;
  /// Some seed hit a singular Jacobian.
  bool critical_window = false;
};

/// Roots from the vacuum seed and the +-alpha mean-field seeds (delta_n = delta_m = 0), with
/// Gaussian-dressed seeds as fallback; deduplicated and ordered Symmetric, BrokenPlus, BrokenMinus.
BranchSet steady_state_branches(const ModelParams& p, const SolverOptions& opt = {});

struct TrajectoryPoint {
  double t = 0.0;
  MomentState state;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  MomentState final_state;
  long steps = 0;
};

/// Adaptive Dormand-Prince integration of the moment equations; records every `record_every`-th
/// accepted step. Throws StiffnessAbort when the step size collapses.
Trajectory time_evolve(const MomentState& s0, const ModelParams& p, double t_final,
                       const ode::Tolerances& tol = {}, Closure c = Closure::Expanded, int record_every = 1);

struct SweepPoint {
  ModelParams params;
  Branch branch;
  bool ok = false;
  std::string error;
};

/// Natural-parameter continuation along a sequence of parameter points: each root seeds the next,
/// with a geometric predictor from the previous two. The first point is seeded by `seed`.
std::vector<SweepPoint> continuation(const std::vector<ModelParams>& path, const MomentState& seed,
                                     const SolverOptions& opt = {});

/// Seed for the branch with the given tag: vacuum for Symmetric, +-alpha mean field dressed with the
/// Gaussian fluctuations otherwise.
MomentState branch_seed(const ModelParams& p, BranchTag tag);

}  // namespace dpt::cumulant
