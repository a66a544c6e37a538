#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dpt/arnoldi.hpp"
#include "dpt/model.hpp"

namespace dpt::exact {

/// Rates for the master equation. Unlike ModelParams, kappa2 = 0 is allowed here so the
/// damped oscillator and pure single-photon loss can be built as reference cases.
struct LindbladRates {
  double omega = 1.0;
  double lambda = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;

  LindbladRates() = default;
  LindbladRates(double omega, double lambda, double kappa1, double kappa2);
  explicit LindbladRates(const ModelParams& p);

  /// omega + 2 lambda + kappa1 + kappa2: the unit used for eigenvalue thresholds.
  double rate_scale() const { return omega + 2.0 * lambda + kappa1 + kappa2; }
};

struct FockCutoff {
  int n_max = 60;
  explicit FockCutoff(int n = 60);
  int dim() const { return n_max + 1; }
};

/// Parity of (row, column) Fock indices of a vectorized density-matrix element.
enum class Sector { EvenEven = 0, OddOdd = 1, EvenOdd = 2, OddEven = 3 };

struct Liouvillian {
  /// Column-stacked superoperator: vec(rho)[i + dim j] = rho(i, j), vec(A rho B) = (B^T (x) A) vec(rho).
  SparseMatrixC matrix;
  int dim = 0;
  LindbladRates rates;

  int superdim() const { return dim * dim; }
  Sector sector(int index) const;
};

struct BuildOptions {
  /// Largest dim^2 that may be assembled.
  long max_superdim = 40'000;
};

/// L[rho] = -i[H, rho] + kappa1 D[a] rho + kappa2 D[a^2] rho with D[L] = 2 L rho L^dag - {L^dag L, rho},
/// H = omega a^dag a + lambda (a^2 + a^dag^2), truncated at n_max.
/// Throws DimensionOverflow when dim^2 exceeds the budget.
Liouvillian build_liouvillian(const LindbladRates& r, FockCutoff c, const BuildOptions& opt = {});

Eigen::MatrixXcd annihilation(int dim);
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int dim);
/// L applied to a density matrix.
Eigen::MatrixXcd apply(const Liouvillian& l, const Eigen::MatrixXcd& rho);
/// Adjoint superoperator applied to an operator (Heisenberg picture).
Eigen::MatrixXcd apply_adjoint(const Liouvillian& l, const Eigen::MatrixXcd& op);

struct SteadyStateOptions {
  double tail_tol = 1e-8;
  /// |lambda| below gap_tol * rate_scale counts as a kernel eigenvalue.
  double gap_tol = 1e-8;
  /// Sector blocks up to this size use a dense eigensolver, larger ones shift-invert Arnoldi.
  int dense_limit = 2500;
  int arnoldi_nev = 12;
};

struct SteadyStateResult {
  /// One physical state per trace-carrying parity sector (even first when kappa1 = 0).
  std::vector<Eigen::MatrixXcd> states;
  int kernel_dim = 0;
  /// Largest <n_max|rho|n_max> over the returned states.
  double tail_population = 0.0;
};

/// Physical steady states from the null space, solved per trace-carrying sector
/// (even+odd populations when kappa1 > 0, even and odd separately when kappa1 = 0).
/// Throws Unconverged when the tail certificate fails and DegenerateKernelAmbiguity when a
/// sector-projected state of a degenerate kernel is not positive.
SteadyStateResult steady_states(const Liouvillian& l, const SteadyStateOptions& opt = {});

struct Observables {
  std::complex<double> a_mean;
  double n = 0.0;
  std::complex<double> m;
  double delta_n = 0.0;
  std::complex<double> delta_m;
  double purity = 1.0;
};

Observables observables(const Eigen::MatrixXcd& rho);

struct LiouvillianSpectrum {
  /// Eigenvalues found, sorted by decreasing real part. Full spectrum for dense blocks,
  /// the eigenvalues nearest zero otherwise.
  std::vector<std::complex<double>> eigenvalues;
  double adr = 0.0;
  int kernel_dim = 0;
  /// Largest real part among all eigenvalues found.
  double max_real = 0.0;
  /// Eigenvalues per sector label when block-resolved.
  std::array<std::vector<std::complex<double>>, 4> by_sector;
  bool dense = true;
};

/// Spectrum, kernel dimension and ADR = -max{Re l : |l| > gap_tol}. The matrix is split into
/// the sectors it is block diagonal over (two for kappa1 > 0, four for kappa1 = 0).
LiouvillianSpectrum spectrum_and_adr(const Liouvillian& l, const SteadyStateOptions& opt = {});

struct ParityReport {
  /// Frobenius norm of matrix elements connecting different coherence sectors.
  double off_block_norm = 0.0;
  /// max over random Hermitian X of ||L[Pi X Pi] - Pi L[X] Pi||_max.
  double weak_residual = 0.0;
  int samples = 0;
  bool block_diagonal = false;
  bool weak_covariant = false;
};

ParityReport parity_block_check(const Liouvillian& l, int samples = 20, unsigned seed = 12345);

struct CutoffPoint {
  int n_max = 0;
  Observables obs;
  double tail_population = 0.0;
};

struct ConvergedSteadyState {
  Eigen::MatrixXcd rho;
  Observables obs;
  int n_max = 0;
  int kernel_dim = 0;
  double tail_population = 0.0;
  /// max relative change of n and |m| between n_max and 1.5 n_max.
  double cutoff_change = 0.0;
  bool cutoff_flagged = false;
};

struct ConvergenceOptions {
  int initial_n_max = 60;
  double convergence_tol = 1e-6;
  BuildOptions build;
  SteadyStateOptions steady;
};

/// Unique steady state with the cutoff doubled until the tail certificate passes, plus a
/// comparison against 1.5 n_max. Throws Unconverged when the memory budget is reached first.
ConvergedSteadyState converged_steady_state(const LindbladRates& r, const ConvergenceOptions& opt = {});

/// Observables at each cutoff (for cutoff extrapolation reports).
std::vector<CutoffPoint> convergence_study(const LindbladRates& r, const std::vector<int>& cutoffs,
                                           const SteadyStateOptions& opt = {});

struct PropagationResult {
  Eigen::MatrixXcd rho;
  double t = 0.0;
  long steps = 0;
  /// ||L rho||_2 at the final time.
  double stationarity = 0.0;
};

/// Explicit time propagation of d rho/dt = L rho from rho0 until ||L rho|| < stationarity_tol or t_max.
PropagationResult propagate(const Liouvillian& l, const Eigen::MatrixXcd& rho0, double t_max,
                            double stationarity_tol = 1e-12, double rtol = 1e-11);

}  // namespace dpt::exact
