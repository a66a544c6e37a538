#include "dpt/exact.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "dpt/errors.hpp"
#include "dpt/ode.hpp"

namespace dpt::exact {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

LindbladRates::LindbladRates(double omega_, double lambda_, double kappa1_, double kappa2_)
    : omega(omega_), lambda(lambda_), kappa1(kappa1_), kappa2(kappa2_) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be > 0");
  if (!(lambda >= 0.0)) throw InvalidParameter("lambda must be >= 0");
  if (!(kappa1 >= 0.0)) throw InvalidParameter("kappa1 must be >= 0");
  if (!(kappa2 >= 0.0)) throw InvalidParameter("kappa2 must be >= 0");
}

LindbladRates::LindbladRates(const ModelParams& p)
    : LindbladRates(p.omega(), p.lambda(), p.kappa1(), p.kappa2()) {}

FockCutoff::FockCutoff(int n) : n_max(n) {
  if (n < 8) throw InvalidParameter("Fock cutoff n_max must be >= 8, got " + std::to_string(n));
}

Sector Liouvillian::sector(int index) const {
  const int i = index % dim;
  const int j = index / dim;
  const bool ei = i % 2 == 0;
  const bool ej = j % 2 == 0;
  if (ei && ej) return Sector::EvenEven;
  if (!ei && !ej) return Sector::OddOdd;
  return ei ? Sector::EvenOdd : Sector::OddEven;
}

namespace {

SparseMatrixC sparse_annihilation(int dim) {
  std::vector<Eigen::Triplet<cd>> t;
  for (int n = 1; n < dim; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  SparseMatrixC a(dim, dim);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b) {
  SparseMatrixC out = Eigen::kroneckerProduct(a, b);
  return out;
}

/// Index groups over which the matrix is block diagonal.
std::vector<std::vector<int>> sector_groups(const Liouvillian& l) {
  const bool strong = l.rates.kappa1 == 0.0;
  std::vector<std::vector<int>> groups(strong ? 4 : 2);
  for (int k = 0; k < l.superdim(); ++k) {
    const int s = static_cast<int>(l.sector(k));
    groups[strong ? s : s / 2].push_back(k);
  }
  return groups;
}

SparseMatrixC extract_block(const SparseMatrixC& m, const std::vector<int>& idx) {
  std::vector<int> local(m.rows(), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) local[idx[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<cd>> t;
  for (int col : idx)
    for (SparseMatrixC::InnerIterator it(m, col); it; ++it)
      if (local[it.row()] >= 0) t.emplace_back(local[it.row()], local[col], it.value());
  SparseMatrixC b(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

std::vector<cd> block_eigenvalues(const SparseMatrixC& block, double scale, int dense_limit, int nev,
                                  bool& dense) {
  std::vector<cd> out;
  if (block.rows() <= dense_limit) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(MatrixXcd(block), false);
    if (es.info() != Eigen::Success) throw EigensolverFailure("dense Liouvillian eigensolve failed");
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()[k]);
    return out;
  }
  dense = false;
  ArnoldiOptions ao;
  ao.nev = nev;
  const ArnoldiResult r = shift_invert_eigs(block, cd(-1e-3 * scale, 0.0), ao);
  if (r.residuals.size() > 0 && r.residuals.maxCoeff() > 1e-8)
    throw EigensolverFailure("shift-invert eigenpairs have residual " + std::to_string(r.residuals.maxCoeff()));
  for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) out.push_back(r.eigenvalues[k]);
  return out;
}

int count_kernel(const Liouvillian& l, const SteadyStateOptions& opt) {
  const double scale = l.rates.rate_scale();
  int count = 0;
  bool dense = true;
  for (const auto& g : sector_groups(l)) {
    const SparseMatrixC block = extract_block(l.matrix, g);
    for (const cd& ev : block_eigenvalues(block, scale, std::min(opt.dense_limit, 400), 4, dense))
      if (std::abs(ev) < opt.gap_tol * scale) ++count;
  }
  return count;
}

/// Steady state supported on one group of indices: solve B x = 0 with the row of the reference
/// diagonal element replaced by the trace functional.
MatrixXcd sector_steady_state(const Liouvillian& l, const std::vector<int>& idx, int reference_level) {
  const int dim = l.dim;
  const SparseMatrixC block = extract_block(l.matrix, idx);
  const int ref_global = reference_level + dim * reference_level;
  int ref_row = -1;
  std::vector<Eigen::Triplet<cd>> t;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (idx[k] == ref_global) ref_row = static_cast<int>(k);
  for (int col = 0; col < block.outerSize(); ++col)
    for (SparseMatrixC::InnerIterator it(block, col); it; ++it)
      if (it.row() != ref_row) t.emplace_back(it.row(), col, it.value());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int i = idx[k] % dim;
    const int j = idx[k] / dim;
    if (i == j) t.emplace_back(ref_row, static_cast<int>(k), 1.0);
  }
  SparseMatrixC sys(block.rows(), block.cols());
  sys.setFromTriplets(t.begin(), t.end());
  sys.makeCompressed();
  Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) throw EigensolverFailure("steady-state factorization failed");
  VectorXcd rhs = VectorXcd::Zero(block.rows());
  rhs[ref_row] = 1.0;
  const VectorXcd x = lu.solve(rhs);

  MatrixXcd rho = MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < idx.size(); ++k) rho(idx[k] % dim, idx[k] / dim) = x[k];
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return rho;
}

double min_eigenvalue(const MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SteadyStateResult solve_steady_states(const Liouvillian& l, const SteadyStateOptions& opt) {
  SteadyStateResult out;
  const bool strong = l.rates.kappa1 == 0.0;
  out.kernel_dim = count_kernel(l, opt);
  if (out.kernel_dim == 0) throw EigensolverFailure("no kernel eigenvalue found below gap_tol");
  std::vector<int> even_pop, odd_pop, all_pop;
  for (int k = 0; k < l.superdim(); ++k) {
    const Sector s = l.sector(k);
    if (s == Sector::EvenEven) even_pop.push_back(k);
    if (s == Sector::OddOdd) odd_pop.push_back(k);
    if (s == Sector::EvenEven || s == Sector::OddOdd) all_pop.push_back(k);
  }
  if (strong) {
    out.states.push_back(sector_steady_state(l, even_pop, 0));
    out.states.push_back(sector_steady_state(l, odd_pop, 1));
  } else {
    std::sort(all_pop.begin(), all_pop.end());
    out.states.push_back(sector_steady_state(l, all_pop, 0));
  }
  for (const auto& rho : out.states) {
    if (min_eigenvalue(rho) < -1e-8) {
      if (out.kernel_dim > 1)
        throw DegenerateKernelAmbiguity("sector-projected steady state is not positive");
      throw Unconverged("steady state is not positive; cutoff too small");
    }
    out.tail_population = std::max(out.tail_population, rho(l.dim - 1, l.dim - 1).real());
  }
  return out;
}

double relative_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-12); }

}  // namespace

Liouvillian build_liouvillian(const LindbladRates& r, FockCutoff c, const BuildOptions& opt) {
  const long dim = c.dim();
  if (dim * dim > opt.max_superdim)
    throw DimensionOverflow("Liouvillian dimension " + std::to_string(dim * dim) + " exceeds budget " +
                            std::to_string(opt.max_superdim));
  const int d = static_cast<int>(dim);
  const SparseMatrixC a = sparse_annihilation(d);
  const SparseMatrixC ad = a.adjoint();
  const SparseMatrixC a2 = a * a;
  const SparseMatrixC ad2 = ad * ad;
  SparseMatrixC id(d, d);
  id.setIdentity();
  const SparseMatrixC h = r.omega * SparseMatrixC(ad * a) + r.lambda * SparseMatrixC(a2 + ad2);

  const cd i{0.0, 1.0};
  SparseMatrixC sup = -i * kron(id, h) + i * kron(SparseMatrixC(h.transpose()), id);
  auto add_dissipator = [&](const SparseMatrixC& jump, double rate) {
    if (rate == 0.0) return;
    const SparseMatrixC jd = jump.adjoint();
    const SparseMatrixC jdj = jd * jump;
    sup += rate * (2.0 * kron(SparseMatrixC(jump.conjugate()), jump) - kron(id, jdj) -
                   kron(SparseMatrixC(jdj.transpose()), id));
  };
  add_dissipator(a, r.kappa1);
  add_dissipator(a2, r.kappa2);
  sup.prune(cd(0.0, 0.0));
  sup.makeCompressed();
  return {std::move(sup), d, r};
}

MatrixXcd annihilation(int dim) { return MatrixXcd(sparse_annihilation(dim)); }

VectorXcd vectorize(const MatrixXcd& rho) { return Eigen::Map<const VectorXcd>(rho.data(), rho.size()); }

MatrixXcd unvectorize(const VectorXcd& v, int dim) { return Eigen::Map<const MatrixXcd>(v.data(), dim, dim); }

MatrixXcd apply(const Liouvillian& l, const MatrixXcd& rho) {
  return unvectorize(l.matrix * vectorize(rho), l.dim);
}

MatrixXcd apply_adjoint(const Liouvillian& l, const MatrixXcd& op) {
  return unvectorize(l.matrix.adjoint() * vectorize(op), l.dim);
}

SteadyStateResult steady_states(const Liouvillian& l, const SteadyStateOptions& opt) {
  SteadyStateResult out = solve_steady_states(l, opt);
  if (out.tail_population > opt.tail_tol)
    throw Unconverged("tail population " + std::to_string(out.tail_population) + " at n_max = " +
                      std::to_string(l.dim - 1) + " exceeds " + std::to_string(opt.tail_tol));
  return out;
}

Observables observables(const MatrixXcd& rho) {
  const int dim = static_cast<int>(rho.rows());
  const MatrixXcd a = annihilation(dim);
  Observables o;
  o.a_mean = (a * rho).trace();
  o.n = (a.adjoint() * a * rho).trace().real();
  o.m = (a * a * rho).trace();
  o.delta_n = o.n - std::norm(o.a_mean);
  o.delta_m = o.m - o.a_mean * o.a_mean;
  o.purity = rho.squaredNorm();
  return o;
}

LiouvillianSpectrum spectrum_and_adr(const Liouvillian& l, const SteadyStateOptions& opt) {
  LiouvillianSpectrum s;
  const double scale = l.rates.rate_scale();
  const bool strong = l.rates.kappa1 == 0.0;
  const auto groups = sector_groups(l);
  s.max_real = -std::numeric_limits<double>::infinity();
  double slowest = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const SparseMatrixC block = extract_block(l.matrix, groups[g]);
    const auto ev = block_eigenvalues(block, scale, opt.dense_limit, opt.arnoldi_nev, s.dense);
    for (const cd& e : ev) {
      s.eigenvalues.push_back(e);
      s.max_real = std::max(s.max_real, e.real());
      if (std::abs(e) < opt.gap_tol * scale)
        ++s.kernel_dim;
      else
        slowest = std::max(slowest, e.real());
    }
    if (strong) s.by_sector[g] = ev;
  }
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(),
            [](const cd& x, const cd& y) { return x.real() > y.real(); });
  s.adr = std::isfinite(slowest) ? std::max(0.0, -slowest) : 0.0;
  return s;
}

ParityReport parity_block_check(const Liouvillian& l, int samples, unsigned seed) {
  ParityReport rep;
  double off = 0.0;
  for (int col = 0; col < l.matrix.outerSize(); ++col)
    for (SparseMatrixC::InnerIterator it(l.matrix, col); it; ++it)
      if (l.sector(static_cast<int>(it.row())) != l.sector(col)) off += std::norm(it.value());
  rep.off_block_norm = std::sqrt(off);
  rep.block_diagonal = rep.off_block_norm <= 1e-12;

  const int dim = l.dim;
  Eigen::VectorXcd parity(dim);
  for (int n = 0; n < dim; ++n) parity[n] = n % 2 == 0 ? 1.0 : -1.0;
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < samples; ++k) {
    MatrixXcd g(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) g(i, j) = {gauss(rng), gauss(rng)};
    const MatrixXcd x = 0.5 * (g + g.adjoint());
    const MatrixXcd px = parity.asDiagonal() * x * parity.asDiagonal();
    const MatrixXcd lhs = apply(l, px);
    const MatrixXcd rhs = parity.asDiagonal() * apply(l, x) * parity.asDiagonal();
    rep.weak_residual = std::max(rep.weak_residual, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  rep.samples = samples;
  rep.weak_covariant = rep.weak_residual <= 1e-12;
  return rep;
}

ConvergedSteadyState converged_steady_state(const LindbladRates& r, const ConvergenceOptions& opt) {
  int n_max = opt.initial_n_max;
  for (;;) {
    Liouvillian l;
    try {
      l = build_liouvillian(r, FockCutoff(n_max), opt.build);
    } catch (const DimensionOverflow& e) {
      throw Unconverged("tail certificate not reached before the memory budget: " + std::string(e.what()));
    }
    const SteadyStateResult ss = solve_steady_states(l, opt.steady);
    if (ss.tail_population > opt.steady.tail_tol) {
      n_max *= 2;
      continue;
    }
    ConvergedSteadyState out;
    out.rho = ss.states.front();
    out.obs = observables(out.rho);
    out.n_max = n_max;
    out.kernel_dim = ss.kernel_dim;
    out.tail_population = ss.tail_population;

    const int n_check = n_max * 3 / 2;
    if (static_cast<long>(n_check + 1) * (n_check + 1) <= opt.build.max_superdim) {
      const Liouvillian l2 = build_liouvillian(r, FockCutoff(n_check), opt.build);
      const SteadyStateResult ss2 = solve_steady_states(l2, opt.steady);
      const Observables o2 = observables(ss2.states.front());
      out.cutoff_change = std::max(relative_change(out.obs.n, o2.n), relative_change(std::abs(out.obs.m), std::abs(o2.m)));
    } else {
      out.cutoff_change = std::numeric_limits<double>::quiet_NaN();
    }
    out.cutoff_flagged = !(out.cutoff_change <= opt.convergence_tol);
    return out;
  }
}

std::vector<CutoffPoint> convergence_study(const LindbladRates& r, const std::vector<int>& cutoffs,
                                           const SteadyStateOptions& opt) {
  std::vector<CutoffPoint> out;
  BuildOptions build;
  for (int n : cutoffs) {
    build.max_superdim = std::max<long>(build.max_superdim, static_cast<long>(n + 1) * (n + 1));
    const Liouvillian l = build_liouvillian(r, FockCutoff(n), build);
    const SteadyStateResult ss = solve_steady_states(l, opt);
    out.push_back({n, observables(ss.states.front()), ss.tail_population});
  }
  return out;
}

PropagationResult propagate(const Liouvillian& l, const MatrixXcd& rho0, double t_max, double stationarity_tol,
                            double rtol) {
  ode::Tolerances tol;
  tol.rtol = rtol;
  tol.atol = 1e-3 * rtol;
  tol.h_max = 10.0;
  auto rhs = [&](double, const VectorXcd& y) { return VectorXcd(l.matrix * y); };
  long count = 0;
  double stationarity = std::numeric_limits<double>::infinity();
  auto observer = [&](double, const VectorXcd& y) {
    if (++count % 25 != 0) return false;
    stationarity = (l.matrix * y).norm();
    return stationarity < stationarity_tol;
  };
  const auto traj = ode::dormand_prince<VectorXcd>(rhs, vectorize(rho0), 0.0, t_max, tol, observer);
  PropagationResult out;
  out.rho = unvectorize(traj.y, l.dim);
  out.t = traj.t;
  out.steps = traj.steps;
  out.stationarity = (l.matrix * traj.y).norm();
  return out;
}

}  // namespace dpt::exact
