#include "dpt/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "dpt/errors.hpp"
#include "dpt/gaussian.hpp"

namespace dpt::cumulant {

using cd = std::complex<double>;
namespace {
constexpr cd I{0.0, 1.0};
}

std::string_view to_string(Closure c) { return c == Closure::Expanded ? "expanded" : "printed"; }

Closure closure_from_string(std::string_view s) {
  if (s == "expanded") return Closure::Expanded;
  if (s == "printed") return Closure::Printed;
  throw InvalidParameter("unknown closure '" + std::string(s) + "' (expected expanded or printed)");
}

std::string_view to_string(BranchTag t) {
  switch (t) {
    case BranchTag::Symmetric: return "symmetric";
    case BranchTag::BrokenPlus: return "broken_plus";
    case BranchTag::BrokenMinus: return "broken_minus";
  }
  return "?";
}

double MomentState::purity() const { return gaussian::purity_from_moments(delta_n(), delta_m()); }

bool MomentState::physical(double tol) const { return n >= 0.0 && std::abs(m) <= n + 0.5 + tol; }

bool MomentState::admissible(double tol) const {
  const double mu = purity();
  return physical(tol) && delta_n() >= -tol && mu > 0.0 && mu <= 1.0 + tol;
}

Vector5 to_fluctuation(const MomentState& s) {
  const cd dm = s.delta_m();
  Vector5 y;
  y << s.a_mean.real(), s.a_mean.imag(), s.delta_n(), dm.real(), dm.imag();
  return y;
}

MomentState from_fluctuation(const Vector5& y) {
  MomentState s;
  s.a_mean = {y[0], y[1]};
  s.n = y[2] + std::norm(s.a_mean);
  s.m = cd(y[3], y[4]) + s.a_mean * s.a_mean;
  return s;
}

MomentState cumulant_rhs(const MomentState& s, const ModelParams& p, Closure c) {
  const double w = p.omega(), lam = p.lambda(), k1 = p.kappa1(), k2 = p.kappa2();
  const cd a = s.a_mean;
  const double n = s.n;
  const cd m = s.m;
  const double a2 = std::norm(a);

  const cd t3 = 2.0 * n * a + m * std::conj(a) - 2.0 * a * a2;
  const cd t4 = c == Closure::Expanded ? 3.0 * n * m - 2.0 * a * a * a2 : 3.0 * n * m - 2.0 * a * a2;
  const double t22 = std::norm(m) + 2.0 * n * n - 2.0 * a2 * a2;

  MomentState d;
  d.a_mean = -cd(k1, w) * a - 2.0 * I * lam * std::conj(a) - 2.0 * k2 * t3;
  d.m = -2.0 * cd(k1 + k2, w) * m - 2.0 * I * lam * (1.0 + 2.0 * n) - 4.0 * k2 * t4;
  d.n = -4.0 * lam * m.imag() - 2.0 * k1 * n - 4.0 * k2 * t22;
  return d;
}

namespace {

struct Fields {
  cd a;
  double dn;
  cd dm;
};

Fields fields(const Vector5& y) { return {{y[0], y[1]}, y[2], {y[3], y[4]}}; }

Vector5 pack(cd ga, double gn, cd gm) {
  Vector5 v;
  v << ga.real(), ga.imag(), gn, gm.real(), gm.imag();
  return v;
}

}  // namespace

Vector5 fluctuation_rhs(const Vector5& y, const ModelParams& p, Closure c) {
  const double w = p.omega(), lam = p.lambda(), k1 = p.kappa1(), k2 = p.kappa2();
  const auto [a, dn, dm] = fields(y);
  const double aa = std::norm(a);
  const cd ac = std::conj(a);

  const cd ga = -cd(k1, w) * a - 2.0 * I * lam * ac - 2.0 * k2 * (aa * a + 2.0 * dn * a + dm * ac);
  const double gn = -4.0 * lam * dm.imag() - 2.0 * k1 * dn -
                    4.0 * k2 * (std::norm(dm) + (dm * ac * ac).real() + 2.0 * dn * dn + 2.0 * dn * aa);
  cd gm = -2.0 * cd(k1 + k2, w) * dm - 2.0 * k2 * a * a - 2.0 * I * lam * (1.0 + 2.0 * dn) -
          4.0 * k2 * (3.0 * dn * dm + dn * a * a + 2.0 * aa * dm);
  if (c == Closure::Printed) gm += 8.0 * k2 * aa * (a - a * a);
  return pack(ga, gn, gm);
}

Matrix5 fluctuation_jacobian(const Vector5& y, const ModelParams& p, Closure c) {
  const double w = p.omega(), lam = p.lambda(), k1 = p.kappa1(), k2 = p.kappa2();
  const auto [a, dn, dm] = fields(y);
  const double aa = std::norm(a);
  const cd ac = std::conj(a);

  Matrix5 j;
  for (int k = 0; k < 5; ++k) {
    Vector5 e = Vector5::Zero();
    e[k] = 1.0;
    const auto [da, ddn, ddm] = fields(e);
    const double daa = 2.0 * (ac * da).real();
    const cd dac = std::conj(da);

    const cd ga = -cd(k1, w) * da - 2.0 * I * lam * dac -
                  2.0 * k2 * (daa * a + aa * da + 2.0 * ddn * a + 2.0 * dn * da + ddm * ac + dm * dac);
    const double gn = -4.0 * lam * ddm.imag() - 2.0 * k1 * ddn -
                      4.0 * k2 *
                          (2.0 * (std::conj(dm) * ddm).real() + (ddm * ac * ac + 2.0 * dm * ac * dac).real() +
                           4.0 * dn * ddn + 2.0 * ddn * aa + 2.0 * dn * daa);
    cd gm = -2.0 * cd(k1 + k2, w) * ddm - 4.0 * k2 * a * da - 4.0 * I * lam * ddn -
            4.0 * k2 *
                (3.0 * ddn * dm + 3.0 * dn * ddm + ddn * a * a + 2.0 * dn * a * da + 2.0 * daa * dm + 2.0 * aa * ddm);
    if (c == Closure::Printed) gm += 8.0 * k2 * (daa * (a - a * a) + aa * (da - 2.0 * a * da));
    j.col(k) = pack(ga, gn, gm);
  }
  return j;
}

namespace {

double rate_unit(const ModelParams& p) { return p.omega() + 2.0 * p.lambda() + p.kappa1() + p.kappa2(); }

Vector5 row_scales(const Vector5& y, const ModelParams& p) {
  const double r = rate_unit(p);
  const double sa = r * (1.0 + std::hypot(y[0], y[1]));
  const double sn = r * (1.0 + std::abs(y[2]));
  Vector5 s;
  s << sa, sa, sn, sn, sn;
  return s;
}

}  // namespace

Vector5 scaled_residual(const Vector5& y, const ModelParams& p, Closure c) {
  return fluctuation_rhs(y, p, c).cwiseQuotient(row_scales(y, p));
}

BranchTag tag_for(cd a_mean) {
  if (a_mean == cd(0.0, 0.0)) return BranchTag::Symmetric;
  if (a_mean.real() > 0.0 || (a_mean.real() == 0.0 && a_mean.imag() > 0.0)) return BranchTag::BrokenPlus;
  return BranchTag::BrokenMinus;
}

namespace {

/// Active coordinates: all five, or the parity-closed (delta_n, delta_m) block when <a> = 0.
std::vector<int> active_indices(const Vector5& y) {
  if (y[0] == 0.0 && y[1] == 0.0) return {2, 3, 4};
  return {0, 1, 2, 3, 4};
}

Eigen::MatrixXd restrict(const Matrix5& j, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = j(idx[r], idx[c]);
  return out;
}

Eigen::VectorXd restrict(const Vector5& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) out[r] = v[idx[r]];
  return out;
}

double res_norm(const Vector5& y, const ModelParams& p, Closure c) {
  const Vector5 r = scaled_residual(y, p, c);
  return r.allFinite() ? r.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
}

struct NewtonOutcome {
  Vector5 y;
  bool converged = false;
  int iterations = 0;
};

NewtonOutcome newton(const ModelParams& p, Vector5 y, const SolverOptions& opt) {
  const auto idx = active_indices(y);
  NewtonOutcome out;
  double norm = res_norm(y, p, opt.closure);
  int uphill_budget = 4;
  for (int it = 0; it < opt.max_newton; ++it) {
    out.iterations = it;
    if (norm <= opt.tol) {
      out.converged = true;
      break;
    }
    const Vector5 scales = row_scales(y, p);
    Matrix5 j = fluctuation_jacobian(y, p, opt.closure);
    for (int r = 0; r < 5; ++r) j.row(r) /= scales[r];
    const Eigen::MatrixXd jr = restrict(j, idx);
    const Eigen::VectorXd rr = restrict(scaled_residual(y, p, opt.closure), idx);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jr);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
      std::ostringstream msg;
      msg << "Newton matrix is singular (rcond " << rcond << ")";
      throw JacobianSingular(msg.str());
    }
    const Eigen::VectorXd step = lu.solve(-rr);
    double t = 1.0;
    Vector5 trial = y;
    double trial_norm = 0.0;
    for (;;) {
      trial = y;
      for (std::size_t k = 0; k < idx.size(); ++k) trial[idx[k]] += t * step[k];
      trial_norm = res_norm(trial, p, opt.closure);
      if (trial_norm <= (1.0 - 1e-4 * t) * norm || t < 1e-6) break;
      t *= 0.5;
    }
    if (!(trial_norm < norm)) {
      // Non-monotone escape: the scaled max-norm can rise on the way into the basin.
      if (uphill_budget-- <= 0) break;
      trial = y;
      for (std::size_t k = 0; k < idx.size(); ++k) trial[idx[k]] += step[k];
      trial_norm = res_norm(trial, p, opt.closure);
      if (!std::isfinite(trial_norm)) break;
    }
    y = trial;
    norm = trial_norm;
  }
  if (norm <= opt.tol) out.converged = true;
  out.y = y;
  return out;
}

/// Pseudo-transient continuation: implicit Euler steps with a growing time step.
NewtonOutcome pseudo_transient(const ModelParams& p, Vector5 y, const SolverOptions& opt) {
  const auto idx = active_indices(y);
  const int d = static_cast<int>(idx.size());
  double dt = 0.1 / rate_unit(p);
  Vector5 g = fluctuation_rhs(y, p, opt.closure);
  double gnorm = restrict(g, idx).norm();
  NewtonOutcome out;
  for (int it = 0; it < opt.max_ptc; ++it) {
    out.iterations = it;
    if (res_norm(y, p, opt.closure) <= 1e-9) break;
    const Eigen::MatrixXd j = restrict(fluctuation_jacobian(y, p, opt.closure), idx);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) / dt - j;
    const Eigen::VectorXd step = m.partialPivLu().solve(restrict(g, idx));
    Vector5 trial = y;
    for (int k = 0; k < d; ++k) trial[idx[k]] += step[k];
    const Vector5 gt = fluctuation_rhs(trial, p, opt.closure);
    const double gtn = restrict(gt, idx).norm();
    if (!gt.allFinite() || !trial.allFinite()) {
      dt *= 0.25;
      continue;
    }
    dt *= std::clamp(gnorm / std::max(gtn, 1e-300), 0.5, 4.0);
    y = trial;
    g = gt;
    gnorm = gtn;
  }
  out.y = y;
  out.converged = false;
  return out;
}

Branch finish(const ModelParams& p, Vector5 y, int iterations, const SolverOptions& opt) {
  // A mean field that decayed to roundoff is the symmetric root.
  if (y[0] * y[0] + y[1] * y[1] <= 1e-24 * std::max(1.0, std::abs(y[2]))) y[0] = y[1] = 0.0;
  Branch b;
  b.state = from_fluctuation(y);
  b.tag = tag_for(b.state.a_mean);
  b.residual = res_norm(y, p, opt.closure);
  b.iterations = iterations;
  Eigen::EigenSolver<Matrix5> es(fluctuation_jacobian(y, p, opt.closure), false);
  b.max_real_eigenvalue = es.eigenvalues().real().maxCoeff();
  b.stable = b.max_real_eigenvalue < 0.0;
  b.metastable = b.tag != BranchTag::Symmetric;
  return b;
}

}  // namespace

Branch solve_from(const ModelParams& p, const MomentState& seed, const SolverOptions& opt) {
  const Vector5 y0 = to_fluctuation(seed);
  int total = 0;
  std::optional<Vector5> inadmissible;
  auto accept = [&](const NewtonOutcome& r) {
    total += r.iterations;
    if (!r.converged) return false;
    if (from_fluctuation(r.y).admissible()) return true;
    if (!inadmissible) inadmissible = r.y;
    return false;
  };

  NewtonOutcome r = newton(p, y0, opt);
  if (accept(r)) return finish(p, r.y, total, opt);

  const NewtonOutcome ptc = pseudo_transient(p, y0, opt);
  total += ptc.iterations;
  r = newton(p, ptc.y, opt);
  if (accept(r)) return finish(p, r.y, total, opt);

  if (opt.t_fallback > 0.0) {
    try {
      ode::Tolerances tol;
      tol.rtol = 1e-9;
      tol.atol = 1e-12;
      tol.h_max = 10.0 / rate_unit(p);
      tol.max_steps = 2'000'000;
      const Trajectory tr = time_evolve(seed, p, opt.t_fallback, tol, opt.closure, 0);
      total += static_cast<int>(tr.steps);
      r = newton(p, to_fluctuation(tr.final_state), opt);
      if (accept(r)) return finish(p, r.y, total, opt);
    } catch (const StiffnessAbort&) {
    }
  }
  if (inadmissible) {
    Branch b = finish(p, *inadmissible, total, opt);
    b.physical = false;
    return b;
  }
  std::ostringstream msg;
  msg << "no root from seed <a> = " << seed.a_mean << ", n = " << seed.n << " (residual "
      << res_norm(r.y, p, opt.closure) << ")";
  throw RootNotFound(msg.str());
}

MomentState branch_seed(const ModelParams& p, BranchTag tag) {
  MomentState s;
  if (tag == BranchTag::Symmetric) {
    if (classify_phase(p) == Phase::Critical) return s;
    const auto dd = gaussian::drift_diffusion(p, {0.0, 0.0});
    if (gaussian::max_real_eigenvalue(dd.drift) < 0.0 ||
        (classify_symmetry(p) == SymmetryClass::Strong && classify_phase(p) == Phase::Normal)) {
      const auto g = gaussian::report_from_drift(dd);
      s.n = g.delta_n;
      s.m = g.delta_m;
    }
    return s;
  }
  cd alpha = broken_amplitude(p);
  if (alpha == cd(0.0, 0.0)) throw InvalidParameter("broken-branch seed requested at or below threshold");
  if (tag == BranchTag::BrokenMinus) alpha = -alpha;
  const auto g = gaussian::gaussian_report(p, alpha);
  const cd phase2 = (alpha / std::abs(alpha)) * (alpha / std::abs(alpha));
  s.a_mean = alpha;
  s.n = g.delta_n + std::norm(alpha);
  s.m = g.delta_m * phase2 + alpha * alpha;
  return s;
}

BranchSet steady_state_branches(const ModelParams& p, const SolverOptions& opt) {
  BranchSet out;
  std::vector<Branch> found;
  auto attempt = [&](const MomentState& seed, const char* name) -> bool {
    try {
      found.push_back(solve_from(p, seed, opt));
      return true;
    } catch (const JacobianSingular& e) {
      out.critical_window = true;
      out.failures.push_back(std::string(name) + ": " + e.what());
    } catch (const RootNotFound& e) {
      out.failures.push_back(std::string(name) + ": " + e.what());
    }
    return false;
  };

  if (!attempt(MomentState{}, "vacuum") && opt.gaussian_seeds)
    attempt(branch_seed(p, BranchTag::Symmetric), "vacuum (dressed)");
  const cd alpha = broken_amplitude(p);
  if (alpha != cd(0.0, 0.0)) {
    for (double sign : {1.0, -1.0}) {
      MomentState bare;
      bare.a_mean = sign * alpha;
      bare.n = std::norm(alpha);
      bare.m = alpha * alpha;
      const char* name = sign > 0 ? "+alpha" : "-alpha";
      if (!attempt(bare, name) && opt.gaussian_seeds)
        attempt(branch_seed(p, sign > 0 ? BranchTag::BrokenPlus : BranchTag::BrokenMinus), name);
    }
  }

  for (const Branch& b : found) {
    const Vector5 yb = to_fluctuation(b.state);
    const bool dup = std::any_of(out.branches.begin(), out.branches.end(), [&](const Branch& o) {
      const Vector5 yo = to_fluctuation(o.state);
      return (yb - yo).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + yo.cwiseAbs().maxCoeff());
    });
    if (!dup) out.branches.push_back(b);
  }
  std::stable_sort(out.branches.begin(), out.branches.end(),
                   [](const Branch& x, const Branch& y) { return static_cast<int>(x.tag) < static_cast<int>(y.tag); });
  return out;
}

Trajectory time_evolve(const MomentState& s0, const ModelParams& p, double t_final, const ode::Tolerances& tol,
                       Closure c, int record_every) {
  Trajectory tr;
  if (record_every > 0) tr.points.push_back({0.0, s0});
  long count = 0;
  auto rhs = [&](double, const Vector5& y) { return fluctuation_rhs(y, p, c); };
  std::function<bool(double, const Vector5&)> observer;
  if (record_every > 0)
    observer = [&](double t, const Vector5& y) {
      if (++count % record_every == 0) tr.points.push_back({t, from_fluctuation(y)});
      return false;
    };
  const auto res = ode::dormand_prince<Vector5>(rhs, to_fluctuation(s0), 0.0, t_final, tol, observer);
  tr.final_state = from_fluctuation(res.y);
  tr.steps = res.steps;
  if (record_every > 0 && (tr.points.empty() || tr.points.back().t != res.t))
    tr.points.push_back({res.t, tr.final_state});
  return tr;
}

std::vector<SweepPoint> continuation(const std::vector<ModelParams>& path, const MomentState& seed,
                                     const SolverOptions& opt) {
  std::vector<SweepPoint> out;
  std::vector<Vector5> roots;
  for (const ModelParams& p : path) {
    SweepPoint pt{p, {}, false, {}};
    Vector5 guess = roots.empty() ? to_fluctuation(seed) : roots.back();
    if (roots.size() >= 2) {
      const Vector5& y1 = roots[roots.size() - 1];
      const Vector5& y0 = roots[roots.size() - 2];
      for (int k = 0; k < 5; ++k) {
        const double ratio = y0[k] != 0.0 ? y1[k] / y0[k] : 0.0;
        if (ratio > 0.2 && ratio < 5.0) guess[k] = y1[k] * ratio;
      }
    }
    try {
      pt.branch = solve_from(p, from_fluctuation(guess), opt);
      pt.ok = true;
    } catch (const Error& e) {
      if (!roots.empty()) {
        try {
          pt.branch = solve_from(p, from_fluctuation(roots.back()), opt);
          pt.ok = true;
        } catch (const Error& e2) {
          pt.error = e2.what();
        }
      } else {
        pt.error = e.what();
      }
    }
    if (pt.ok) roots.push_back(to_fluctuation(pt.branch.state));
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace dpt::cumulant
