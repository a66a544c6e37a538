#include "dpt/oneloop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "dpt/errors.hpp"

namespace dpt::oneloop {

using cd = std::complex<double>;

std::string_view to_string(Observable o) {
  switch (o) {
    case Observable::DeltaN: return "delta_n";
    case Observable::ReDeltaM: return "re_delta_m";
    case Observable::ImDeltaM: return "im_delta_m";
    case Observable::Purity: return "purity";
    case Observable::Adr: return "adr";
  }
  return "?";
}

gaussian::DriftDiffusion<double> corrected_drift(const ModelParams& p, double n, cd m) {
  return gaussian::drift_from_self_energy<double>(p.omega(), p.lambda(), p.kappa1() + 2.0 * p.kappa2() * n,
                                                  0.5 * p.kappa2() * m);
}

namespace {

struct MapValue {
  Eigen::Vector3d next;
  gaussian::CovarianceMatrix cov;
};

/// One application of the self-consistency map on y = (n, Re m, Im m).
MapValue fixed_point_map(const ModelParams& p, const Eigen::Vector3d& y) {
  const auto dd = corrected_drift(p, y[0], {y[1], y[2]});
  const Eigen::Matrix2d v = gaussian::closed_form_covariance(dd);
  MapValue out;
  out.cov = {v(0, 0), v(1, 1), v(0, 1)};
  out.next << out.cov.delta_n(), out.cov.delta_m().real(), out.cov.delta_m().imag();
  return out;
}

double relative_residual(const Eigen::Vector3d& y, const Eigen::Vector3d& g) {
  return (g - y).cwiseAbs().maxCoeff() / std::max(1.0, std::abs(y[0]));
}

void check_physical(const Eigen::Vector3d& y, int iteration) {
  if (!(y[0] >= 0.0) || !std::isfinite(y[1]) || !std::isfinite(y[2])) {
    std::ostringstream msg;
    msg << "one-loop iteration left the physical region at step " << iteration << " (n = " << y[0] << ")";
    throw NegativeOccupation(msg.str());
  }
}

}  // namespace

OneLoopState self_consistent_critical_point(const ModelParams& p, const Options& opt) {
  if (std::abs(p.lambda() - critical_lambda(p)) > phase_tolerance(p))
    throw InvalidParameter("one-loop critical point requires lambda = lambda_c");

  const cd seed_m = -cd(0.0, p.lambda()) / cd(p.kappa1() + p.kappa2(), p.omega());
  Eigen::Vector3d y(0.0, seed_m.real(), seed_m.imag());
  double mix = opt.mixing;
  double last = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  MapValue g = fixed_point_map(p, y);

  for (; it < opt.max_iter; ++it) {
    const double res = relative_residual(y, g.next);
    if (res <= opt.fp_tol) {
      converged = true;
      break;
    }
    if (res < opt.polish_threshold || mix < 1e-2) {
      // Newton on F(y) = G(y) - y with a forward-difference Jacobian.
      Eigen::Matrix3d jac;
      const Eigen::Vector3d f0 = g.next - y;
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d yk = y;
        const double h = 1e-7 * std::max(1.0, std::abs(y[k]));
        yk[k] += h;
        jac.col(k) = (fixed_point_map(p, yk).next - yk - f0) / h;
      }
      Eigen::Vector3d step = jac.fullPivLu().solve(-f0);
      Eigen::Vector3d trial = y + step;
      MapValue gt = fixed_point_map(p, trial);
      double shrink = 1.0;
      while (relative_residual(trial, gt.next) > res && shrink > 1e-4) {
        shrink *= 0.5;
        trial = y + shrink * step;
        gt = fixed_point_map(p, trial);
      }
      if (relative_residual(trial, gt.next) <= res) {
        y = trial;
        g = gt;
        last = res;
        continue;
      }
    }
    if (res > last) {
      mix *= 0.5;
      if (mix < opt.min_mixing) break;
    }
    last = res;
    y = (1.0 - mix) * y + mix * g.next;
    check_physical(y, it);
    g = fixed_point_map(p, y);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "one-loop fixed point not reached after " << it << " iterations (residual "
        << relative_residual(y, g.next) << ", mixing " << mix << ")";
    throw NoConvergence(msg.str());
  }
  check_physical(y, it);

  OneLoopState s;
  s.n = y[0];
  s.m = {y[1], y[2]};
  const auto dd = corrected_drift(p, s.n, s.m);
  s.gamma_tilde = dd.gamma;
  s.rho_tilde = 0.5 * p.kappa2() * s.m;
  s.converged = true;
  s.iterations = it;
  s.residual = relative_residual(y, g.next);
  s.covariance = g.cov;
  s.purity = gaussian::purity_from_moments(s.n, s.m);
  s.adr = -gaussian::max_real_eigenvalue(dd.drift);
  return s;
}

double observable_value(const OneLoopState& s, Observable o) {
  switch (o) {
    case Observable::DeltaN: return s.n;
    case Observable::ReDeltaM: return s.m.real();
    case Observable::ImDeltaM: return s.m.imag();
    case Observable::Purity: return s.purity;
    case Observable::Adr: return s.adr;
  }
  return 0.0;
}

gaussian::Prediction table2_prediction(const ModelParams& p, Observable o) {
  const double w = p.omega();
  const double k1 = p.kappa1();
  const double lc = critical_lambda(p);
  if (classify_symmetry(p) == SymmetryClass::Weak) {
    switch (o) {
      case Observable::DeltaN: return {lc / std::sqrt(k1), -0.5};
      case Observable::ReDeltaM: return {-w / (2.0 * std::sqrt(k1)), -0.5};
      case Observable::ImDeltaM: return {-0.5 * std::sqrt(k1), -0.5};
      case Observable::Purity: return {1.0 / (2.0 * std::sqrt(lc) * std::pow(k1, 0.25)), 0.25};
      case Observable::Adr: return {2.0 * lc / std::sqrt(k1), 0.5};
    }
  }
  const double s6 = std::sqrt(6.0);
  switch (o) {
    case Observable::DeltaN: return {std::pow(w, 2.0 / 3.0) / s6, -2.0 / 3.0};
    case Observable::ReDeltaM: return {-std::pow(w, 2.0 / 3.0) / s6, -2.0 / 3.0};
    case Observable::ImDeltaM: return {-0.5 * std::cbrt(w), -1.0 / 3.0};
    case Observable::Purity: return {std::sqrt(3.0 / (2.0 * s6 - 3.0)) / std::cbrt(w), 1.0 / 3.0};
    case Observable::Adr: return {2.0 * std::pow(w, 2.0 / 3.0) / s6, 1.0 / 3.0};
  }
  return {};
}

Table2Report table2_report(const ModelParams& p, const std::vector<double>& kappa2_grid, double exponent_tol,
                           const Options& opt) {
  if (kappa2_grid.size() < 2) throw InsufficientRange("kappa2 grid needs at least two points");
  const auto [mn, mx] = std::minmax_element(kappa2_grid.begin(), kappa2_grid.end());
  if (std::log10(*mx / *mn) < 3.0 - 1e-9) throw InsufficientRange("kappa2 grid must span at least three decades");

  Table2Report rep;
  rep.symmetry = classify_symmetry(p);
  std::vector<double> grid = kappa2_grid;
  std::sort(grid.begin(), grid.end());
  for (double k2 : grid) {
    const ModelParams q = p.with_kappa2(k2);
    try {
      rep.states.push_back(self_consistent_critical_point(q.with_lambda(critical_lambda(q)), opt));
      rep.kappa2.push_back(k2);
    } catch (const Error& e) {
      rep.warnings.push_back("kappa2 = " + std::to_string(k2) + ": " + e.what());
    }
  }
  scaling::FitRules rules;
  rules.min_decades = 3.0;
  for (Observable o : kObservables) {
    CriticalScalingRow row;
    row.observable = o;
    const auto pred = table2_prediction(p, o);
    row.predicted_coefficient = pred.coefficient;
    row.predicted_exponent = pred.exponent;
    scaling::ScalingSeries s;
    s.label = std::string(to_string(o));
    s.control = rep.kappa2;
    for (const auto& st : rep.states) s.values.push_back(observable_value(st, o));
    try {
      row.fit = scaling::fit_signed_power_law(s, rules);
      row.measured_coefficient = row.fit.coefficient;
      row.measured_exponent = row.fit.exponent;
      row.exponent_match = std::abs(row.measured_exponent - row.predicted_exponent) <= exponent_tol;
      row.coefficient_ratio = row.measured_coefficient / row.predicted_coefficient;
    } catch (const Error& e) {
      rep.warnings.push_back(s.label + ": " + e.what());
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace dpt::oneloop
