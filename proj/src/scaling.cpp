#include "dpt/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dpt/errors.hpp"

namespace dpt::scaling {

PowerLawFit fit_power_law(const ScalingSeries& s, const FitRules& rules) {
  const std::size_t n = s.control.size();
  if (s.values.size() != n) throw InvalidParameter("scaling series '" + s.label + "': length mismatch");
  if (n < rules.min_points) {
    std::ostringstream msg;
    msg << "series '" << s.label << "' has " << n << " points, need " << rules.min_points;
    throw InsufficientRange(msg.str());
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(s.control[k] > 0.0) || !(s.values[k] > 0.0))
      throw NonPositiveValue("series '" + s.label + "' has a non-positive entry at index " + std::to_string(k));
    if (k > 0 && !(s.control[k] > s.control[k - 1]))
      throw InsufficientRange("series '" + s.label + "': control grid is not strictly increasing");
  }
  const double decades = std::log10(s.control.back() / s.control.front());
  if (decades < rules.min_decades - 1e-9) {
    std::ostringstream msg;
    msg << "series '" << s.label << "' spans " << decades << " decades, need " << rules.min_decades;
    throw InsufficientRange(msg.str());
  }

  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t k = 0; k < n; ++k) {
    lx[k] = std::log(s.control[k]);
    ly[k] = std::log(s.values[k]);
    mx += lx[k];
    my += ly[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.coefficient = std::exp(intercept);
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = ly[k] - (intercept + fit.exponent * lx[k]);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.stderr_exponent = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  fit.window = {s.control.front(), s.control.back()};
  fit.points = n;
  fit.accepted = fit.r_squared >= rules.accept_r_squared;
  return fit;
}

PowerLawFit fit_signed_power_law(const ScalingSeries& s, const FitRules& rules) {
  if (s.values.empty()) return fit_power_law(s, rules);
  const double sign = s.values.front() < 0.0 ? -1.0 : 1.0;
  ScalingSeries abs = s;
  for (double& v : abs.values) {
    if (!(v * sign > 0.0)) throw NonPositiveValue("series '" + s.label + "' changes sign or vanishes");
    v = std::abs(v);
  }
  PowerLawFit fit = fit_power_law(abs, rules);
  fit.coefficient *= sign;
  return fit;
}

ScalingSeries window(const ScalingSeries& s, double lo, double hi) {
  ScalingSeries out;
  out.label = s.label;
  for (std::size_t k = 0; k < s.control.size(); ++k)
    if (s.control[k] >= lo * (1 - 1e-12) && s.control[k] <= hi * (1 + 1e-12)) {
      out.control.push_back(s.control[k]);
      out.values.push_back(s.values[k]);
    }
  return out;
}

double window_sensitivity(const ScalingSeries& s, const FitRules& rules) {
  const PowerLawFit full = fit_signed_power_law(s, rules);
  double drift = 0.0;
  for (double cut : {std::sqrt(10.0), 10.0}) {
    const ScalingSeries w = window(s, s.control.front(), s.control.back() / cut);
    try {
      drift = std::max(drift, std::abs(fit_signed_power_law(w, rules).exponent - full.exponent));
    } catch (const InsufficientRange&) {
    }
  }
  return drift;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * k / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

/// Linear interpolation in (log x, log y); x must lie within the curve's range.
double interp_loglog(const std::vector<double>& lx, const std::vector<double>& ly, double x) {
  const double l = std::log(x);
  auto it = std::lower_bound(lx.begin(), lx.end(), l);
  if (it == lx.begin()) return std::exp(ly.front());
  if (it == lx.end()) return std::exp(ly.back());
  const std::size_t k = static_cast<std::size_t>(it - lx.begin());
  if (*it == l) return std::exp(ly[k]);
  const double t = (l - lx[k - 1]) / (lx[k] - lx[k - 1]);
  return std::exp(ly[k - 1] + t * (ly[k] - ly[k - 1]));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CollapseResult collapse(const std::vector<CollapseCurve>& data, double zeta_x, double nu_x,
                        const CollapseOptions& opt) {
  std::set<double> distinct;
  for (const auto& c : data) distinct.insert(c.kappa2);
  if (distinct.size() < 3) throw InvalidParameter("collapse needs at least three distinct kappa2 values");

  struct Scaled {
    std::vector<double> lx, ly;
  };
  std::vector<Scaled> curves;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& c : data) {
    Scaled s;
    for (std::size_t k = 0; k < c.series.control.size(); ++k) {
      const double eps = c.series.control[k];
      const double y = c.series.values[k];
      if (!(eps > 0.0) || !(y > 0.0)) throw NonPositiveValue("collapse input must be positive");
      s.lx.push_back(nu_x * std::log(eps) - zeta_x * std::log(c.kappa2));
      s.ly.push_back(zeta_x * std::log(c.kappa2) + std::log(y));
    }
    if (s.lx.size() < 2) throw EmptyOverlap("collapse curve with fewer than two points");
    std::vector<std::size_t> order(s.lx.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.lx[a] < s.lx[b]; });
    Scaled sorted;
    for (std::size_t k : order) {
      sorted.lx.push_back(s.lx[k]);
      sorted.ly.push_back(s.ly[k]);
    }
    lo = std::max(lo, sorted.lx.front());
    hi = std::min(hi, sorted.lx.back());
    curves.push_back(std::move(sorted));
  }
  if (!(hi > lo)) throw EmptyOverlap("rescaled curves do not overlap");

  CollapseResult out;
  out.zeta_x = zeta_x;
  out.nu_x = nu_x;
  out.xi = nu_x / zeta_x;
  out.overlap = {std::exp(lo), std::exp(hi)};
  double total = 0.0;
  for (double x : logspace(std::exp(lo), std::exp(hi), opt.bins)) {
    std::vector<double> ys;
    for (const auto& c : curves) ys.push_back(interp_loglog(c.lx, c.ly, x));
    const double med = median(ys);
    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    MasterPoint pt{x, med, (*mx - *mn) / med};
    total += pt.spread;
    out.master_curve.push_back(pt);
  }
  out.spread = total / static_cast<double>(out.master_curve.size());

  const std::size_t n = out.master_curve.size();
  const std::size_t first = n - std::max<std::size_t>(2, n / 3);
  const auto& a = out.master_curve[first];
  const auto& b = out.master_curve.back();
  out.tail_slope = std::log(b.f / a.f) / std::log(b.x / a.x);
  return out;
}

ExponentEstimate estimate_exponent(const ScalingSeries& s, double sign, const FitRules& rules) {
  ExponentEstimate e;
  e.fit = fit_signed_power_law(s, rules);
  e.value = sign * e.fit.exponent;
  e.error = std::max(e.fit.stderr_exponent, window_sensitivity(s, rules));
  return e;
}

CoherenceResult coherence_number(const CoherenceInputs& in, const FitRules& rules) {
  CoherenceResult r;
  r.nu_x = estimate_exponent(in.static_eps, -1.0, rules);
  r.zeta_x = estimate_exponent(in.static_kappa2, -1.0, rules);
  r.nu_t = estimate_exponent(in.dynamic_eps, 1.0, rules);
  r.zeta_t = estimate_exponent(in.dynamic_kappa2, 1.0, rules);
  auto ratio = [](const ExponentEstimate& a, const ExponentEstimate& b, double& err) {
    const double q = a.value / b.value;
    err = std::abs(q) * std::hypot(a.error / a.value, b.error / b.value);
    return q;
  };
  r.xi = ratio(r.nu_x, r.zeta_x, r.xi_error);
  r.xi_t = ratio(r.nu_t, r.zeta_t, r.xi_t_error);
  r.consistent = std::abs(r.xi - r.xi_t) <= std::hypot(r.xi_error, r.xi_t_error);
  return r;
}

}  // namespace dpt::scaling
