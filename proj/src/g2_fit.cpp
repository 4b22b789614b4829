#include "qcomb/g2_fit.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace qcomb::analysis {

double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series; relative error < 1e-10 for x >= 25.
  const double inv2 = 1.0 / (x * x);
  return (1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2) / (x * std::sqrt(3.14159265358979323846));
}

namespace {

// exp(a) * erfc(b) / 2 where a - b^2 = -tau^2 / (2 s^2)
double half_exp_erfc(double a, double b, double gauss) {
  if (b > 0) return 0.5 * gauss * erfcx(b);
  return 0.5 * std::exp(a) * std::erfc(b);
}

}  // namespace

double peak_kernel(double tau, double gamma, double s) {
  if (s <= 0) return std::exp(-gamma * std::abs(tau));
  const double gs2 = gamma * s * s;
  const double root2s = std::sqrt(2.0) * s;
  const double gauss = std::exp(-tau * tau / (2 * s * s));
  const double base = 0.5 * gamma * gs2;
  return half_exp_erfc(base - gamma * tau, (gs2 - tau) / root2s, gauss) +
         half_exp_erfc(base + gamma * tau, (gs2 + tau) / root2s, gauss);
}

double peak_fwhm(double gamma, double s) {
  if (s <= 0) return 2.0 * std::log(2.0) / gamma;
  const double half = 0.5 * peak_kernel(0, gamma, s);
  double lo = 0, hi = std::log(2.0) / gamma + 4 * s;
  while (peak_kernel(hi, gamma, s) > half) hi *= 2;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (peak_kernel(mid, gamma, s) > half ? lo : hi) = mid;
  }
  return lo + hi;  // 2 * midpoint
}

namespace {

struct Data {
  std::vector<double> tau;
  std::vector<double> y;
};

struct Linear {
  double floor = 0, amplitude = 0, amplitude_sigma = 0, deviance = 0, pearson = 0;
  bool ok = false;
};

// Poisson maximum likelihood for y ~ floor + amplitude * x by iteratively
// reweighted least squares (w = 1 / mu); exact for the identity link.
Linear solve_linear(const Data& d, const std::vector<double>& x) {
  Linear r;
  const std::size_t n = d.y.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(d.y[i], 1.0);
  for (int iter = 0; iter < 6; ++iter) {
    double s0 = 0, s1 = 0, s11 = 0, sy = 0, s1y = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s0 += w[i];
      s1 += w[i] * x[i];
      s11 += w[i] * x[i] * x[i];
      sy += w[i] * d.y[i];
      s1y += w[i] * x[i] * d.y[i];
    }
    const double det = s0 * s11 - s1 * s1;
    if (!(det > 0)) return r;
    r.floor = (s11 * sy - s1 * s1y) / det;
    r.amplitude = (s0 * s1y - s1 * sy) / det;
    r.amplitude_sigma = std::sqrt(s0 / det);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(r.floor + r.amplitude * x[i], 1e-3);
  }
  r.deviance = 0;
  r.pearson = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = std::max(r.floor + r.amplitude * x[i], 1e-9);
    const double y = d.y[i];
    r.deviance += 2.0 * ((y > 0 ? y * std::log(y / mu) : 0.0) - (y - mu));
    r.pearson += (y - mu) * (y - mu) / mu;
  }
  r.ok = std::isfinite(r.deviance);
  return r;
}

struct Profile {
  const Data& data;
  double s;
  mutable std::vector<double> x;

  Linear at(double gamma, double tau0) const {
    x.resize(data.tau.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = peak_kernel(data.tau[i] - tau0, gamma, s);
    return solve_linear(data, x);
  }
};

struct Nonlinear {
  double gamma = 0, tau0 = 0;
  Linear lin;
};

Nonlinear fit_profile(const Data& data, double s, double tau0_guess, double bin, const FitOptions& o) {
  Profile profile{data, s, {}};
  const int bits = 40;
  // The deviance has a kink wherever tau0 crosses a bin center (the raw
  // kernel has a cusp), so scan a fine grid before the local refinement.
  auto best_tau0 = [&](double gamma) {
    auto f = [&](double t0) {
      auto l = profile.at(gamma, t0);
      return l.ok ? l.deviance : std::numeric_limits<double>::max();
    };
    const int steps = 24;
    const double step = 6 * bin / steps;
    double best_t = tau0_guess, best_f = std::numeric_limits<double>::max();
    for (int i = 0; i <= steps; ++i) {
      const double t = tau0_guess - 3 * bin + i * step;
      const double v = f(t);
      if (v < best_f) best_f = v, best_t = t;
    }
    return boost::math::tools::brent_find_minima(f, best_t - step, best_t + step, bits).first;
  };
  auto objective = [&](double log_gamma) {
    const double g = std::exp(log_gamma);
    auto l = profile.at(g, best_tau0(g));
    return l.ok ? l.deviance : std::numeric_limits<double>::max();
  };

  // Coarse scan at the guessed center, then Brent around the best grid point.
  const double lo = std::log(o.gamma_min), hi = std::log(o.gamma_max);
  const int grid = 48;
  double best = std::numeric_limits<double>::max();
  int best_i = 0;
  for (int i = 0; i <= grid; ++i) {
    const double lg = lo + (hi - lo) * i / grid;
    auto l = profile.at(std::exp(lg), tau0_guess);
    if (l.ok && l.deviance < best) {
      best = l.deviance;
      best_i = i;
    }
  }
  const double step = (hi - lo) / grid;
  const double a = std::max(lo, lo + (best_i - 1) * step), b = std::min(hi, lo + (best_i + 1) * step);
  const double lg = boost::math::tools::brent_find_minima(objective, a, b, bits).first;

  Nonlinear out;
  out.gamma = std::exp(lg);
  out.tau0 = best_tau0(out.gamma);
  out.lin = profile.at(out.gamma, out.tau0);
  return out;
}

}  // namespace

G2FitResult fit_g2(const CoincidenceHistogram& hist, double jitter_sigma, const FitOptions& options) {
  G2FitResult r;
  r.jitter_sigma = jitter_sigma;
  Data data;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (std::abs(hist.tau(i)) <= options.fit_half_width) {
      data.tau.push_back(hist.tau(i));
      data.y.push_back(static_cast<double>(hist.counts[i]));
    }
  }
  if (data.y.size() < 8) {
    r.diagnostics = "too few bins in the fit window";
    return r;
  }
  double total = 0;
  for (double y : data.y) total += y;
  if (total <= 0) {
    r.diagnostics = "empty histogram";
    return r;
  }

  // Peak center guess: maximum of an 11-bin running sum.
  const std::size_t n = data.y.size();
  const std::size_t half = std::min<std::size_t>(5, n / 2);
  double best = -1;
  std::size_t best_i = n / 2;
  for (std::size_t i = half; i + half < n; ++i) {
    double s = 0;
    for (std::size_t j = i - half; j <= i + half; ++j) s += data.y[j];
    if (s > best) {
      best = s;
      best_i = i;
    }
  }
  const double bin = hist.bin_seconds();
  // Two detector jitters plus timestamp quantization: each difference of
  // floored tags spreads over a triangle of +-1 tick (variance tick^2 / 6),
  // and a bin of b ticks adds (b^2 - 1) tick^2 / 12.
  const double b = static_cast<double>(hist.bin_width);
  const double quant_var = hist.tick * hist.tick * (1.0 / 6.0 + (b * b - 1.0) / 12.0);
  const double s = std::sqrt(2.0 * jitter_sigma * jitter_sigma + quant_var);

  const auto raw = fit_profile(data, 0.0, data.tau[best_i], bin, options);
  const auto corr = fit_profile(data, s, raw.tau0, bin, options);

  r.gamma = raw.gamma;
  r.delta_nu_fit = raw.gamma / (2 * 3.14159265358979323846);
  r.gamma_corr = corr.gamma;
  r.delta_nu_corr = corr.gamma / (2 * 3.14159265358979323846);
  r.tau0 = corr.tau0;
  r.floor = corr.lin.floor;
  r.amplitude = corr.lin.amplitude;
  r.amplitude_sigma = corr.lin.amplitude_sigma;
  r.fwhm_raw = peak_fwhm(raw.gamma, 0.0);
  r.fwhm = peak_fwhm(corr.gamma, s);
  const double dof = static_cast<double>(n) - 4.0;
  r.residual_norm = dof > 0 ? std::sqrt(corr.lin.pearson / dof) : 0.0;

  std::ostringstream diag;
  const double z = r.amplitude_sigma > 0 ? r.amplitude / r.amplitude_sigma : 0.0;
  diag << "significance=" << z;
  if (!corr.lin.ok || !(r.amplitude > 0) || z < options.min_significance) {
    diag << " (no significant peak)";
    r.ok = false;
  } else {
    r.ok = true;
  }
  r.diagnostics = diag.str();
  return r;
}

}  // namespace qcomb::analysis
