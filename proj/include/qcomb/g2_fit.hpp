#pragma once

// Fit of floor + amplitude * K(tau - tau0) to a coincidence histogram, where
// K is exp(-gamma |tau|) convolved with a zero-mean Gaussian of width s.
// For the signal-idler histogram amplitude / floor = gamma / (2R).

#include <string>

#include "qcomb/histogram.hpp"

namespace qcomb::analysis {

/// exp(-gamma|tau|) convolved with N(0, s^2); equals exp(-gamma|tau|) at s = 0.
double peak_kernel(double tau, double gamma, double s);
/// Full width at half maximum of peak_kernel.
double peak_fwhm(double gamma, double s);
/// exp(x^2) erfc(x).
double erfcx(double x);

struct FitOptions {
  double fit_half_width = 100e-9;  // only bins with |tau| <= this enter the fit
  double min_significance = 5.0;   // amplitude / sigma(amplitude)
  double gamma_min = 2 * 3.14159265358979323846 * 1e6;
  double gamma_max = 2 * 3.14159265358979323846 * 20e9;
};

struct G2FitResult {
  bool ok = false;
  std::string diagnostics;
  double floor = 0;          // counts / bin
  double amplitude = 0;      // counts / bin at the undisturbed peak
  double amplitude_sigma = 0;
  double gamma = 0;          // from the raw-Laplace fit
  double delta_nu_fit = 0;   // gamma / 2pi
  double gamma_corr = 0;     // from the jitter-convolved fit
  double delta_nu_corr = 0;
  double tau0 = 0;           // s
  double fwhm = 0;           // of the fitted (convolved) curve, s
  double fwhm_raw = 0;       // of the raw-Laplace fit, s
  double jitter_sigma = 0;   // per detector, s
  double residual_norm = 0;  // sqrt(Pearson chi^2 / dof)
  /// amplitude / floor; g2(0) - 1 with jitter removed.
  double contrast() const { return floor > 0 ? amplitude / floor : 0.0; }
  /// R from amplitude / floor = gamma / 2R (ideal detection, equal singles).
  double rate_from_contrast() const { return amplitude > 0 ? gamma_corr * floor / (2.0 * amplitude) : 0.0; }
};

/// jitter_sigma is per detector. The corrected fit uses a Gaussian of variance
/// 2 jitter_sigma^2 plus the timestamp quantization variance; the raw fit uses none.
G2FitResult fit_g2(const CoincidenceHistogram& hist, double jitter_sigma, const FitOptions& options = {});

}  // namespace qcomb::analysis
