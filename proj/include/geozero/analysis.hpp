#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geozero/hamiltonian.hpp"
#include "geozero/sensing.hpp"

namespace geozero {

struct FitParameter {
  double value = 0.0;
  double sigma = 0.0;  // bootstrap standard deviation
};

enum class DecayModel {
  kStretchedExponential,  // C = exp[-(t/T)^p]
  kDampedCosine,          // C = exp[-(t/T)^p] cos(omega t)
};

struct DecayFit {
  DecayModel model = DecayModel::kStretchedExponential;
  FitParameter T;      // s
  FitParameter p;
  FitParameter omega;  // rad/s, damped cosine only
  double rms_residual = 0.0;

  double evaluate(double t) const;
};

struct FitOptions {
  int bootstrap = 100;
  std::uint64_t seed = 0x5eed;
};

/// Nelder-Mead least squares from several starting exponents, then a
/// residual bootstrap for the uncertainties. Throws FitDiverged when no start
/// produces a finite fit better than a constant.
DecayFit fit_stretched_exponential(const std::vector<double>& t, const std::vector<double>& coherence,
                                   DecayModel model, const FitOptions& options = {});

/// Convenience: fits 2*p0 - 1 against the sweep.
DecayFit fit_stretched_exponential(const ExperimentResult& result, DecayModel model, const FitOptions& options = {});

struct Spectrum {
  std::vector<double> frequency;  // Hz, 0 .. Nyquist
  std::vector<double> magnitude;  // |sum y_k e^{-2 pi i f t_k}|
};

/// One-sided DFT magnitude. Throws NonuniformSpacing unless the sample
/// times are equally spaced to 1e-6 of the step.
Spectrum dft(const std::vector<double>& t, const std::vector<double>& y);

/// Frequency of the largest non-DC bin of the mean-subtracted data, refined
/// by parabolic interpolation.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y);

struct SinusoidFit {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;
  double phase = 0.0;  // y = offset + amplitude cos(2 pi f t + phase)
  double offset = 0.0;
  double rms_residual = 0.0;
  double frequency_sigma = 0.0;  // Hz, from the residual level
};

/// Variable-projection fit: linear least squares for amplitude, phase and
/// offset at each trial frequency, minimized over frequency near the DFT peak.
SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& y);

struct AcDipFit {
  FitParameter B_rms;      // T
  FitParameter frequency;  // Hz, signal frequency
  double t_s = 0.0;        // s, pulse interval at the model's coherence minimum
  double f_prime = 0.0;    // Hz, 1/(2 t_s)
  double min_coherence = 0.0;
  double rms_residual = 0.0;
};

struct AcDipOptions {
  double gamma_e = units::kGammaElectron;
  int bootstrap = 40;
  std::uint64_t seed = 0xd1b;
  /// Depth below which the data count as flat, in units of the median
  /// standard error of the coherence.
  double min_depth_sigmas = 5.0;
};

/// Fits a coherence-versus-pulse-interval sweep of ZDD-N with free-time
/// signal pickup: C(t) = J0(2 gamma_e sqrt2 B |int y_t(s) e^{2 pi i f s} ds|).
/// Throws NoDipFound when the data do not dip significantly below 1.
AcDipFit fit_ac_dip(const ExperimentResult& result, const DerivedCouplings& dc, int N,
                    const AcDipOptions& options = {});

/// Nelder-Mead minimization (GSL nmsimplex2). Returns the best point; `best`
/// receives the objective there.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                const std::vector<double>& step, double* best = nullptr, int max_iter = 4000);

}  // namespace geozero
