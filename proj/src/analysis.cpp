#include "geozero/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_fft_complex.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include "geozero/errors.hpp"
#include "geozero/filter_analysis.hpp"

namespace geozero {

namespace {

constexpr double kHuge = 1e300;

using Objective = std::function<double(const std::vector<double>&)>;

double gsl_objective(const gsl_vector* v, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  std::vector<double> x(v->size);
  for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
  const double y = f(x);
  return std::isfinite(y) ? y : kHuge;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

double sum_sq_dev(const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

void check_xy(const std::vector<double>& t, const std::vector<double>& y, std::size_t min_points, const char* who) {
  if (t.size() != y.size()) throw Error(std::string(who) + ": abscissa and data sizes differ");
  if (t.size() < min_points) throw Error(std::string(who) + ": too few points");
}

// Envelope-based 1/e time: first t after which |y| stays below 1/e.
double decay_time_guess(const std::vector<double>& t, const std::vector<double>& y) {
  double tail = 0.0;
  std::size_t cut = t.size();
  for (std::size_t k = t.size(); k-- > 0;) {
    tail = std::max(tail, std::abs(y[k]));
    if (tail >= std::exp(-1.0)) break;
    cut = k;
  }
  if (cut >= t.size()) return 2.0 * t.back();
  return std::max(t[cut], 1e-3 * t.back());
}

double decay_value(DecayModel model, double t, double T, double p, double omega) {
  const double env = std::exp(-std::pow(std::abs(t) / T, p));
  return model == DecayModel::kDampedCosine ? env * std::cos(omega * t) : env;
}

struct SinusoidLinear {
  double a = 0, b = 0, c = 0, sse = 0;
};

SinusoidLinear project_sinusoid(const std::vector<double>& t, const std::vector<double>& y, double f) {
  Eigen::MatrixXd A(t.size(), 3);
  Eigen::VectorXd Y(t.size());
  const double t0 = t.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double ph = kTwoPi * f * (t[k] - t0);
    A(k, 0) = std::cos(ph);
    A(k, 1) = std::sin(ph);
    A(k, 2) = 1.0;
    Y(k) = y[k];
  }
  const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(Y);
  SinusoidLinear out{coef(0), coef(1), coef(2), (A * coef - Y).squaredNorm()};
  return out;
}

}  // namespace

std::vector<double> nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& step,
                                double* best, int max_iter) {
  const std::size_t n = x0.size();
  gsl_multimin_function fn;
  fn.n = n;
  fn.f = gsl_objective;
  fn.params = const_cast<Objective*>(&f);
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* s = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(s, i, step[i]);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(m, &fn, x, s);
  const double tol = 1e-9 * *std::max_element(step.begin(), step.end());
  for (int iter = 0; iter < max_iter; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), tol) == GSL_SUCCESS) break;
  }
  for (std::size_t i = 0; i < n; ++i) x0[i] = gsl_vector_get(m->x, i);
  if (best) *best = m->fval;
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(s);
  return x0;
}

double DecayFit::evaluate(double t) const { return decay_value(model, t, T.value, p.value, omega.value); }

DecayFit fit_stretched_exponential(const std::vector<double>& t, const std::vector<double>& c, DecayModel model,
                                   const FitOptions& options) {
  check_xy(t, c, 4, "fit_stretched_exponential");
  const bool cosine = model == DecayModel::kDampedCosine;
  const double T0 = decay_time_guess(t, c);
  double w0 = 1.0;
  if (cosine) {
    try {
      w0 = kTwoPi * dominant_frequency(t, c);
    } catch (const NonuniformSpacing&) {
      w0 = kTwoPi / (t.back() - t.front());
    }
    if (!(w0 > 0.0)) w0 = kTwoPi / (t.back() - t.front());
  }

  // x = (log(T/T0), p, omega/w0)
  auto sse_for = [&](const std::vector<double>& data) {
    return [&, data](const std::vector<double>& x) {
      const double T = T0 * std::exp(x[0]);
      const double p = x[1];
      if (p < 0.2 || p > 8.0) return kHuge;
      const double w = cosine ? w0 * x[2] : 0.0;
      double sse = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double r = decay_value(model, t[k], T, p, w) - data[k];
        sse += r * r;
      }
      return sse;
    };
  };

  const std::vector<double> step = cosine ? std::vector<double>{0.3, 0.3, 0.02} : std::vector<double>{0.3, 0.3};
  const Objective objective = sse_for(c);
  std::vector<double> best_x;
  double best_sse = kHuge;
  for (double p0 : {1.0, 1.5, 2.0, 2.5, 3.0}) {
    for (double scale : {0.7, 1.0, 1.4}) {
      std::vector<double> x0 = {std::log(scale), p0};
      if (cosine) x0.push_back(1.0);
      double sse = kHuge;
      const auto x = nelder_mead(objective, x0, step, &sse);
      if (sse < best_sse) best_sse = sse, best_x = x;
    }
  }
  const double baseline = sum_sq_dev(c);
  if (best_x.empty() || !std::isfinite(best_sse) || best_sse >= kHuge || (best_sse > baseline && best_sse > 1e-12 * t.size())) {
    throw FitDiverged("fit_stretched_exponential: no start converged to a usable fit");
  }

  DecayFit fit;
  fit.model = model;
  fit.T.value = T0 * std::exp(best_x[0]);
  fit.p.value = best_x[1];
  fit.omega.value = cosine ? w0 * best_x[2] : 0.0;
  fit.rms_residual = std::sqrt(best_sse / t.size());

  if (options.bootstrap > 1) {
    std::vector<double> resid(t.size()), model_y(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      model_y[k] = fit.evaluate(t[k]);
      resid[k] = c[k] - model_y[k];
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    std::vector<double> Ts, ps, ws;
    for (int b = 0; b < options.bootstrap; ++b) {
      std::vector<double> y(t.size());
      for (std::size_t k = 0; k < t.size(); ++k) y[k] = model_y[k] + resid[pick(rng)];
      double sse = kHuge;
      const auto x = nelder_mead(sse_for(y), best_x, step, &sse);
      if (!(sse < kHuge)) continue;
      Ts.push_back(T0 * std::exp(x[0]));
      ps.push_back(x[1]);
      if (cosine) ws.push_back(w0 * x[2]);
    }
    fit.T.sigma = sample_std(Ts);
    fit.p.sigma = sample_std(ps);
    fit.omega.sigma = sample_std(ws);
  }
  return fit;
}

DecayFit fit_stretched_exponential(const ExperimentResult& result, DecayModel model, const FitOptions& options) {
  return fit_stretched_exponential(result.sweep, result.coherence(), model, options);
}

Spectrum dft(const std::vector<double>& t, const std::vector<double>& y) {
  check_xy(t, y, 4, "dft");
  const std::size_t n = t.size();
  const double dt = (t.back() - t.front()) / (n - 1);
  if (!(dt > 0.0)) throw NonuniformSpacing("dft: sample times must increase");
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt) {
      throw NonuniformSpacing("dft: sample " + std::to_string(k) + " breaks the uniform spacing");
    }
  }
  std::vector<double> data(2 * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) data[2 * k] = y[k];
  gsl_fft_complex_wavetable* wt = gsl_fft_complex_wavetable_alloc(n);
  gsl_fft_complex_workspace* ws = gsl_fft_complex_workspace_alloc(n);
  gsl_fft_complex_forward(data.data(), 1, n, wt, ws);
  gsl_fft_complex_workspace_free(ws);
  gsl_fft_complex_wavetable_free(wt);

  Spectrum s;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    s.frequency.push_back(static_cast<double>(k) / (n * dt));
    s.magnitude.push_back(std::hypot(data[2 * k], data[2 * k + 1]));
  }
  return s;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y) {
  check_xy(t, y, 4, "dominant_frequency");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  std::vector<double> centred(y.size());
  std::transform(y.begin(), y.end(), centred.begin(), [mean](double v) { return v - mean; });
  const Spectrum s = dft(t, centred);
  std::size_t k = 1;
  for (std::size_t i = 1; i < s.magnitude.size(); ++i) {
    if (s.magnitude[i] > s.magnitude[k]) k = i;
  }
  if (k + 1 >= s.magnitude.size()) return s.frequency[k];
  const double a = s.magnitude[k - 1], b = s.magnitude[k], c = s.magnitude[k + 1];
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  const double df = s.frequency[1];
  return s.frequency[k] + std::clamp(shift, -0.5, 0.5) * df;
}

SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& y) {
  check_xy(t, y, 6, "fit_sinusoid");
  const std::size_t n = t.size();
  const double dt = (t.back() - t.front()) / (n - 1);
  const double f0 = dominant_frequency(t, y);
  const double df = 1.0 / (n * dt);

  constexpr int kGrid = 41;
  std::vector<double> grid(kGrid), cost(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = std::max(1e-3 * df, f0 - df + 2.0 * df * i / (kGrid - 1));
    cost[i] = project_sinusoid(t, y, grid[i]).sse;
  }
  const int i_min = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  double f_best = grid[i_min];
  if (i_min > 0 && i_min + 1 < kGrid && cost[i_min] < cost[i_min - 1] && cost[i_min] < cost[i_min + 1]) {
    struct Ctx {
      const std::vector<double>* t;
      const std::vector<double>* y;
    } ctx{&t, &y};
    gsl_function fn;
    fn.function = [](double f, void* p) {
      auto* c = static_cast<Ctx*>(p);
      return project_sinusoid(*c->t, *c->y, f).sse;
    };
    fn.params = &ctx;
    gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    gsl_min_fminimizer_set_with_values(m, &fn, grid[i_min], cost[i_min], grid[i_min - 1], cost[i_min - 1],
                                       grid[i_min + 1], cost[i_min + 1]);
    for (int iter = 0; iter < 100; ++iter) {
      if (gsl_min_fminimizer_iterate(m) != GSL_SUCCESS) break;
      if (gsl_min_test_interval(gsl_min_fminimizer_x_lower(m), gsl_min_fminimizer_x_upper(m), 1e-12 * df, 0.0) ==
          GSL_SUCCESS) {
        break;
      }
    }
    f_best = gsl_min_fminimizer_x_minimum(m);
    gsl_min_fminimizer_free(m);
  }

  const SinusoidLinear lin = project_sinusoid(t, y, f_best);
  SinusoidFit fit;
  fit.frequency = f_best;
  fit.amplitude = std::hypot(lin.a, lin.b);
  // a cos + b sin = A cos(x - atan2(b, a)); re-reference the phase to t = 0.
  fit.phase = std::remainder(-std::atan2(lin.b, lin.a) - kTwoPi * f_best * t.front(), kTwoPi);
  fit.offset = lin.c;
  fit.rms_residual = std::sqrt(lin.sse / n);
  const double sigma = std::sqrt(lin.sse / std::max<std::size_t>(1, n - 4));
  if (fit.amplitude > 0.0) {
    const double nn = static_cast<double>(n);
    fit.frequency_sigma = std::sqrt(12.0 * sigma * sigma / (fit.amplitude * fit.amplitude * nn * (nn * nn - 1.0))) /
                          (kTwoPi * dt);
  }
  return fit;
}

AcDipFit fit_ac_dip(const ExperimentResult& result, const DerivedCouplings& dc, int N, const AcDipOptions& options) {
  const std::vector<double>& t = result.sweep;
  const std::vector<double> c = result.coherence();
  check_xy(t, c, 5, "fit_ac_dip");

  std::vector<double> se(result.stderr_p0.size());
  std::transform(result.stderr_p0.begin(), result.stderr_p0.end(), se.begin(), [](double s) { return 2.0 * s; });
  const std::size_t k_min = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
  const double depth = 1.0 - c[k_min];
  const double noise = median(se);
  if (depth < std::max(1e-3, options.min_depth_sigmas * noise)) {
    throw NoDipFound("fit_ac_dip: deepest point is only " + std::to_string(depth) + " below full coherence");
  }

  std::vector<ModulationFunction> mods;
  mods.reserve(t.size());
  for (double tk : t) mods.push_back(modulation_function(build_zdd(dc, N, tk), PulseConvention::kZeroDuringPulse));

  const double coupling = 2.0 * options.gamma_e * std::sqrt(2.0);
  auto model_at = [&](const ModulationFunction& m, double B, double f) {
    return std::cyl_bessel_j(0.0, coupling * B * std::abs(m.transform(kTwoPi * f)));
  };

  const double f0 = 1.0 / (2.0 * t[k_min]);
  const double a0 = c[k_min] > 0.0 ? inverse_j0(c[k_min]) : 2.0;
  const double k0 = std::abs(mods[k_min].transform(kTwoPi * f0));
  const double B0 = k0 > 0.0 ? a0 / (coupling * k0) : 1e-9;

  auto sse_for = [&](const std::vector<double>& data) {
    return [&, data](const std::vector<double>& x) {
      if (x[0] < 0.0 || x[1] <= 0.0) return kHuge;
      double sse = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double r = model_at(mods[k], B0 * x[0], f0 * x[1]) - data[k];
        sse += r * r;
      }
      return sse;
    };
  };

  const std::vector<double> step = {0.2, 0.01};
  std::vector<double> best_x;
  double best_sse = kHuge;
  for (double fs : {0.98, 1.0, 1.02}) {
    double sse = kHuge;
    const auto x = nelder_mead(sse_for(c), {1.0, fs}, step, &sse);
    if (sse < best_sse) best_sse = sse, best_x = x;
  }
  if (best_x.empty() || !(best_sse < kHuge)) throw FitDiverged("fit_ac_dip: no start converged");

  AcDipFit fit;
  fit.B_rms.value = B0 * best_x[0];
  fit.frequency.value = f0 * best_x[1];
  fit.rms_residual = std::sqrt(best_sse / t.size());

  // Dip centre of the fitted model over the swept range.
  auto model_t = [&](double tk) {
    return model_at(modulation_function(build_zdd(dc, N, tk), PulseConvention::kZeroDuringPulse), fit.B_rms.value,
                    fit.frequency.value);
  };
  const auto [lo_it, hi_it] = std::minmax_element(t.begin(), t.end());
  double lo = *lo_it, hi = *hi_it;
  constexpr int kDense = 400;
  double best_t = lo, best_c = 2.0;
  for (int i = 0; i <= kDense; ++i) {
    const double tk = lo + (hi - lo) * i / kDense;
    const double ck = model_t(tk);
    if (ck < best_c) best_c = ck, best_t = tk;
  }
  double a = std::max(lo, best_t - (hi - lo) / kDense), b = std::min(hi, best_t + (hi - lo) / kDense);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int iter = 0; iter < 60; ++iter) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (model_t(x1) < model_t(x2)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  fit.t_s = 0.5 * (a + b);
  fit.min_coherence = model_t(fit.t_s);
  fit.f_prime = 1.0 / (2.0 * fit.t_s);

  if (options.bootstrap > 1) {
    std::vector<double> model_y(t.size()), resid(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      model_y[k] = model_at(mods[k], fit.B_rms.value, fit.frequency.value);
      resid[k] = c[k] - model_y[k];
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    std::vector<double> Bs, fs;
    for (int r = 0; r < options.bootstrap; ++r) {
      std::vector<double> y(t.size());
      for (std::size_t k = 0; k < t.size(); ++k) y[k] = model_y[k] + resid[pick(rng)];
      double sse = kHuge;
      const auto x = nelder_mead(sse_for(y), best_x, step, &sse);
      if (!(sse < kHuge)) continue;
      Bs.push_back(B0 * x[0]);
      fs.push_back(f0 * x[1]);
    }
    fit.B_rms.sigma = sample_std(Bs);
    fit.frequency.sigma = sample_std(fs);
  }
  return fit;
}

}  // namespace geozero
