#include "geozero/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "geozero/analysis.hpp"
#include "geozero/errors.hpp"
#include "geozero/filter_analysis.hpp"
#include "geozero/gates.hpp"

#ifndef GEOZERO_VERSION
#define GEOZERO_VERSION "0.0.0"
#endif
#ifndef GEOZERO_GIT_DESCRIBE
#define GEOZERO_GIT_DESCRIBE "unknown"
#endif

namespace geozero {

namespace {

using nlohmann::json;
using units::kNanosecond;

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw ConfigError("sweep needs at least one point", 0, "experiment.sweep_points");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[k] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return v;
}

std::string csv(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& cols) {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  const std::size_t rows = cols.empty() ? 0 : cols.front().size();
  char buf[40];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", cols[c][r]);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<double> scaled(const std::vector<double>& v, double scale) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / scale;
  return out;
}

std::string svg(const std::vector<PlotSeries>& series, const std::string& x, const std::string& y,
                const std::string& title) {
  std::ostringstream out;
  write_svg_plot(out, series, x, y, title);
  return out.str();
}

DerivedCouplings couplings(const RunConfig& c) {
  c.system.validate();
  c.system.require_zero_field();
  if (c.Omega) return derived_couplings(c.system, *c.Omega);
  return matched_couplings(c.system);
}

std::uint64_t seed_of(const RunConfig& c) { return c.seed; }

ExperimentOptions experiment_options(const RunConfig& c) {
  ExperimentOptions o;
  o.threads = c.threads;
  o.field_during_pulses = c.experiment.field_during_pulses.value_or(false);
  return o;
}

ACSignal::Phase theta_mode(const RunConfig& c, const char* fallback) {
  static const std::map<std::string, ACSignal::Phase> modes = {{"random", ACSignal::Phase::kRandomUniform},
                                                              {"stratified", ACSignal::Phase::kStratified},
                                                              {"grid", ACSignal::Phase::kUniformGrid},
                                                              {"fixed", ACSignal::Phase::kFixed}};
  return modes.at(c.experiment.theta0_mode.value_or(fallback));
}

std::optional<ACSignal> signal_of(const RunConfig& c, double f_default, double B_default) {
  ACSignal s;
  s.frequency = c.experiment.f.value_or(f_default);
  s.B_rms = c.experiment.B_rms.value_or(B_default);
  s.gamma_e = c.system.gamma_e;
  s.phase_mode = theta_mode(c, "stratified");
  s.theta0 = c.experiment.theta0.value_or(0.0);
  if (s.B_rms == 0.0) return std::nullopt;
  return s;
}

int realizations(const RunConfig& c, int fallback) { return c.n.value_or(fallback); }

json fit_json(const DecayFit& f) {
  json j = {{"T_us", f.T.value * 1e6},   {"T_sigma_us", f.T.sigma * 1e6}, {"p", f.p.value},
            {"p_sigma", f.p.sigma},      {"rms_residual", f.rms_residual}};
  if (f.model == DecayModel::kDampedCosine) {
    j["omega_MHz"] = units::to_mhz(f.omega.value);
    j["omega_sigma_MHz"] = units::to_mhz(f.omega.sigma);
  }
  return j;
}

// Population sweep for sequence-based experiments sharing the same CSV shape.
CommandOutput population_sweep(const std::string& name, const RunConfig& c, const std::string& column,
                               const std::vector<double>& sweep, const SweepPlan& plan, const DerivedCouplings& dc,
                               const std::optional<ACSignal>& signal, int n, ExperimentResult* result = nullptr) {
  ExperimentResult r =
      run_experiment(plan, dc, c.noise, signal, c.readout, sweep, n, seed_of(c), experiment_options(c));
  CommandOutput out;
  out.name = name;
  out.artifacts.push_back({name + ".csv", csv({column + "_ns", "p0_mean", "p0_stderr"},
                                              {scaled(r.sweep, kNanosecond), r.p0, r.stderr_p0})});
  if (c.svg) {
    out.artifacts.push_back(
        {name + ".svg", svg({{"p0", scaled(r.sweep, units::kMicrosecond), r.p0}}, column + " (us)", "P0", name)});
  }
  out.parameters["realizations"] = n;
  out.parameters["sweep_points"] = sweep.size();
  out.summary["p0_min"] = *std::min_element(r.p0.begin(), r.p0.end());
  out.summary["p0_max"] = *std::max_element(r.p0.begin(), r.p0.end());
  if (result) *result = std::move(r);
  return out;
}

CommandOutput cmd_rabi(const RunConfig& c) {
  c.system.validate();
  const DerivedCouplings matched = matched_couplings(c.system);
  const double Omega = c.Omega.value_or(matched.delta_prime);
  const DerivedCouplings dc = derived_couplings(c.system, Omega);
  const double cycle = two_pi_duration(dc, Omega);
  const auto t = linspace(c.experiment.sweep_start.value_or(0.0), c.experiment.sweep_stop.value_or(2.0 * cycle),
                          c.experiment.sweep_points.value_or(401));
  const Operator h = rwa_hamiltonian(dc, Omega, c.phi);
  std::vector<double> pp, p0, pm, dplus, dminus;
  for (double tk : t) {
    const StateVector s = geozero::apply(evolve_constant(h, tk).matrix, StateVector::basis(Level::kZero));
    pp.push_back(s.population(Level::kPlusOne));
    p0.push_back(s.population(Level::kZero));
    pm.push_back(s.population(Level::kMinusOne));
    dplus.push_back(std::norm(overlap(dressed::plus(), s)));
    dminus.push_back(std::norm(overlap(dressed::minus(), s)));
  }
  CommandOutput out;
  out.name = "rabi";
  out.artifacts.push_back({"rabi.csv", csv({"time_ns", "p_plus1", "p0", "p_minus1", "p_dressed_plus", "p_dressed_minus"},
                                           {scaled(t, kNanosecond), pp, p0, pm, dplus, dminus})});
  if (c.svg) {
    const auto x = scaled(t, kNanosecond);
    out.artifacts.push_back({"rabi.svg", svg({{"|0>", x, p0}, {"|->", x, dminus}, {"|+>", x, dplus}}, "time (ns)",
                                             "population", "Rabi drive")});
  }
  // Largest |-> transfer within the first cycle.
  double best = 0.0, t_best = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= cycle * (1.0 + 1e-9) && dminus[k] > best) best = dminus[k], t_best = t[k];
  }
  out.parameters = {{"Omega_MHz", units::to_mhz(Omega)}, {"delta_prime_MHz", units::to_mhz(dc.delta_prime)}};
  out.summary = {{"cycle_ns", cycle / kNanosecond},
                 {"T_prime_nominal_ns", matched.T_prime / kNanosecond},
                 {"max_minus_transfer_first_cycle", best},
                 {"t_max_transfer_ns", t_best / kNanosecond}};
  return out;
}

void attach_fit(CommandOutput& out, const ExperimentResult& r, DecayModel model) {
  try {
    out.summary["fit"] = fit_json(fit_stretched_exponential(r, model));
  } catch (const FitDiverged& e) {
    out.summary["fit"] = nullptr;
    out.summary["fit_error"] = e.what();
  }
}

CommandOutput cmd_ramsey(const RunConfig& c) {
  const DerivedCouplings dc = couplings(c);
  const auto sweep = linspace(c.experiment.sweep_start.value_or(0.0), c.experiment.sweep_stop.value_or(3e-6),
                              c.experiment.sweep_points.value_or(301));
  SweepPlan plan;
  plan.make = [&](double t) { return build_ramsey(dc, t); };
  const bool noisy = c.noise.kind != DephasingModel::Kind::kNone;
  ExperimentResult r;
  CommandOutput out =
      population_sweep("ramsey", c, "t_free", sweep, plan, dc, std::nullopt, realizations(c, noisy ? 500 : 1), &r);
  if (noisy && sweep.size() >= 8) attach_fit(out, r, DecayModel::kDampedCosine);
  return out;
}

// t_total is the time between the two boundary pulses.
CommandOutput cmd_echo(const RunConfig& c) {
  const DerivedCouplings dc = couplings(c);
  const auto sweep = linspace(c.experiment.sweep_start.value_or(2e-6), c.experiment.sweep_stop.value_or(400e-6),
                              c.experiment.sweep_points.value_or(40));
  SweepPlan plan;
  plan.make = [&](double t) { return build_echo(dc, t); };
  const bool noisy = c.noise.kind != DephasingModel::Kind::kNone;
  ExperimentResult r;
  CommandOutput out =
      population_sweep("echo", c, "t_total", sweep, plan, dc, std::nullopt, realizations(c, noisy ? 500 : 1), &r);
  if (noisy && sweep.size() >= 8) attach_fit(out, r, DecayModel::kStretchedExponential);
  return out;
}

CommandOutput cmd_zdd(const RunConfig& c) {
  const DerivedCouplings dc = couplings(c);
  const int N = c.experiment.N.value_or(64);
  const auto sweep = linspace(c.experiment.sweep_start.value_or(950e-9), c.experiment.sweep_stop.value_or(1050e-9),
                              c.experiment.sweep_points.value_or(41));
  const auto signal = signal_of(c, 0.5e6, 24.3e-9);
  const int n = realizations(c, 1000);
  SweepPlan plan;
  plan.make = [&](double t) { return build_zdd(dc, N, t); };
  const ExperimentResult r = run_experiment(plan, dc, c.noise, signal, c.readout, sweep, n, seed_of(c), experiment_options(c));
  CommandOutput out;
  out.name = "zdd";
  const auto coherence = r.coherence();
  out.artifacts.push_back({"zdd.csv", csv({"t_ns", "p0_mean", "p0_stderr", "coherence"},
                                          {scaled(r.sweep, kNanosecond), r.p0, r.stderr_p0, coherence})});
  if (c.svg) {
    out.artifacts.push_back(
        {"zdd.svg", svg({{"coherence", scaled(r.sweep, kNanosecond), coherence}}, "t (ns)", "coherence", "ZDD-" + std::to_string(N))});
  }
  out.parameters = {{"N", N}, {"realizations", n}, {"f_Hz", signal ? signal->frequency : 0.0},
                    {"B_rms_T", signal ? signal->B_rms : 0.0}};
  try {
    AcDipOptions o;
    o.gamma_e = c.system.gamma_e;
    const AcDipFit fit = fit_ac_dip(r, dc, N, o);
    out.summary["dip"] = {{"B_rms_nT", fit.B_rms.value * 1e9}, {"B_rms_sigma_nT", fit.B_rms.sigma * 1e9},
                          {"f_MHz", fit.frequency.value * 1e-6}, {"t_s_ns", fit.t_s / kNanosecond},
                          {"f_prime_MHz", fit.f_prime * 1e-6},   {"min_coherence", fit.min_coherence},
                          {"rms_residual", fit.rms_residual}};
  } catch (const NoDipFound& e) {
    out.summary["dip"] = nullptr;
    out.summary["dip_note"] = e.what();
  }
  return out;
}

CommandOutput cmd_corr(const RunConfig& c) {
  const DerivedCouplings dc = couplings(c);
  const int N = c.experiment.N.value_or(16);
  const double tau = c.experiment.tau.value_or(1e-6);
  const auto sweep = linspace(c.experiment.sweep_start.value_or(0.0), c.experiment.sweep_stop.value_or(19.9e-6),
                              c.experiment.sweep_points.value_or(200));
  const auto signal = signal_of(c, 0.5e6, 24.3e-9);
  const int n = realizations(c, 200);
  const ExperimentResult r =
      run_correlation(dc, N, tau, sweep, c.noise, signal, c.readout, n, seed_of(c), {}, experiment_options(c));
  CommandOutput out;
  out.name = "corr";
  out.artifacts.push_back(
      {"corr.csv", csv({"t_gap_ns", "p0_mean", "p0_stderr"}, {scaled(r.sweep, kNanosecond), r.p0, r.stderr_p0})});
  out.parameters = {{"N", N}, {"tau_s", tau}, {"realizations", n}, {"f_Hz", signal ? signal->frequency : 0.0},
                    {"B_rms_T", signal ? signal->B_rms : 0.0}};
  if (r.sweep.size() >= 8) {
    std::vector<double> centred = r.p0;
    const double mean = std::accumulate(centred.begin(), centred.end(), 0.0) / centred.size();
    for (double& v : centred) v -= mean;
    const Spectrum s = dft(r.sweep, centred);
    out.artifacts.push_back({"corr_spectrum.csv", csv({"frequency_MHz", "magnitude"}, {scaled(s.frequency, 1e6), s.magnitude})});
    const double spread = *std::max_element(r.p0.begin(), r.p0.end()) - *std::min_element(r.p0.begin(), r.p0.end());
    out.summary["p0_spread"] = spread;
    out.summary["bin_MHz"] = s.frequency[1] * 1e-6;
    if (spread > 0.0) {
      out.summary["dft_peak_MHz"] = dominant_frequency(r.sweep, r.p0) * 1e-6;
      const SinusoidFit fit = fit_sinusoid(r.sweep, r.p0);
      out.summary["fit"] = {{"frequency_MHz", fit.frequency * 1e-6}, {"frequency_sigma_MHz", fit.frequency_sigma * 1e-6},
                            {"amplitude", fit.amplitude}, {"offset", fit.offset}, {"rms_residual", fit.rms_residual}};
    }
    if (c.svg) {
      out.artifacts.push_back(
          {"corr.svg", svg({{"p0", scaled(r.sweep, units::kMicrosecond), r.p0}}, "t_gap (us)", "P0", "Correlation")});
      out.artifacts.push_back(
          {"corr_spectrum.svg", svg({{"|DFT|", scaled(s.frequency, 1e6), s.magnitude}}, "frequency (MHz)", "magnitude", "Spectrum")});
    }
  }
  return out;
}

FfProbeOptions probe_options(const RunConfig& c) {
  FfProbeOptions o;
  o.probe_phase = c.experiment.probe_phase.value_or(o.probe_phase);
  o.phase_samples = c.n.value_or(o.phase_samples);
  o.field_during_pulses = c.experiment.field_during_pulses.value_or(true);
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

CommandOutput cmd_ff(const RunConfig& c) {
  const DerivedCouplings dc = couplings(c);
  const int N = c.experiment.N.value_or(16);
  const double t = c.experiment.t.value_or(1e-6);
  const auto f = linspace(c.experiment.f_start.value_or(0.1e6), c.experiment.f_stop.value_or(1.0e6),
                          c.experiment.f_points.value_or(91));
  const SequenceSpec seq = build_zdd(dc, N, t);
  const ModulationFunction ideal = modulation_function(seq, PulseConvention::kInstantaneous);
  const ModulationFunction gapped = modulation_function(seq, PulseConvention::kZeroDuringPulse);
  const FfProbeOptions o = probe_options(c);
  std::vector<double> fi, fz, fs;
  for (double fk : f) {
    const double w = kTwoPi * fk;
    fi.push_back(filter_function(ideal, w));
    fz.push_back(filter_function(gapped, w));
    fs.push_back(measure_ff_via_simulation(seq, w, dc, c.readout, o));
  }
  CommandOutput out;
  out.name = "ff";
  out.artifacts.push_back({"ff.csv", csv({"f_MHz", "F_ideal", "F_zero_during_pulse", "F_sim"}, {scaled(f, 1e6), fi, fz, fs})});
  if (c.svg) {
    const auto x = scaled(f, 1e6);
    out.artifacts.push_back({"ff.svg", svg({{"ideal", x, fi}, {"zero during pulse", x, fz}, {"simulated", x, fs}},
                                           "f (MHz)", "F", "Filter function ZDD-" + std::to_string(N))});
  }
  out.parameters = {{"N", N}, {"t_s", t}, {"duty_cycle", 2.0 * pulse_length(dc) / t}, {"probe_phase_rad", o.probe_phase}};
  out.summary = {{"F_ideal_max", *std::max_element(fi.begin(), fi.end())},
                 {"F_sim_max", *std::max_element(fs.begin(), fs.end())}};
  return out;
}

CommandOutput cmd_duty(const RunConfig& c) {
  const int N = c.experiment.N.value_or(16);
  const double t = c.experiment.t.value_or(1e-6);
  std::vector<double> duty = c.experiment.duty_cycles;
  if (duty.empty()) duty = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const auto f = linspace(c.experiment.f_start.value_or(0.3e6), c.experiment.f_stop.value_or(0.7e6),
                          c.experiment.f_points.value_or(21));
  std::vector<double> grid;
  for (double fk : f) grid.push_back(kTwoPi * fk);
  const auto scan = duty_cycle_deviation_scan(N, t, duty, grid, probe_options(c));
  std::vector<double> d, dp, dev;
  for (const auto& s : scan) {
    d.push_back(s.duty_cycle);
    dp.push_back(units::to_mhz(s.delta_prime));
    dev.push_back(s.deviation);
  }
  CommandOutput out;
  out.name = "duty";
  out.artifacts.push_back({"duty.csv", csv({"duty_cycle", "delta_prime_MHz", "deviation"}, {d, dp, dev})});
  if (c.svg) out.artifacts.push_back({"duty.svg", svg({{"deviation", d, dev}}, "duty cycle", "deviation",
                                                  "ZDD-" + std::to_string(N) + " deviation")});
  out.parameters = {{"N", N}, {"t_s", t}, {"f_points", f.size()}};
  json rows = json::array();
  for (const auto& s : scan) rows.push_back({{"duty_cycle", s.duty_cycle}, {"deviation", s.deviation}});
  out.summary["deviation"] = rows;
  return out;
}

StateVector initial_state(const RunConfig& c) {
  const std::string name = c.experiment.initial.value_or("minus");
  if (name == "plus") return dressed::plus();
  if (name == "plus1") return StateVector::basis(Level::kPlusOne);
  if (name == "minus1") return StateVector::basis(Level::kMinusOne);
  return dressed::minus();
}

CommandOutput cmd_compare(const RunConfig& c) {
  c.system.validate();
  const DerivedCouplings matched = matched_couplings(c.system);
  const int N = c.experiment.N.value_or(8);
  const double t = c.experiment.t.value_or(1e-6);
  std::vector<double> ratios = c.experiment.drive_ratios;
  if (ratios.empty()) ratios = {1.0, 10.0};
  std::vector<double> amplitudes;
  for (double r : ratios) amplitudes.push_back(r * matched.delta_prime);
  const std::vector<SequenceBuilder> builders = {
      [N, t](const DerivedCouplings& dc) { return build_zdd(dc, N, t); },
      [N, t](const DerivedCouplings& dc) { return build_plain_train(dc, N, t); },
  };
  const auto traces = compare_sequences(c.system, builders, amplitudes, initial_state(c));
  std::ostringstream table;
  write_population_csv(table, traces);
  CommandOutput out;
  out.name = "compare";
  out.artifacts.push_back({"compare.csv", table.str()});
  if (c.svg) {
    std::vector<PlotSeries> series;
    for (const auto& tr : traces) {
      PlotSeries s;
      char label[64];
      std::snprintf(label, sizeof label, "%s, Omega/delta' = %.3g", tr.name.c_str(), tr.Omega / matched.delta_prime);
      s.label = label;
      for (const auto& r : tr.rows) {
        s.x.push_back(r.t_end / units::kMicrosecond);
        s.y.push_back(r.p_zero);
      }
      series.push_back(std::move(s));
    }
    out.artifacts.push_back({"compare.svg", svg(series, "time (us)", "P(|0>)", "Population of |0>")});
  }
  json rows = json::array();
  for (const auto& tr : traces) {
    rows.push_back({{"sequence", tr.name}, {"Omega_MHz", units::to_mhz(tr.Omega)}, {"max_free_leakage", tr.max_free_leakage()}});
  }
  out.parameters = {{"N", N}, {"t_s", t}, {"initial", c.experiment.initial.value_or("minus")}};
  out.summary["traces"] = rows;
  return out;
}

CommandOutput cmd_validate_rwa(const RunConfig& c) {
  SystemParams p = c.system;
  p.validate();
  const DerivedCouplings matched = matched_couplings(p);
  const double ratio = c.experiment.carrier_ratio.value_or(1000.0);
  // Scaled problem: carrier at ratio * delta', transverse terms left as configured.
  p.D = ratio * matched.delta_prime - p.d_par * p.Pi[2];
  const double Omega = c.Omega.value_or(matched.delta_prime);
  const DriveParams d{Omega, p.resonance(), c.phi};
  const double duration = two_pi_duration(derived_couplings(p, Omega), Omega);
  const int spp = c.experiment.steps_per_period.value_or(10000);
  const RwaValidation v = validate_rwa(p, d, duration, spp);

  const double fastest = p.resonance() + Omega + p.delta;
  auto h = [&](double t) { return lab_hamiltonian(p, d, t); };
  const double period = kTwoPi / p.resonance();
  const long base = static_cast<long>(std::ceil(duration / period * 100.0));
  const double order = step_doubling_order(h, 0.0, duration, base, fastest);

  CommandOutput out;
  out.name = "validate-rwa";
  out.artifacts.push_back({"validate_rwa.csv", csv({"omega_ratio", "steps_per_period", "max_infidelity", "order"},
                                                   {{v.omega_ratio}, {static_cast<double>(spp)}, {v.max_infidelity}, {order}})});
  out.parameters = {{"carrier_ratio", ratio}, {"Omega_over_omega", v.omega_ratio}, {"duration_s", duration},
                    {"steps_per_period", spp}};
  out.summary = {{"max_infidelity", v.max_infidelity}, {"integrator_order", order}};
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"rabi", "ramsey", "echo", "zdd", "corr",
                                                 "ff", "duty", "compare", "validate-rwa"};
  return names;
}

CommandOutput run_command(const std::string& name, const RunConfig& config) {
  if (name == "rabi") return cmd_rabi(config);
  if (name == "ramsey") return cmd_ramsey(config);
  if (name == "echo") return cmd_echo(config);
  if (name == "zdd") return cmd_zdd(config);
  if (name == "corr") return cmd_corr(config);
  if (name == "ff") return cmd_ff(config);
  if (name == "duty") return cmd_duty(config);
  if (name == "compare") return cmd_compare(config);
  if (name == "validate-rwa") return cmd_validate_rwa(config);
  throw ConfigError("unknown experiment '" + name + "'", 0, "experiment.name");
}

std::string version_string() { return std::string("geozero ") + GEOZERO_VERSION + " (" + GEOZERO_GIT_DESCRIBE + ")"; }

std::vector<std::filesystem::path> write_outputs(const CommandOutput& output, const RunConfig& config,
                                                 const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<Artifact> all = output.artifacts;
  json meta = {{"experiment", output.name},
               {"version", version_string()},
               {"seed", config.seed},
               {"config", serialize_config(config)},
               {"parameters", output.parameters},
               {"summary", output.summary}};
  json files = json::array();
  for (const auto& a : output.artifacts) files.push_back(a.filename);
  meta["files"] = files;
  std::string stem = output.name;
  std::replace(stem.begin(), stem.end(), '-', '_');
  all.push_back({stem + ".meta.json", meta.dump(2) + "\n"});

  std::vector<fs::path> staged, final_paths;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    for (const auto& p : final_paths) fs::remove(p, ec);
  };
  try {
    fs::create_directories(dir);
    for (const auto& a : all) {
      const fs::path tmp = dir / (a.filename + ".partial");
      staged.push_back(tmp);
      std::ofstream f(tmp, std::ios::binary);
      f << a.content;
      f.close();
      if (!f) throw Error("cannot write " + tmp.string());
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      const fs::path target = dir / all[i].filename;
      fs::rename(staged[i], target);
      final_paths.push_back(target);
    }
    staged.clear();
  } catch (...) {
    cleanup();
    throw;
  }
  return final_paths;
}

}  // namespace geozero
