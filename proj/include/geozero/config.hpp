#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geozero/hamiltonian.hpp"
#include "geozero/sensing.hpp"

namespace geozero {

/// Experiment parameters. Unset optionals fall back to per-command defaults.
/// Times in s, frequencies in Hz, fields in T once parsed.
struct ExperimentConfig {
  std::string name;
  std::optional<int> N;
  std::optional<double> t;
  std::optional<double> tau;
  std::optional<double> sweep_start;
  std::optional<double> sweep_stop;
  std::optional<int> sweep_points;
  std::optional<double> f;
  std::optional<double> B_rms;
  std::optional<std::string> theta0_mode;  // random | stratified | grid | fixed
  std::optional<double> theta0;
  std::optional<double> f_start;
  std::optional<double> f_stop;
  std::optional<int> f_points;
  std::vector<double> duty_cycles;
  std::vector<double> drive_ratios;  // Omega / delta'
  std::optional<double> probe_phase;
  std::optional<double> carrier_ratio;  // omega / delta' for lab-frame validation
  std::optional<int> steps_per_period;
  std::optional<bool> field_during_pulses;
  std::optional<std::string> initial;  // plus | minus | plus1 | minus1

  bool operator==(const ExperimentConfig&) const = default;
};

struct RunConfig {
  SystemParams system;
  std::optional<double> Omega;  // rad/s; unset means matched (Omega = delta')
  double phi = 0.0;
  ExperimentConfig experiment;
  DephasingModel noise;
  ReadoutModel readout;
  std::optional<int> n;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_dir = ".";
  bool svg = false;

  bool operator==(const RunConfig&) const = default;
};

/// INI-like text: [section] headers, "key = value" lines, '#' or ';'
/// comments. Physical keys carry their unit in the name (t_ns, f_MHz,
/// B_rms_nT, ...). Throws ConfigError with line and field on any problem.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Emits every set field in user units, chosen so that parsing the output
/// reproduces the same SI values bit for bit.
std::string serialize_config(const RunConfig& config);

/// Smallest-error user-unit value u with u * scale == si exactly, when one
/// exists next to si / scale.
double exact_user_value(double si, double scale);

}  // namespace geozero
