#include "geozero/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "geozero/errors.hpp"
#include "geozero/units.hpp"

namespace geozero {

namespace {

constexpr double kMHz = units::kMHzToRadPerSec;  // MHz -> rad/s
constexpr double kHz = 1e6;                      // signal MHz -> Hz
constexpr double kNs = units::kNanosecond;
constexpr double kUs = units::kMicrosecond;
constexpr double kPerUs = 1e6;  // rad/us -> rad/s
constexpr double kGHzPerT = kTwoPi * 1e9;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& raw, int line, const std::string& field) {
  double v = 0.0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  if (!raw.empty() && raw[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || raw.empty()) throw ConfigError("expected a number, got '" + raw + "'", line, field);
  if (!std::isfinite(v)) throw ConfigError("value must be finite", line, field);
  return v;
}

long long parse_integer(const std::string& raw, int line, const std::string& field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty()) {
    throw ConfigError("expected an integer, got '" + raw + "'", line, field);
  }
  return v;
}

bool parse_bool(const std::string& raw, int line, const std::string& field) {
  if (raw == "true" || raw == "yes" || raw == "1") return true;
  if (raw == "false" || raw == "no" || raw == "0") return false;
  throw ConfigError("expected true or false, got '" + raw + "'", line, field);
}

std::vector<double> parse_list(const std::string& raw, double scale, int line, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), line, field) * scale);
  if (out.empty()) throw ConfigError("empty list", line, field);
  return out;
}

std::string format_list(const std::vector<double>& v, double scale) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(exact_user_value(v[i], scale));
  }
  return out;
}

/// User value of T2_star_us that parses to `sigma`, used only when the
/// direct sigma_rad_per_us form has no exact preimage.
std::optional<double> t2_star_user(double sigma) {
  if (exact_user_value(sigma, kPerUs) * kPerUs == sigma) return std::nullopt;
  double u = std::sqrt(2.0) / sigma / kUs;
  for (int i = 0; i < 16; ++i) {
    const double got = std::sqrt(2.0) / (u * kUs);
    if (got == sigma) return u;
    u = std::nextafter(u, got < sigma ? -HUGE_VAL : HUGE_VAL);
  }
  return std::nullopt;
}

using Getter = std::function<std::optional<std::string>(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, const std::string&, int, const std::string&)>;

struct Key {
  std::string section;
  std::string name;
  Setter set;
  Getter get;
};

template <typename Access>
Key number(std::string section, std::string name, double scale, Access access, bool always = false) {
  return {section, name,
          [=](RunConfig& c, const std::string& raw, int line, const std::string& f) {
            access(c) = parse_number(raw, line, f) * scale;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            RunConfig defaults;
            const double v = access(const_cast<RunConfig&>(c));
            if (!always && v == access(defaults)) return std::nullopt;
            return format_number(exact_user_value(v, scale));
          }};
}

template <typename Access>
Key opt_number(std::string section, std::string name, double scale, Access access) {
  return {section, name,
          [=](RunConfig& c, const std::string& raw, int line, const std::string& f) {
            access(c) = parse_number(raw, line, f) * scale;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const std::optional<double>& v = access(const_cast<RunConfig&>(c));
            if (!v) return std::nullopt;
            return format_number(exact_user_value(*v, scale));
          }};
}

template <typename Access>
Key opt_int(std::string section, std::string name, Access access, long long lo = 0) {
  return {section, name,
          [=](RunConfig& c, const std::string& raw, int line, const std::string& f) {
            const long long v = parse_integer(raw, line, f);
            if (v < lo || v > 1000000000LL) throw ConfigError("integer out of range", line, f);
            access(c) = static_cast<int>(v);
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const std::optional<int>& v = access(const_cast<RunConfig&>(c));
            if (!v) return std::nullopt;
            return std::to_string(*v);
          }};
}

template <typename Access>
Key opt_choice(std::string section, std::string name, std::set<std::string> choices, Access access) {
  return {section, name,
          [=](RunConfig& c, const std::string& raw, int line, const std::string& f) {
            if (!choices.count(raw)) throw ConfigError("unknown value '" + raw + "'", line, f);
            access(c) = raw;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const std::optional<std::string>& v = access(const_cast<RunConfig&>(c));
            return v ? std::optional<std::string>(*v) : std::nullopt;
          }};
}

template <typename Access>
Key list(std::string section, std::string name, double scale, Access access) {
  return {section, name,
          [=](RunConfig& c, const std::string& raw, int line, const std::string& f) {
            access(c) = parse_list(raw, scale, line, f);
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const std::vector<double>& v = access(const_cast<RunConfig&>(c));
            if (v.empty()) return std::nullopt;
            return format_list(v, scale);
          }};
}

const char* noise_kind_name(DephasingModel::Kind k) {
  switch (k) {
    case DephasingModel::Kind::kNone:
      return "none";
    case DephasingModel::Kind::kQuasiStaticGaussian:
      return "quasi_static";
    case DephasingModel::Kind::kOrnsteinUhlenbeck:
      return "ou";
    case DephasingModel::Kind::kEnvelope:
      return "envelope";
  }
  return "none";
}

// OU lists arrive as two parallel lists; each fills one member of the components.
void set_ou_member(RunConfig& c, const std::vector<double>& values, double OUComponent::*member) {
  if (c.noise.ou.size() < values.size()) c.noise.ou.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) c.noise.ou[i].*member = values[i];
}

std::vector<double> ou_member(const RunConfig& c, double OUComponent::*member) {
  std::vector<double> out;
  for (const auto& comp : c.noise.ou) out.push_back(comp.*member);
  return out;
}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    // [system]
    k.push_back(number("system", "D_MHz", kMHz, [](RunConfig& c) -> double& { return c.system.D; }, true));
    k.push_back(number("system", "delta_MHz", kMHz, [](RunConfig& c) -> double& { return c.system.delta; }, true));
    k.push_back(number("system", "Delta_MHz", kMHz, [](RunConfig& c) -> double& { return c.system.Delta; }, true));
    k.push_back(number("system", "d_par_MHz", kMHz, [](RunConfig& c) -> double& { return c.system.d_par; }));
    k.push_back(number("system", "d_perp_MHz", kMHz, [](RunConfig& c) -> double& { return c.system.d_perp; }));
    k.push_back(number("system", "Pi_x", 1.0, [](RunConfig& c) -> double& { return c.system.Pi[0]; }));
    k.push_back(number("system", "Pi_y", 1.0, [](RunConfig& c) -> double& { return c.system.Pi[1]; }));
    k.push_back(number("system", "Pi_z", 1.0, [](RunConfig& c) -> double& { return c.system.Pi[2]; }));
    k.push_back(number("system", "gamma_e_GHz_per_T", kGHzPerT, [](RunConfig& c) -> double& { return c.system.gamma_e; }));
    // [drive]
    k.push_back(opt_number("drive", "Omega_MHz", kMHz, [](RunConfig& c) -> std::optional<double>& { return c.Omega; }));
    k.push_back(number("drive", "phi_rad", 1.0, [](RunConfig& c) -> double& { return c.phi; }));
    // [experiment]
    k.push_back({"experiment", "name",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   static const std::set<std::string> names = {"rabi", "ramsey", "echo", "zdd", "corr",
                                                               "ff", "duty", "compare", "validate-rwa"};
                   if (!names.count(raw)) throw ConfigError("unknown experiment '" + raw + "'", line, f);
                   c.experiment.name = raw;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.experiment.name.empty()) return std::nullopt;
                   return c.experiment.name;
                 }});
    auto& e = k;
    e.push_back(opt_int("experiment", "N", [](RunConfig& c) -> std::optional<int>& { return c.experiment.N; }, 1));
    e.push_back(opt_number("experiment", "t_ns", kNs, [](RunConfig& c) -> std::optional<double>& { return c.experiment.t; }));
    e.push_back(opt_number("experiment", "tau_ns", kNs, [](RunConfig& c) -> std::optional<double>& { return c.experiment.tau; }));
    e.push_back(opt_number("experiment", "sweep_start_ns", kNs,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.sweep_start; }));
    e.push_back(opt_number("experiment", "sweep_stop_ns", kNs,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.sweep_stop; }));
    e.push_back(opt_int("experiment", "sweep_points",
                        [](RunConfig& c) -> std::optional<int>& { return c.experiment.sweep_points; }, 1));
    e.push_back(opt_number("experiment", "f_MHz", kHz, [](RunConfig& c) -> std::optional<double>& { return c.experiment.f; }));
    e.push_back(opt_number("experiment", "B_rms_nT", units::kNanotesla,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.B_rms; }));
    e.push_back(opt_choice("experiment", "theta0", {"random", "stratified", "grid", "fixed"},
                           [](RunConfig& c) -> std::optional<std::string>& { return c.experiment.theta0_mode; }));
    e.push_back(opt_number("experiment", "theta0_rad", 1.0,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.theta0; }));
    e.push_back(opt_number("experiment", "f_start_MHz", kHz,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.f_start; }));
    e.push_back(opt_number("experiment", "f_stop_MHz", kHz,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.f_stop; }));
    e.push_back(opt_int("experiment", "f_points", [](RunConfig& c) -> std::optional<int>& { return c.experiment.f_points; }, 1));
    e.push_back(list("experiment", "duty_cycles", 1.0,
                     [](RunConfig& c) -> std::vector<double>& { return c.experiment.duty_cycles; }));
    e.push_back(list("experiment", "drive_ratios", 1.0,
                     [](RunConfig& c) -> std::vector<double>& { return c.experiment.drive_ratios; }));
    e.push_back(opt_number("experiment", "probe_phase_rad", 1.0,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.probe_phase; }));
    e.push_back(opt_number("experiment", "carrier_ratio", 1.0,
                           [](RunConfig& c) -> std::optional<double>& { return c.experiment.carrier_ratio; }));
    e.push_back(opt_int("experiment", "steps_per_period",
                        [](RunConfig& c) -> std::optional<int>& { return c.experiment.steps_per_period; }, 1));
    e.push_back({"experiment", "field_during_pulses",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   c.experiment.field_during_pulses = parse_bool(raw, line, f);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (!c.experiment.field_during_pulses) return std::nullopt;
                   return *c.experiment.field_during_pulses ? "true" : "false";
                 }});
    e.push_back(opt_choice("experiment", "initial", {"plus", "minus", "plus1", "minus1"},
                           [](RunConfig& c) -> std::optional<std::string>& { return c.experiment.initial; }));
    // [noise]
    k.push_back({"noise", "kind",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   if (raw == "none") {
                     c.noise.kind = DephasingModel::Kind::kNone;
                   } else if (raw == "quasi_static") {
                     c.noise.kind = DephasingModel::Kind::kQuasiStaticGaussian;
                   } else if (raw == "ou") {
                     c.noise.kind = DephasingModel::Kind::kOrnsteinUhlenbeck;
                   } else if (raw == "envelope") {
                     c.noise.kind = DephasingModel::Kind::kEnvelope;
                   } else {
                     throw ConfigError("unknown noise kind '" + raw + "'", line, f);
                   }
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.noise.kind == DephasingModel::Kind::kNone) return std::nullopt;
                   return std::string(noise_kind_name(c.noise.kind));
                 }});
    // sigma comes either directly or as sqrt2 / T2*; emit whichever form
    // reproduces the stored value exactly.
    k.push_back({"noise", "sigma_rad_per_us",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   c.noise.sigma = parse_number(raw, line, f) * kPerUs;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.noise.sigma == 0.0 || t2_star_user(c.noise.sigma)) return std::nullopt;
                   return format_number(exact_user_value(c.noise.sigma, kPerUs));
                 }});
    k.push_back({"noise", "T2_star_us",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   const double T = parse_number(raw, line, f) * kUs;
                   if (!(T > 0.0)) throw ConfigError("must be positive", line, f);
                   c.noise.sigma = std::sqrt(2.0) / T;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.noise.sigma == 0.0) return std::nullopt;
                   const auto u = t2_star_user(c.noise.sigma);
                   return u ? std::optional<std::string>(format_number(*u)) : std::nullopt;
                 }});
    k.push_back({"noise", "ou_sigma_rad_per_us",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   set_ou_member(c, parse_list(raw, kPerUs, line, f), &OUComponent::sigma);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.noise.ou.empty()) return std::nullopt;
                   return format_list(ou_member(c, &OUComponent::sigma), kPerUs);
                 }});
    k.push_back({"noise", "ou_tau_us",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   set_ou_member(c, parse_list(raw, kUs, line, f), &OUComponent::tau_c);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.noise.ou.empty()) return std::nullopt;
                   return format_list(ou_member(c, &OUComponent::tau_c), kUs);
                 }});
    k.push_back(number("noise", "envelope_T_us", kUs, [](RunConfig& c) -> double& { return c.noise.envelope_T; }));
    k.push_back(number("noise", "envelope_p", 1.0, [](RunConfig& c) -> double& { return c.noise.envelope_p; }));
    // [readout]
    k.push_back({"readout", "kind",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   if (raw == "ideal") {
                     c.readout.kind = ReadoutModel::Kind::kIdeal;
                   } else if (raw == "shot_noise") {
                     c.readout.kind = ReadoutModel::Kind::kShotNoise;
                   } else {
                     throw ConfigError("unknown readout kind '" + raw + "'", line, f);
                   }
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.readout.kind == ReadoutModel::Kind::kIdeal) return std::nullopt;
                   return std::string("shot_noise");
                 }});
    k.push_back(number("readout", "photons_per_shot", 1.0, [](RunConfig& c) -> double& { return c.readout.photons_per_shot; }));
    k.push_back(number("readout", "contrast", 1.0, [](RunConfig& c) -> double& { return c.readout.contrast; }));
    // [monte_carlo]
    k.push_back(opt_int("monte_carlo", "n", [](RunConfig& c) -> std::optional<int>& { return c.n; }, 1));
    k.push_back({"monte_carlo", "seed",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   std::uint64_t v = 0;
                   const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
                   if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty()) {
                     throw ConfigError("expected a non-negative integer", line, f);
                   }
                   c.seed = v;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }});
    k.push_back({"monte_carlo", "threads",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   const long long v = parse_integer(raw, line, f);
                   if (v < 0 || v > 4096) throw ConfigError("thread count out of range", line, f);
                   c.threads = static_cast<unsigned>(v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.threads == 0) return std::nullopt;
                   return std::to_string(c.threads);
                 }});
    // [output]
    k.push_back({"output", "dir",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   if (raw.empty()) throw ConfigError("empty directory", line, f);
                   c.out_dir = raw;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.out_dir == ".") return std::nullopt;
                   return c.out_dir;
                 }});
    k.push_back({"output", "svg",
                 [](RunConfig& c, const std::string& raw, int line, const std::string& f) {
                   c.svg = parse_bool(raw, line, f);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (!c.svg) return std::nullopt;
                   return std::string("true");
                 }});
    return k;
  }();
  return keys;
}

void validate(const RunConfig& c) {
  for (const auto& comp : c.noise.ou) {
    if (!(comp.tau_c > 0.0) || comp.sigma < 0.0) {
      throw ConfigError("OU components need matching ou_sigma_rad_per_us and positive ou_tau_us lists", 0,
                        "noise.ou_tau_us");
    }
  }
  if (c.noise.kind == DephasingModel::Kind::kEnvelope &&
      (!(c.noise.envelope_T > 0.0) || c.noise.envelope_p < 1.0 || c.noise.envelope_p > 3.0)) {
    throw ConfigError("envelope noise needs envelope_T_us > 0 and envelope_p in [1, 3]", 0, "noise.envelope_T_us");
  }
  if (c.readout.contrast <= 0.0 || c.readout.contrast > 1.0) {
    throw ConfigError("contrast must lie in (0, 1]", 0, "readout.contrast");
  }
  try {
    c.system.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0, "system");
  }
}

}  // namespace

double exact_user_value(double si, double scale) {
  if (scale == 1.0 || si == 0.0) return si;
  double u = si / scale;
  for (int i = 0; i < 8 && u * scale != si; ++i) {
    u = std::nextafter(u, u * scale < si ? HUGE_VAL : -HUGE_VAL);
  }
  return u;
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string section;
  std::set<std::string> seen;
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections = {"system", "drive", "experiment", "noise",
                                                     "readout", "monte_carlo", "output"};
      if (!sections.count(section)) throw ConfigError("unknown section", line_no, section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside any section", line_no, key);
    const std::string field = section + "." + key;
    const Key* match = nullptr;
    for (const auto& k : schema()) {
      if (k.section == section && k.name == key) match = &k;
    }
    if (!match) throw ConfigError("unknown key", line_no, field);
    if (!seen.insert(field).second) throw ConfigError("duplicate key", line_no, field);
    match->set(c, value, line_no, field);
  }
  validate(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : schema()) {
    const auto value = k.get(c);
    if (!value) continue;
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      out << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.name << " = " << *value << '\n';
  }
  return out.str();
}

}  // namespace geozero
