#include <doctest.h>

#include <fstream>
#include <random>

#include "geozero/config.hpp"
#include "geozero/errors.hpp"

using namespace geozero;

namespace {

int error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_field(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config_text("");
  CHECK(c == RunConfig{});
  CHECK(c.system.delta == doctest::Approx(kTwoPi * 3.04e6));
  CHECK_FALSE(c.Omega.has_value());
  CHECK(c.seed == 1);
  CHECK(c.noise.kind == DephasingModel::Kind::kNone);
}

TEST_CASE("units are converted to SI") {
  const RunConfig c = parse_config_text(R"(
# comment
[system]
delta_MHz = 3.0   ; trailing comment
D_MHz = 2870
[drive]
Omega_MHz = 6
phi_rad = 0.5
[experiment]
name = zdd
N = 16
t_ns = 1000
f_MHz = 0.5
B_rms_nT = 24.3
theta0 = stratified
duty_cycles = 0.1, 0.4
[noise]
kind = ou
ou_sigma_rad_per_us = 0.048, 0.1
ou_tau_us = 1000, 0.1
[readout]
kind = shot_noise
contrast = 0.3
[monte_carlo]
n = 200
seed = 42
)");
  CHECK(c.system.delta == doctest::Approx(kTwoPi * 3.0e6));
  CHECK(*c.Omega == doctest::Approx(kTwoPi * 6e6));
  CHECK(c.phi == 0.5);
  CHECK(c.experiment.name == "zdd");
  CHECK(*c.experiment.N == 16);
  CHECK(*c.experiment.t == doctest::Approx(1e-6));
  CHECK(*c.experiment.f == doctest::Approx(0.5e6));
  CHECK(*c.experiment.B_rms == doctest::Approx(24.3e-9));
  CHECK(c.experiment.duty_cycles == std::vector<double>{0.1, 0.4});
  REQUIRE(c.noise.ou.size() == 2);
  CHECK(c.noise.ou[0].sigma == doctest::Approx(4.8e4));
  CHECK(c.noise.ou[1].tau_c == doctest::Approx(1e-7));
  CHECK(c.readout.kind == ReadoutModel::Kind::kShotNoise);
  CHECK(*c.n == 200);
  CHECK(c.seed == 42);

  SUBCASE("T2* sets the quasi-static width") {
    const RunConfig q = parse_config_text("[noise]\nkind = quasi_static\nT2_star_us = 2\n");
    CHECK(q.noise.sigma == doctest::Approx(std::sqrt(2.0) / 2e-6));
  }
}

TEST_CASE("errors carry line and field") {
  CHECK(error_line("[system]\ndelta_MHz = abc\n") == 2);
  CHECK(error_field("[system]\ndelta_MHz = abc\n") == "system.delta_MHz");
  CHECK(error_line("[system]\n\nbogus = 1\n") == 3);
  CHECK(error_field("[system]\nbogus = 1\n") == "system.bogus");
  CHECK(error_line("[nowhere]\n") == 1);
  CHECK(error_line("[system]\ndelta_MHz = 1\ndelta_MHz = 2\n") == 3);
  CHECK(error_line("delta_MHz = 1\n") == 1);
  CHECK(error_line("[system]\njust text\n") == 2);
  CHECK(error_field("[experiment]\nname = nope\n") == "experiment.name");
  CHECK(error_field("[experiment]\nN = 0\n") == "experiment.N");
  CHECK(error_field("[experiment]\nN = 2.5\n") == "experiment.N");
  CHECK(error_field("[noise]\nkind = ou\nou_sigma_rad_per_us = 1, 2\nou_tau_us = 1\n").rfind("noise.", 0) == 0);
  CHECK(error_field("[readout]\ncontrast = 1.5\n") == "readout.contrast");
  CHECK(error_field("[system]\ndelta_MHz = -1\n") == "system");
  CHECK(error_field("[system]\ndelta_MHz = inf\n") == "system.delta_MHz");
  CHECK_THROWS_AS(parse_config_file("/nonexistent/geozero.ini"), ConfigError);

  try {
    parse_config_text("[system]\ndelta_MHz = x\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse, serialize, parse is the identity") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto num = [&](double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", lo + (hi - lo) * u(rng));
    return std::string(buf);
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::string text = "[system]\ndelta_MHz = " + num(1, 10) + "\nD_MHz = " + num(2000, 3000) +
                       "\nd_par_MHz = " + num(0, 1e-3) + "\nPi_y = " + num(0, 1) + "\nPi_z = " + num(0, 1) + "\n";
    text += "[drive]\nphi_rad = " + num(-3, 3) + "\n";
    if (u(rng) < 0.5) text += "Omega_MHz = " + num(0.1, 30) + "\n";
    text += "[experiment]\nname = zdd\nN = " + std::to_string(2 + rng() % 100) + "\nt_ns = " + num(500, 1500) +
            "\nf_MHz = " + num(0, 1) + "\nB_rms_nT = " + num(0, 100) + "\ntau_ns = " + num(100, 2000) +
            "\nsweep_start_ns = " + num(0, 10) + "\nsweep_stop_ns = " + num(10, 1e5) + "\n";
    if (u(rng) < 0.5) text += "duty_cycles = " + num(0, 1) + ", " + num(0, 1) + "\n";
    if (u(rng) < 0.5) text += "drive_ratios = " + num(0, 20) + "\n";
    if (u(rng) < 0.5) text += std::string("field_during_pulses = ") + (u(rng) < 0.5 ? "true" : "false") + "\n";
    if (u(rng) < 0.5) {
      text += "[noise]\nkind = ou\nou_sigma_rad_per_us = " + num(0.001, 1) + ", " + num(0.001, 1) +
              "\nou_tau_us = " + num(0.01, 1000) + ", " + num(0.01, 1000) + "\n";
    } else if (u(rng) < 0.5) {
      text += "[noise]\nkind = quasi_static\nT2_star_us = " + num(0.1, 100) + "\n";
    } else {
      text += "[noise]\nkind = envelope\nenvelope_T_us = " + num(1, 500) + "\nenvelope_p = " + num(1, 3) + "\n";
    }
    text += "[monte_carlo]\nn = " + std::to_string(1 + rng() % 5000) + "\nseed = " + std::to_string(rng()) +
            "\nthreads = 3\n[output]\nsvg = true\ndir = out/run" + std::to_string(trial) + "\n";

    const RunConfig first = parse_config_text(text);
    const std::string emitted = serialize_config(first);
    const RunConfig second = parse_config_text(emitted);
    CHECK(second == first);
    CHECK(serialize_config(second) == emitted);
    if (!(second == first)) {
      MESSAGE(text << "\n---\n" << emitted);
      break;
    }
  }
}

TEST_CASE("exact user values") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double user = u(rng);
    for (double scale : {kTwoPi * 1e6, 1e-9, 1e-6, 2.5}) {
      const double si = user * scale;
      CHECK(exact_user_value(si, scale) * scale == si);
    }
  }
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "geozero_test_config.ini";
  {
    std::ofstream out(path);
    out << "[experiment]\nname = ramsey\n";
  }
  CHECK(parse_config_file(path).experiment.name == "ramsey");
  std::filesystem::remove(path);
}
