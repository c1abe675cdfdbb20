#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "slp/cli.hpp"
#include "slp/errors.hpp"
#include "slp/modulation.hpp"
#include "support.hpp"

using namespace slp;
using namespace slp::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Scratch directory removed when the test ends.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("slpsim-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return path / name;
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kSmall =
    "antennas = 3\n"
    "users = 2\n"
    "modulation_order = 4\n"
    "zeta_db = 0, 6\n"
    "phi = pi/5, pi/8\n"
    "methods = cipm, cipmr, zf, genie, multicast\n"
    "trials = 6\n"
    "symbols_per_channel = 20\n"
    "seed = 7\n";

std::string complex_text(std::complex<double> z) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parses keys, comments and lists") {
    const auto c = parse_config(
        "# scenario\n"
        "antennas = 4   # trailing comment\n"
        "users=3\n"
        "zeta_db = 1, 2.5 ,-3\n"
        "phi = pi/5, 3pi/16, 0.1\n"
        "methods = cipmr, zf\n"
        "seed = 18446744073709551615\n"
        "channel_variance = 2\n"
        "output_path = out/run.csv\n");
    CHECK(c.scenario.channel.antennas == 4);
    CHECK(c.scenario.channel.users == 3);
    CHECK(c.scenario.channel.variance == 2.0);
    CHECK(c.scenario.zeta_db == std::vector<double>{1.0, 2.5, -3.0});
    REQUIRE(c.scenario.phi.size() == 3);
    CHECK(c.scenario.phi[0] == kPi / 5);
    CHECK(c.scenario.phi[1] == doctest::Approx(3 * kPi / 16));
    CHECK(c.scenario.phi[2] == 0.1);
    CHECK(c.scenario.seed == 18446744073709551615ULL);
    CHECK(c.output_path == "out/run.csv");
  }

  TEST_CASE("phi notation") {
    CHECK(parse_phi("pi/5") == kPi / 5);
    CHECK(parse_phi(" pi ") == kPi);
    CHECK(parse_phi("2pi/9") == doctest::Approx(2 * kPi / 9));
    CHECK(parse_phi("2*pi/9") == doctest::Approx(2 * kPi / 9));
    CHECK(parse_phi("0.25") == 0.25);
    CHECK_THROWS_AS(parse_phi("pi/0"), ConfigError);
    CHECK_THROWS_AS(parse_phi("pi*2"), ConfigError);
    CHECK_THROWS_AS(parse_phi("abc"), ConfigError);
  }

  TEST_CASE("round trip is exact") {
    const auto a = parse_config(kSmall + "output_path = x.csv\nmmse_reference_power = 0.3\n");
    const auto b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
    const RunConfig defaults;
    CHECK(parse_config(serialize_config(defaults)) == defaults);
  }

  TEST_CASE("errors name the key") {
    CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n"), "bogus: unknown key", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("methods =\n"), "methods: empty", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("trials = 3\ntrials = 4\n"), "trials: repeated key",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("trials = many\n"), "trials: 'many' is not an integer",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("trials = 0\n"), "trials: must be >= 1", ConfigError);
    CHECK_THROWS_AS(parse_config("noise_variance = nan\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("methods = cipm, magic\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("methods = cipmr\nphi = pi/2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("modulation_order = 6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid_points = 40\n"), ConfigError);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("header is the documented column list") {
    const std::vector<std::string> want{"axis_db",        "method",         "phi",
                                        "mean_power",     "power_ci95",     "ser_user_1",
                                        "ser_user_2",     "rate_eff_user_1", "rate_eff_user_2",
                                        "eta",            "trials_ok",      "trials_skipped"};
    CHECK(csv_header(2) == want);
    CHECK(results_csv({}, 2) ==
          "axis_db,method,phi,mean_power,power_ci95,ser_user_1,ser_user_2,rate_eff_user_1,"
          "rate_eff_user_2,eta,trials_ok,trials_skipped\n");
  }

  TEST_CASE("numbers carry twelve significant digits") {
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(123456789.123456789) == "123456789.123");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
  }

  TEST_CASE("small sweep matches the golden file") {
    TempDir dir;
    const auto cfg = dir.write("small.cfg", kSmall);
    std::ostringstream out, err;
    REQUIRE(cmd_sweep_power(cfg, {}, out, err) == kOk);
    CHECK(out.str() == read_file(fs::path(SLP_TEST_DATA_DIR) / "small_power.csv"));
  }
}

TEST_SUITE("complex parsing") {
  TEST_CASE("accepted forms") {
    using C = std::complex<double>;
    CHECK(parse_complex("1+2i") == C(1, 2));
    CHECK(parse_complex("1-2i") == C(1, -2));
    CHECK(parse_complex(" -0.5 + 0.25i ") == C(-0.5, 0.25));
    CHECK(parse_complex("3") == C(3, 0));
    CHECK(parse_complex("i") == C(0, 1));
    CHECK(parse_complex("-i") == C(0, -1));
    CHECK(parse_complex("2.5j") == C(0, 2.5));
    CHECK(parse_complex("1e-3-4e+2i") == C(1e-3, -4e2));
    CHECK(parse_complex("1e-3i") == C(0, 1e-3));
    const auto v = parse_complex_list("1, i, 2-i");
    REQUIRE(v.size() == 3);
    CHECK(v(2) == C(2, -1));
  }

  TEST_CASE("rejected forms") {
    CHECK_THROWS_AS(parse_complex(""), ConfigError);
    CHECK_THROWS_AS(parse_complex("1+x"), ConfigError);
    CHECK_THROWS_AS(parse_complex("1++2i"), ConfigError);
    CHECK_THROWS_AS(parse_complex("inf"), ConfigError);
  }
}

TEST_SUITE("commands") {
  TEST_CASE("sweep exit codes and atomic output") {
    TempDir dir;
    std::ostringstream out, err;

    const auto good = dir.write("good.cfg", kSmall);
    const auto target = dir.path / "result.csv";
    SweepFlags flags;
    flags.output = target.string();
    CHECK(cmd_sweep_power(good, flags, out, err) == kOk);
    CHECK(fs::exists(target));
    CHECK(out.str().empty());

    const auto empty = dir.write("empty.cfg", "methods =\n");
    const auto missing = dir.path / "never.csv";
    flags.output = missing.string();
    err.str("");
    CHECK(cmd_sweep_power(empty, flags, out, err) == kUsageError);
    CHECK(err.str().find("methods: empty") != std::string::npos);
    CHECK_FALSE(fs::exists(missing));

    CHECK(cmd_sweep_power(dir.path / "absent.cfg", {}, out, err) == kUsageError);
    CHECK(cmd_sweep_ee(good, {}, out, err) == kUsageError);  // no channel_snr_db
    SweepFlags bad_threads;
    bad_threads.threads = -1;
    CHECK(cmd_sweep_power(good, bad_threads, out, err) == kUsageError);
    SweepFlags noise_free;
    noise_free.noise_free = true;
    CHECK(cmd_sweep_power(good, noise_free, out, err) == kUsageError);

    SweepFlags unwritable;
    unwritable.output = (dir.path / "no-such-dir" / "x.csv").string();
    CHECK(cmd_sweep_power(good, unwritable, out, err) == kUsageError);
    CHECK_FALSE(fs::exists(dir.path / "no-such-dir"));
  }

  TEST_CASE("exception classes map to the documented exit codes") {
    CHECK(exit_code_for(ConfigError("x")) == kUsageError);
    CHECK(exit_code_for(std::invalid_argument("x")) == kUsageError);
    CHECK(exit_code_for(std::out_of_range("x")) == kUsageError);
    CHECK(exit_code_for(SolverFailure("x", 1.0)) == kSolverFailure);
    CHECK(exit_code_for(InfeasibleError("x", 1.0)) == kSolverFailure);
    CHECK(exit_code_for(std::runtime_error("x")) == kSolverFailure);
  }

  TEST_CASE("energy sweep: noise-free SER is zero and thread count does not matter") {
    TempDir dir;
    const auto cfg = dir.write("ee.cfg",
                               "zeta_db = 4.7121\n"
                               "channel_snr_db = 0, 10\n"
                               "methods = cipm, cipmr, cizf, mmse, zf\n"
                               "phi = pi/5\n"
                               "trials = 4\n"
                               "symbols_per_channel = 30\n");
    std::ostringstream a, b, c, err;
    SweepFlags one;
    one.threads = 1;
    SweepFlags four;
    four.threads = 4;
    REQUIRE(cmd_sweep_ee(cfg, one, a, err) == kOk);
    REQUIRE(cmd_sweep_ee(cfg, four, b, err) == kOk);
    CHECK(a.str() == b.str());

    SweepFlags quiet;
    quiet.noise_free = true;
    REQUIRE(cmd_sweep_ee(cfg, quiet, c, err) == kOk);
    std::istringstream rows(c.str());
    std::string line;
    std::getline(rows, line);
    int checked = 0;
    while (std::getline(rows, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      REQUIRE(cells.size() == 12);
      CHECK(cells[9] != "nan");
      ++checked;
      // MMSE leaves residual crosstalk, which can flip decisions without noise.
      if (cells[1] == "mmse") continue;
      CHECK(cells[5] == "0");
      CHECK(cells[6] == "0");
    }
    CHECK(checked == 10);
  }

  TEST_CASE("classify verdicts") {
    std::ostringstream out, err;
    ClassifyArgs aligned{"1", "1", 0, 0, 4};
    REQUIRE(cmd_classify(aligned, out, err) == kOk);
    CHECK(out.str().find("verdict: constructive\n") != std::string::npos);

    out.str("");
    ClassifyArgs orthogonal{"1,0", "0,1", 0, 0, 4};
    REQUIRE(cmd_classify(orthogonal, out, err) == kOk);
    CHECK(out.str().find("verdict: neutral (not constructive)") != std::string::npos);

    out.str("");
    ClassifyArgs antipodal{"1", "-1", 0, 0, 4};
    REQUIRE(cmd_classify(antipodal, out, err) == kOk);
    CHECK(out.str().find("verdict: destructive") != std::string::npos);

    CHECK(cmd_classify({"1+q", "1", 0, 0, 4}, out, err) == kUsageError);
    CHECK(cmd_classify({"1,2", "1", 0, 0, 4}, out, err) == kUsageError);
    CHECK(cmd_classify({"1", "1", 4, 0, 4}, out, err) == kUsageError);
    CHECK(cmd_classify({"1", "1", 0, 0, 3}, out, err) == kUsageError);
    CHECK(cmd_classify({"0", "1", 0, 0, 4}, out, err) == kUsageError);
  }

  TEST_CASE("classify agrees with the library on random input") {
    std::mt19937_64 rng(201);
    for (int t = 0; t < 300; ++t) {
      const int order = std::array{2, 4, 8}[static_cast<std::size_t>(t % 3)];
      std::uniform_int_distribution<int> pick(0, order - 1);
      const auto h = slp::testing::random_complex(rng, 1, 3);
      const auto w = slp::testing::random_complex(rng, 3, 1);
      const ClassifyArgs args{complex_text(h(0)) + "," + complex_text(h(1)) + "," + complex_text(h(2)),
                              complex_text(w(0)) + "," + complex_text(w(1)) + "," + complex_text(w(2)),
                              pick(rng), pick(rng), order};
      std::ostringstream out, err;
      REQUIRE(cmd_classify(args, out, err) == kOk);
      const bool expected = modulation::is_constructive(
          modulation::interference_coefficient(h.row(0), w.col(0)),
          modulation::modulate(args.d_j, order), modulation::modulate(args.d_k, order));
      CHECK((out.str().find("verdict: constructive\n") != std::string::npos) == expected);
    }
  }

  TEST_CASE("validate: quick run passes, injected fault fails with a replay file") {
    TempDir dir;
    std::ostringstream out, err;
    ValidateOptions ok;
    ok.instances = 3;
    ok.replay_out = (dir.path / "ok.json").string();
    CHECK(cmd_validate(ok, out, err) == kOk);
    CHECK(out.str().find("ordering: multicast <= cipmr(pi/5) <= cipmr(pi/8) <= cipm <= zf : PASS (3 instances") !=
          std::string::npos);
    CHECK_FALSE(fs::exists(ok.replay_out));

    ValidateOptions faulty = ok;
    faulty.inject_fault = true;
    faulty.replay_out = (dir.path / "fault.json").string();
    out.str("");
    CHECK(cmd_validate(faulty, out, err) == kValidationFailure);
    CHECK(out.str().find(": FAIL (") != std::string::npos);
    REQUIRE(fs::exists(faulty.replay_out));

    ValidateOptions replay;
    replay.replay_in = faulty.replay_out;
    out.str("");
    CHECK(cmd_validate(replay, out, err) == kValidationFailure);
    CHECK(out.str().find("ordering") != std::string::npos);

    ValidateOptions broken;
    broken.replay_in = dir.write("bad.json", "{not json").string();
    CHECK(cmd_validate(broken, out, err) == kUsageError);
    ValidateOptions zero;
    zero.instances = 0;
    CHECK(cmd_validate(zero, out, err) == kUsageError);
  }
}
