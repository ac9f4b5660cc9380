#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/oracles.hpp"
#include "bcpp/cli.hpp"
#include "bcpp/config.hpp"
#include "bcpp/csv.hpp"
#include "bcpp/errors.hpp"
#include "bcpp/manifest.hpp"
#include "bcpp/stats.hpp"

using namespace bcpp;
namespace fs = std::filesystem;

TEST_SUITE("config") {
  TEST_CASE("minimal config takes the documented defaults") {
    const ExperimentConfig cfg = parse_config("d = 3\nlambda = 0.6\nN_list = [4, 8]\n");
    CHECK(cfg.d == 3);
    CHECK(cfg.lambda == 0.6);
    CHECK(cfg.N_list == std::vector<int>{4, 8});
    CHECK(cfg.t_list == std::vector<double>{0.05});
    CHECK(cfg.replicas == 200);
    CHECK(cfg.c_L == 8);
    CHECK(cfg.master_seed == 1);
    CHECK(cfg.workers == 1);
    CHECK(cfg.profile.kind == ProfileKind::gaussian_bump);
    CHECK(cfg.profile.center == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(cfg.test_fn.kind == TestFunctionKind::cosine_bump);
  }

  TEST_CASE("sections, comments and lists") {
    const ExperimentConfig cfg = parse_config(
        "# experiment\n"
        "d = 2\n"
        "lambda = 0.5   # rate\n"
        "N_list = [4]\n"
        "t_list = [0.01, 0.02]\n"
        "[profile]\n"
        "kind = smooth_box\n"
        "radius = 0.3\n"
        "[test_fn]\n"
        "center = [0.1, 0]\n");
    CHECK(cfg.profile.kind == ProfileKind::smooth_box);
    CHECK(cfg.profile.radius == 0.3);
    CHECK(cfg.test_fn.center == std::vector<double>{0.1, 0.0});
    CHECK(cfg.t_list.size() == 2);
  }

  TEST_CASE("negative lambda names the key") {
    CHECK_THROWS_WITH_AS(parse_config("d = 3\nlambda = -1\n"), doctest::Contains("lambda"), ConfigError);
  }

  TEST_CASE("L below 3 cites the rule") {
    CHECK_THROWS_WITH_AS(parse_config("d = 1\nN_list = [1]\nc_L = 2\n[profile]\nwidth = 0.01\n[test_fn]\nradius = 0.1\n"),
                         doctest::Contains("L >= 3"), ConfigError);
  }

  TEST_CASE("errors carry line numbers") {
    try {
      parse_config("d = 3\nlambda = 0.6\nreplicas = many\n");
      FAIL("expected a type mismatch");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 3);
      CHECK(e.key() == "replicas");
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
      parse_config("d = 3\n\nbogus = 1\n");
      FAIL("expected an unknown key");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 3);
    }
    try {
      parse_config("d = 3\nd = 4\n");
      FAIL("expected a duplicate");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_config("d 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N_list = [4, 8\n"), ConfigError);
  }

  TEST_CASE("scalar parsing") {
    CHECK(parse_integer("42") == 42);
    CHECK_FALSE(parse_integer("4.2"));
    CHECK(parse_real("1e-3") == 1e-3);
    CHECK_FALSE(parse_real("nan"));
    CHECK_FALSE(parse_real("x"));
    const auto list = split_list("[1, 2 ,3]");
    REQUIRE(list);
    CHECK(list->size() == 3);
    CHECK(split_list("[]")->empty());
  }
}

TEST_SUITE("csv") {
  const CsvSchema schema = {{"n", ColumnType::integer}, {"x", ColumnType::real}, {"name", ColumnType::text}};

  TEST_CASE("empty rows give a header-only file") { CHECK(render_csv({}, schema) == "n,x,name\n"); }

  TEST_CASE("reals round trip exactly") {
    const double third = 1.0 / 3.0;
    const std::string text = render_csv({{std::int64_t{1}, third, std::string("a")}}, schema);
    const CsvTable t = parse_csv(text);
    CHECK(std::stod(t.rows[0][t.column("x")]) == third);
    for (double v : {0.1, 1e-300, 6.02214076e23, -2.5, 0.0}) CHECK(std::stod(format_real(v)) == v);
  }

  TEST_CASE("schema mismatch is an internal error") {
    CHECK_THROWS_AS(render_csv({{1.0, 2.0, std::string("a")}}, schema), InternalError);
    CHECK_THROWS_AS(render_csv({{std::int64_t{1}}}, schema), InternalError);
  }

  TEST_CASE("file round trip") {
    const fs::path dir = testing::scratch_dir("csv");
    write_csv({{std::int64_t{3}, 0.25, std::string("b")}}, schema, dir / "sub" / "t.csv");
    const CsvTable t = read_csv(dir / "sub" / "t.csv");
    CHECK(t.header == std::vector<std::string>{"n", "x", "name"});
    CHECK(t.rows[0][0] == "3");
  }
}

TEST_SUITE("manifest") {
  TEST_CASE("sha256 of a known string") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("json round trip") {
    RunManifest m;
    m.config_hash = "00ff";
    m.subcommand = "kernel";
    m.started = utc_timestamp();
    m.finished = m.started;
    m.version = code_version();
    m.outputs = {"kernel.csv"};
    m.checks = {{"a", true, 0.5, 1.0, ""}, {"b", false, 1.0 / 3.0, 0.25, "detail"}};
    m.canonical_config = "d = 2\n";
    const RunManifest back = parse_manifest(manifest_json(m));
    CHECK(back.subcommand == "kernel");
    CHECK(back.checks.size() == 2);
    CHECK(back.checks[1].value == 1.0 / 3.0);
    CHECK_FALSE(back.all_passed());
    CHECK(back.canonical_config == m.canonical_config);
  }
}

TEST_SUITE("stats") {
  TEST_CASE("welford matches two-pass") {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(1e8 + std::sin(i * 0.37));
    RunningStats s;
    for (double x : v) s.add(x);
    const TwoPass tp = two_pass(v);
    CHECK(s.mean() == doctest::Approx(tp.mean).epsilon(1e-15));
    CHECK(s.variance() == doctest::Approx(tp.variance).epsilon(1e-9));
  }

  TEST_CASE("variance interval brackets the estimate") {
    const Interval ci = variance_interval(2.0, 200);
    CHECK(ci.lower < 2.0);
    CHECK(ci.upper > 2.0);
  }

  TEST_CASE("line fits") {
    const double x[] = {1.0, 2.0, 4.0};
    const double y[] = {3.0, 5.0, 9.0};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    const double n[] = {4.0, 8.0, 16.0};
    const double p[] = {1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0};
    CHECK(loglog_slope(n, p) == doctest::Approx(-1.0));
  }
}

TEST_SUITE("cli") {
  int run(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
  }

  TEST_CASE("gamma writes k_e1 and gamma") {
    const fs::path dir = testing::scratch_dir("cli-gamma");
    CHECK(run({"gamma", "--d", "3", "--R", "30", "--output", dir.string()}) == kExitOk);
    const CsvTable t = read_csv(dir / "gamma.csv");
    const double k = std::stod(t.rows[0][t.column("k_e1")]);
    CHECK(k > 0.32);
    CHECK(std::stod(t.rows[0][t.column("gamma")]) == doctest::Approx(1.0 - k));
    CHECK(find_manifests(dir).size() == 1);
  }

  TEST_CASE("positivity exits 0") {
    const fs::path dir = testing::scratch_dir("cli-pos");
    CHECK(run({"positivity", "--d", "1", "--L", "4", "--t_list", "[1]", "--output", dir.string()}) == kExitOk);
    const CsvTable t = read_csv(dir / "positivity.csv");
    CHECK(std::stod(t.rows[0][t.column("min_entry")]) >= -1e-9);
  }

  TEST_CASE("unknown subcommand and bad options exit 1 with usage") {
    std::string err;
    CHECK(run({"frobnicate"}, nullptr, &err) == kExitConfig);
    CHECK(err.find("Usage") != std::string::npos);
    CHECK(run({}, nullptr, &err) == kExitConfig);
    CHECK(run({"kernel", "--no-such-flag", "1"}, nullptr, &err) == kExitConfig);
  }

  TEST_CASE("config errors exit 1 and report the line") {
    const fs::path dir = testing::scratch_dir("cli-cfg");
    {
      std::ofstream f(dir / "bad.conf");
      f << "d = 2\nL = five\n";
    }
    std::string err;
    CHECK(run({"kernel", "--config", (dir / "bad.conf").string(), "--output", dir.string()}, nullptr, &err) == kExitConfig);
    CHECK(err.find("\"line\":2") != std::string::npos);
    CHECK(run({"kernel", "--L", "2", "--output", dir.string()}) == kExitConfig);
  }

  TEST_CASE("flags override the file and BCPP_SEED overrides the seed") {
    const fs::path dir = testing::scratch_dir("cli-over");
    {
      std::ofstream f(dir / "k.conf");
      f << "d = 1\nL = 5\nt = 0.5\n";
    }
    CHECK(run({"kernel", "--config", (dir / "k.conf").string(), "--L", "7", "--output", dir.string()}) == kExitOk);
    CHECK(read_csv(dir / "kernel.csv").rows.size() == 7);
    const fs::path a = dir / "a";
    const fs::path b = dir / "b";
    ::setenv("BCPP_SEED", "99", 1);
    CHECK(run({"simulate", "--d", "1", "--L", "20", "--N", "2", "--master_seed", "5", "--output", a.string()}) == kExitOk);
    ::unsetenv("BCPP_SEED");
    CHECK(run({"simulate", "--d", "1", "--L", "20", "--N", "2", "--master_seed", "99", "--output", b.string()}) == kExitOk);
    CHECK(testing::read_file(a / "simulate_field.csv") == testing::read_file(b / "simulate_field.csv"));
  }

  TEST_CASE("failed checks exit 2 and report aggregates manifests") {
    const fs::path dir = testing::scratch_dir("cli-report");
    CHECK(run({"positivity", "--output", dir.string()}) == kExitOk);
    CHECK(run({"positivity", "--tolerance", "-1", "--output", dir.string()}) == kExitCheckFailed);
    std::string out;
    CHECK(run({"report", "--runs", dir.string(), "--output", (dir / "rep").string()}, &out) == kExitCheckFailed);
    CHECK(out.find("[FAIL] positivity min_entry") != std::string::npos);
    const CsvTable t = read_csv(dir / "rep" / "report.csv");
    CHECK(t.rows.size() == 2);
  }

  TEST_CASE("same config gives identical bytes") {
    const fs::path a = testing::scratch_dir("cli-rep-a");
    const fs::path b = testing::scratch_dir("cli-rep-b");
    CHECK(run({"moments", "--replicas", "200", "--output", a.string()}) == kExitOk);
    CHECK(run({"moments", "--replicas", "200", "--workers", "3", "--output", b.string()}) == kExitOk);
    CHECK(testing::read_file(a / "moments.csv") == testing::read_file(b / "moments.csv"));
  }
}
