#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "smp/config.hpp"
#include "smp/errors.hpp"

using namespace smp;

namespace {

const char* kMinimal = R"(# smallest viable run description
[domain]
kind = "interval"
n = 11

[time]
horizon = 1.0
steps = 10

[coefficients]
family = "lq-dbc"
)";

std::string message_of(const std::string& text) {
  try {
    config_from_doc(parse_toml(text), "test");
    return "";
  } catch (const Error& e) {
    return e.what();
  }
}

std::string parse_message(const std::string& text) {
  try {
    parse_toml(text);
    return "";
  } catch (const Error& e) {
    return e.what();
  }
}

}  // namespace

TEST_CASE("parser handles scalars, arrays, comments and whitespace") {
  TomlDoc doc = parse_toml(R"(
# leading comment
[alpha]
name = "run-1"   # trailing comment
flag = true
count = 42
ratio = -2.5e-1
grid = [1.0, 2, 3.5]

[beta]
empty_ok = 0
)");
  REQUIRE(doc.count("alpha") == 1);
  const TomlTable& a = doc.at("alpha");
  CHECK(std::get<std::string>(a.at("name").v) == "run-1");
  CHECK(std::get<bool>(a.at("flag").v) == true);
  CHECK(std::get<std::int64_t>(a.at("count").v) == 42);
  CHECK(std::get<double>(a.at("ratio").v) == doctest::Approx(-0.25));
  const auto& grid = std::get<std::vector<double>>(a.at("grid").v);
  REQUIRE(grid.size() == 3);
  CHECK(grid[1] == doctest::Approx(2.0));
}

TEST_CASE("parser rejects malformed documents with line numbers") {
  CHECK(parse_message("[a]\nx = 1\nx = 2\n").find("duplicate key 'x'") != std::string::npos);
  CHECK(parse_message("[a]\n[a]\n").find("duplicate section") != std::string::npos);
  CHECK(parse_message("x = 1\n").find("outside any [section]") != std::string::npos);
  CHECK(parse_message("[a]\ns = \"oops\n").find("unterminated string") != std::string::npos);
  CHECK(parse_message("[a]\nv = [1, 2\n").find("unterminated array") != std::string::npos);
  CHECK(parse_message("[a]\nv = nan\n").find("non-finite") != std::string::npos);
  CHECK(parse_message("[a]\nv = 12abc\n").find("is not a number") != std::string::npos);
  CHECK(parse_message("[a\nx = 1\n").find("unterminated section header") != std::string::npos);
  CHECK(parse_message("[a]\njust-words\n").find("expected 'key = value'") != std::string::npos);
  // the failing line is part of the message
  CHECK(parse_message("[a]\nx = 1\nx = 2\n").find("line 3") != std::string::npos);
}

TEST_CASE("minimal document loads with defaults filled in") {
  ProblemConfig cfg = config_from_doc(parse_toml(kMinimal), "test");
  CHECK(cfg.domain_kind == "interval");
  CHECK(cfg.interval.n == 11);
  CHECK(cfg.steps == 10);
  CHECK(cfg.family == "lq-dbc");
  CHECK(cfg.params.m == 1);
  CHECK(cfg.params.lo[0] == doctest::Approx(-1.0));
  CHECK(cfg.params.hi[0] == doctest::Approx(1.0));
  CHECK_FALSE(cfg.noise_enabled);
  CHECK(cfg.optimizer.n_paths == 100);

  Problem prob = build_problem(cfg);
  CHECK(prob.mesh.n_nodes() == 11);
  CHECK(prob.steps == 10);
  CHECK_FALSE(prob.noise_on);
}

TEST_CASE("unknown sections and keys are rejected by name and line") {
  std::string bad_section = std::string(kMinimal) + "\n[physics]\ngravity = 9.8\n";
  CHECK(message_of(bad_section).find("unknown section [physics]") != std::string::npos);

  std::string bad_key = std::string(kMinimal) + "\n[noise]\nbad_key = 1\n";
  const std::string msg = message_of(bad_key);
  CHECK(msg.find("unknown key 'bad_key'") != std::string::npos);
  CHECK(msg.find("line") != std::string::npos);
}

TEST_CASE("required sections are named when missing") {
  const char* no_time = R"(
[domain]
kind = "interval"
n = 5

[coefficients]
family = "lq-dbc"
)";
  CHECK(message_of(no_time).find("missing [time] section") != std::string::npos);
}

TEST_CASE("type and range violations carry their location") {
  std::string bad = std::string(kMinimal) + "\n[rng]\nmaster_seed = -4\n";
  CHECK(message_of(bad).find("master_seed must be nonnegative") != std::string::npos);

  const char* bad_steps = R"(
[domain]
kind = "interval"
n = 5

[time]
horizon = 1.0
steps = 0

[coefficients]
family = "lq-dbc"
)";
  CHECK(message_of(bad_steps).find("steps must be at least 1") != std::string::npos);

  const char* bad_horizon = R"(
[domain]
kind = "interval"
n = 5

[time]
horizon = -1.0
steps = 5

[coefficients]
family = "lq-dbc"
)";
  CHECK(message_of(bad_horizon).find("horizon must be positive") != std::string::npos);
}

TEST_CASE("control box arrays broadcast or must match the dimension") {
  std::string two = std::string(kMinimal) + R"(
[control]
m = 2
lo = [-1.0, -0.5]
hi = [1.0, 0.5]
)";
  ProblemConfig cfg = config_from_doc(parse_toml(two), "test");
  CHECK(cfg.params.lo[1] == doctest::Approx(-0.5));
  CHECK(cfg.params.hi[1] == doctest::Approx(0.5));

  std::string wrong = std::string(kMinimal) + R"(
[control]
m = 2
lo = [-1.0, -0.5, 0.0]
)";
  CHECK_THROWS_AS(config_from_doc(parse_toml(wrong), "test"), Error);
}

TEST_CASE("enabled noise requires at least one mode") {
  std::string silent = std::string(kMinimal) + R"(
[noise]
enabled = true
k_interior = 0
k_boundary = 0
)";
  CHECK(message_of(silent).find("k_interior + k_boundary is zero") != std::string::npos);
}

TEST_CASE("load_config runs the hypothesis validator on the assembled family") {
  // kappa < -1 makes d gamma / d ybar negative near zero
  const char* doc = R"(
[domain]
kind = "interval"
n = 11

[time]
horizon = 1.0
steps = 10

[coefficients]
family = "semilinear-dbc"
kappa = -2.0
)";
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "smp_bad_kappa.toml";
  {
    std::ofstream out(path);
    out << doc;
  }
  std::string msg;
  try {
    load_config(path.string());
  } catch (const Error& e) {
    msg = e.what();
  }
  fs::remove(path);
  CHECK(msg.find("hypotheses rejected") != std::string::npos);
  CHECK(msg.find("reaction_monotonicity") != std::string::npos);
}

TEST_CASE("initial profiles resolve by name") {
  for (const char* kind : {"constant", "bump", "linear"}) {
    std::string doc = std::string(kMinimal);
    doc.replace(doc.find("n = 11"), 6, std::string("n = 11\ninitial = \"") + kind +
                                           "\"\ninitial_value = 2.0");
    Problem prob = build_problem(config_from_doc(parse_toml(doc), "test"));
    CHECK(prob.y0.allFinite());
    CHECK(prob.y0.cwiseAbs().maxCoeff() > 0.0);
  }
  std::string bad = std::string(kMinimal);
  bad.replace(bad.find("n = 11"), 6, "n = 11\ninitial = \"vortex\"");
  CHECK_THROWS_AS(build_problem(config_from_doc(parse_toml(bad), "test")), Error);
}

TEST_CASE("optimizer knobs flow through the document") {
  std::string doc = std::string(kMinimal) + R"(
[optimizer]
paths = 7
max_iters = 3
tol = 0.25
crn = false
sufficiency = false
sufficiency_tol = 0.5

[rng]
master_seed = 99
)";
  ProblemConfig cfg = config_from_doc(parse_toml(doc), "test");
  CHECK(cfg.optimizer.n_paths == 7);
  CHECK(cfg.optimizer.max_iters == 3);
  CHECK(cfg.optimizer.tol == doctest::Approx(0.25));
  CHECK_FALSE(cfg.optimizer.crn);
  CHECK_FALSE(cfg.optimizer.with_sufficiency);
  CHECK(cfg.optimizer.sufficiency_tol == doctest::Approx(0.5));
  CHECK(cfg.master_seed == 99);
}

TEST_CASE("missing files and shipped configs behave as expected") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), Error);
  const char* configs = std::getenv("SMP_CONFIGS");
  const std::string root = configs ? configs : "configs";
  ProblemConfig cfg = load_config(root + "/lq1d.toml");
  CHECK(cfg.family == "lq-dbc");
  CHECK(cfg.noise_enabled);
  Problem prob = build_problem(cfg);
  CHECK(prob.mesh.n_nodes() == 21);
  CHECK(prob.steps == 50);
}
