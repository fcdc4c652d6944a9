#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fomlab/fomlab.hpp"
#include "oracles.hpp"

using namespace fomlab;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p, std::ios::trunc);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFiConfig = R"(# pointwise information
command = "fi"
method = "quadrature"
model = { family = "gaussian_location", sigma = 1.0 }

[task]
theta = 0.0

[numerics]
quad_tol = 1e-10
)";

}  // namespace

TEST_CASE("config text parses sections, tables, arrays and comments", "[cli]") {
    const ConfigMap map = parse_config_text(R"(
command = "mpe"   # trailing comment
method = "closed_form"
model = { family = "gaussian_location", sigma = 2.5 }
prior = { family = "gaussian", params = [0.0, 1.0] }
[task]
theta0 = 0.0
theta1 = 1.0
[numerics]
seed = 7
curvature_ladder = [0.2, 0.1, 0.05]
)");
    const RunConfig cfg = build_run_config(map);
    CHECK(cfg.command == Command::mpe);
    CHECK(cfg.model->sigma() == 2.5);
    CHECK(cfg.prior->family() == PriorFamily::gaussian);
    CHECK(cfg.theta0 == 0.0);
    CHECK(cfg.theta1 == 1.0);
    CHECK(cfg.numerics.curvature_ladder.size() == 3);
    CHECK(cfg.echo.contains("task.theta0"));
}

TEST_CASE("config validation points at the offending key", "[cli]") {
    auto expect_key = [](const std::string& text, const std::string& key) {
        try {
            build_run_config(parse_config_text(text));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.offending_key == key);
        }
    };
    expect_key("method = \"auto\"\n", "command");
    expect_key("command = \"warp\"\nmethod = \"closed_form\"\n", "command");
    expect_key("command = \"fi\"\nmethod = \"closed_form\"\nmodel = { family = \"cauchy\" }\n",
               "model.family");
    expect_key("command = \"fi\"\nmethod = \"closed_form\"\nbogus = 1\n", "bogus");
    expect_key("command = \"fi\"\nmethod = \"auto\"\n", "numerics.seed");
    expect_key("command = \"fi\"\ncommand = \"fi\"\n", "command");
    expect_key("command = \"fi\"\nmethod = \"closed_form\"\n[numerics]\nquad_tol = -1\n",
               "numerics.quad_tol");
    expect_key(
        "command = \"fi\"\nmethod = \"closed_form\"\nprior = { family = \"gaussian\", params = "
        "[1.0] }\n",
        "prior.params");
}

TEST_CASE("direct run produces the documented report shape", "[cli]") {
    RunConfig cfg = build_run_config(parse_config_text(kFiConfig));
    const RunReport rep = run(cfg);
    CHECK(rep.exit_code == 0);
    CHECK(rep.body["artifact_version"] == kVersion);
    CHECK(rep.body["command"] == "fi");
    CHECK(std::fabs(rep.body["results"]["fisher"]["value"]["value"].get<double>() - 1.0) < 1e-8);
    CHECK(rep.body.contains("wall_time_sec"));

    // report round-trips through its own serialization
    const std::string dumped = rep.body.dump(2);
    CHECK(json::parse(dumped).dump(2) == dumped);
}

TEST_CASE("runs are deterministic apart from wall time", "[cli]") {
    const std::string text = R"(
command = "bfi"
method = "monte_carlo"
model = { family = "gaussian_location", sigma = 1.0 }
prior = { family = "gaussian", params = [0.0, 1.0] }
[task]
form = "posterior_form"
[numerics]
mc_samples = 50000
seed = 31415
)";
    RunConfig cfg = build_run_config(parse_config_text(text));
    json a = run(cfg).body;
    json b = run(cfg).body;
    a.erase("wall_time_sec");
    b.erase("wall_time_sec");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("cli binary: success, config failure, csv output", "[cli]") {
    const fs::path cfg_path = write_temp("fomlab_fi.cfg", kFiConfig);
    const fs::path out_path = fs::temp_directory_path() / "fomlab_fi_report.json";
    std::error_code ec;
    fs::remove(out_path, ec);

    const std::string cmd = std::string(FOMLAB_CLI_PATH) + " --config " + cfg_path.string() +
                            " --output " + out_path.string() + " --quiet";
    REQUIRE(std::system(cmd.c_str()) == 0);
    REQUIRE(fs::exists(out_path));
    const json report = json::parse(slurp(out_path));
    CHECK(std::fabs(report["results"]["fisher"]["value"]["value"].get<double>() - 1.0) < 1e-8);

    // malformed config: exit 2, no output file written
    const fs::path bad = write_temp("fomlab_bad.cfg",
                                    "command = \"fi\"\nmodel = { family = \"nope\" }\n");
    const fs::path bad_out = fs::temp_directory_path() / "fomlab_bad.json";
    fs::remove(bad_out, ec);
    const std::string bad_cmd = std::string(FOMLAB_CLI_PATH) + " --config " + bad.string() +
                                " --output " + bad_out.string() + " --quiet 2>/dev/null";
    const int rc = std::system(bad_cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 2);
    CHECK_FALSE(fs::exists(bad_out));

    // roc as csv
    const fs::path roc_cfg = write_temp("fomlab_roc.cfg", R"(
command = "roc"
method = "closed_form"
model = { family = "gaussian_location", sigma = 1.0 }
[task]
theta0 = 0.0
theta1 = 1.0
[output]
format = "csv"
)");
    const fs::path roc_out = fs::temp_directory_path() / "fomlab_roc.csv";
    const std::string roc_cmd = std::string(FOMLAB_CLI_PATH) + " --config " + roc_cfg.string() +
                                " --output " + roc_out.string() + " --quiet";
    REQUIRE(std::system(roc_cmd.c_str()) == 0);
    const std::string csv = slurp(roc_out);
    CHECK(csv.rfind("fpf,tpf\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("expansion command emits the pinned json schema", "[cli]") {
    const std::string text = R"(
command = "expansions"
method = "quadrature"
model = { family = "gaussian_location", sigma = 1.0 }
[task]
theta = 0.0
claim = "detectability_sq"
)";
    RunConfig cfg = build_run_config(parse_config_text(text));
    const RunReport rep = run(cfg);
    const json& fit = rep.body["results"]["expansion"];
    for (const char* key :
         {"claim_id", "grid", "values", "fitted_curvature", "predicted_curvature", "rel_error",
          "quadratic_coefficient_fitted", "quadratic_coefficient_paper_display"})
        CHECK(fit.contains(key));
    CHECK(fit["claim_id"] == "detectability_sq");
    CHECK(fit["rel_error"].get<double>() <= 1e-9);
}

TEST_CASE("mpe command result matches the library value", "[cli]") {
    const std::string text = R"(
command = "mpe"
method = "closed_form"
model = { family = "gaussian_location", sigma = 1.0 }
prior = { family = "gaussian", params = [0.0, 1.0] }
[task]
theta0 = 0.0
theta1 = 1.0
)";
    RunConfig cfg = build_run_config(parse_config_text(text));
    const RunReport rep = run(cfg);
    CHECK(std::fabs(rep.body["results"]["mpe"]["value"].get<double>() - oracle::kMpePriorOdds) <
          1e-10);
}
