#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qk/cli.hpp"
#include "qk/config.hpp"
#include "qk/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qk;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Fresh output directory routed through QK_OUTPUT_DIR.
fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("qk_test_cli_" + name);
    fs::remove_all(dir);
    setenv("QK_OUTPUT_DIR", dir.c_str(), 1);
    return dir;
}

}  // namespace

TEST_CASE("config parsing")
{
    const auto d = RunConfig::parse("");
    CHECK(d.upoly.H == 2.0);
    CHECK(d.grid.n == 16384);

    const auto c = RunConfig::parse("# desk\nseq.generator=gevrey\nseq.sigma=0.5\nupoly.q = 3\ngrid.tol=1e-8\nseed=7\n");
    CHECK(c.seq.kind == SequenceSpec::Kind::gevrey);
    CHECK(c.seq.sigma == 0.5);
    CHECK(c.upoly.q == 3);
    CHECK(c.grid_tol == 1e-8);
    CHECK(c.seed == 7);
    CHECK(RunConfig::parse(c.to_kv()).to_kv() == c.to_kv());

    CHECK(RunConfig::parse("upoly.H=fit\n").upoly.H == std::nullopt);
    CHECK_THROWS_AS(RunConfig::parse("upoly.bogus=1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("tol.delta=0\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("tol.route=-1e-3\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("grid.n=1000\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("seq.generator=gevrey\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("upoly.q\n"), ConfigError);
}

TEST_CASE("seq check writes a condition record")
{
    const auto dir = scratch("seq");
    const auto r = run({"seq", "check", "--gevrey", "1", "--pmax", "256", "--q", "2"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(slurp(dir / "seq-check.json"));
    CHECK(j["status"] == "ok");
    CHECK(j["config"]["seq.generator"] == "gevrey");
    CHECK(j["config"]["output.dir"] == dir.string());
    CHECK(j["config"].size() == RunConfig::parse("seq.generator=gevrey\nseq.sigma=1\n").entries().size());
    CHECK(j["result"]["m1"] == true);
    CHECK(j["result"]["quasianalytic"]["verdict"] == "quasianalytic");
    CHECK(fs::exists(dir / "seq-check.stamp.json"));
    CHECK(json::parse(slurp(dir / "seq-check.stamp.json")).contains("timestamp"));
}

TEST_CASE("param delta from a config file is reproducible")
{
    const auto dir = scratch("delta");
    const fs::path cfg = fs::temp_directory_path() / "qk_test_cli_run.cfg";
    {
        std::ofstream o(cfg, std::ios::binary);
        o << "grid.tol=1e-10\ntol.delta=1e-6\n";
    }
    const auto a = run({"param", "delta", "--config", cfg.string(), "--phi", "gaussian(0,1)"});
    REQUIRE(a.code == exit_ok);
    const auto first = slurp(dir / "param-delta.json");
    const auto b = run({"param", "delta", "--config", cfg.string(), "--phi", "gaussian(0,1)"});
    REQUIRE(b.code == exit_ok);
    CHECK(slurp(dir / "param-delta.json") == first);
    CHECK(first.find('\r') == std::string::npos);
    const auto j = json::parse(first);
    CHECK(j["result"]["residual"].get<double>() <= 1e-6);
    CHECK(j["result"]["pass"] == true);
    CHECK(j["inputs"]["phi"] == "gaussian(0,1)");
}

TEST_CASE("verdicts are data, not errors")
{
    const auto dir = scratch("conv");
    const auto r = run({"conv", "check", "--f1", "const(1)", "--f2", "const(1)"});
    CHECK(r.code == exit_ok);
    const auto j = json::parse(slurp(dir / "conv-check.json"));
    CHECK(j["result"]["verdict"] == "fails");
    CHECK(j["result"]["probes"].size() == 8);
    CHECK(j["result"]["probes"][0]["tail_csv"].get<std::string>().rfind("abs_x,log_abs_h\n", 0) == 0);
}

TEST_CASE("usage and domain errors")
{
    const auto dir = scratch("errors");
    CHECK(run({}).code == exit_usage_error);
    CHECK(run({"bogus"}).code == exit_usage_error);
    CHECK(run({"seq", "check", "--nope"}).code == exit_usage_error);
    CHECK(run({"param", "delta", "--set", "foo.bar=1"}).code == exit_usage_error);
    CHECK(run({"param", "delta", "--set", "tol.delta=-1"}).code == exit_usage_error);
    CHECK(run({"param", "delta", "--config", "/nonexistent/run.cfg"}).code == exit_usage_error);

    const auto bad_expr = run({"param", "delta", "--phi", "gauss(0,1)"});
    CHECK(bad_expr.code == exit_usage_error);
    CHECK(bad_expr.err.find("unknown-atom") != std::string::npos);
    CHECK(bad_expr.err.find("column 1") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "param-delta.json"));

    const auto domain = run({"gs", "seminorm", "--phi", "delta(0,1)"});
    CHECK(domain.code == exit_domain_error);
    const auto j = json::parse(slurp(dir / "gs-seminorm.json"));
    CHECK(j["status"] == "error");
    CHECK(j["error"]["code"] == "invalid-argument");

    const auto diverge = run({"conv", "value", "--f1", "const(1)", "--f2", "const(1)", "--acknowledge"});
    CHECK(diverge.code == exit_domain_error);
    CHECK(json::parse(slurp(dir / "conv-value.json"))["error"]["code"] == "divergence");

    CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("side files and tags")
{
    const auto dir = scratch("files");
    const auto r = run({"upoly", "strip", "--x-max", "10", "--nx", "201", "--tag", "small"});
    REQUIRE(r.code == exit_ok);
    CHECK(fs::exists(dir / "upoly-strip-small.json"));
    const auto csv = slurp(dir / "upoly-strip-small.csv");
    CHECK(csv.rfind("x,log_abs,log_ratio\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);
    const auto j = json::parse(slurp(dir / "upoly-strip-small.json"));
    CHECK(j["artifacts"][0] == "upoly-strip-small.csv");
    CHECK(j["result"]["min_abs_real"] == 1.0);

    const auto s = run({"seq", "subordinate", "--random", "20", "--set", "seed=11"});
    REQUIRE(s.code == exit_ok);
    const auto first = slurp(dir / "seq-subordinate.json");
    REQUIRE(run({"seq", "subordinate", "--random", "20", "--set", "seed=11"}).code == exit_ok);
    CHECK(slurp(dir / "seq-subordinate.json") == first);
    CHECK(json::parse(first)["result"]["all_hold"] == true);
}
