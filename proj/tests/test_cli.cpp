#include <catch_amalgamated.hpp>

#include "limitcycle/cli/config.hpp"
#include "limitcycle/cli/run.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace limitcycle;
using namespace limitcycle::cli;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

json base_steady() {
    return json::parse(R"({
        "task": "steady", "model": "rvdp", "cutoff": 24,
        "rates": {"kappa1": 1.0, "gamma1": 0.2, "gamma2": 0.1},
        "steady": {"amplitude": false}
    })");
}

ErrorCode code_of(const json& doc) {
    try {
        (void)parse_config(doc);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a validation error");
    return ErrorCode::validation;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("limitcycle_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const char* exe = std::getenv("LIMITCYCLE_CLI");
    if (!exe) return -1;
    const int rc = std::system((std::string(exe) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing", "[cli]") {
    const auto c = parse_config(base_steady());
    CHECK(c.task == Task::steady);
    CHECK(c.cutoff == 24);
    CHECK(c.rates.kappa1 == 1.0);

    auto doc = base_steady();
    doc.erase("rates");
    doc["rates"] = json{{"epsilon", 0.1}, {"r", 0.5}, {"amplitude", 2.0}};
    doc["model"] = "vdp";
    const auto v = parse_config(doc);
    CHECK(v.rates.kappa1 == Approx(0.2));
    CHECK(v.rates.gamma1 == Approx(0.1));
    // vdP: A = 2 A_c, so A_c = 1 and gamma2 = epsilon
    CHECK(v.rates.gamma2 == Approx(0.1));

    doc["cutoff"] = "auto";
    CHECK_FALSE(parse_config(doc).cutoff.has_value());
}

TEST_CASE("config validation", "[cli]") {
    auto doc = base_steady();
    doc["bogus"] = 1;
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["rates"]["kapa1"] = 1.0;
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["model"] = "duffing";
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["cutoff"] = 1;
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["rates"]["kappa1"] = "fast";
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["task"] = "classical-ensemble";
    CHECK(code_of(doc) == ErrorCode::validation);

    doc = base_steady();
    doc["model"] = "vdp";
    doc["rates"]["temperature"] = 0.5;
    CHECK_THROWS_AS(execute(parse_config(doc), 1), Error);

    doc = base_steady();
    doc["task"] = "evolve";
    doc["evolve"] = json{{"t_end", -1.0}};
    CHECK(code_of(doc) == ErrorCode::validation);
}

TEST_CASE("overrides", "[cli]") {
    auto doc = base_steady();
    apply_override(doc, "rates.temperature=0.5");
    apply_override(doc, "description=hello world");
    apply_override(doc, "steady.grid.points=101");
    CHECK(doc["rates"]["temperature"] == 0.5);
    CHECK(doc["description"] == "hello world");
    CHECK(doc["steady"]["grid"]["points"] == 101);
    CHECK(doc["steady"]["amplitude"] == false);
    set_path(doc, "rates", json{{"kappa1", 3.0}});
    CHECK(doc["rates"]["gamma1"] == 0.2);
    CHECK(doc["rates"]["kappa1"] == 3.0);
    CHECK_THROWS_AS(apply_override(doc, "noequals"), Error);
    CHECK_THROWS_AS(apply_override(doc, "rates.kappa1.x=1"), Error);
}

TEST_CASE("steady task tables", "[cli]") {
    const auto rb = execute(parse_config(base_steady()), 1);
    REQUIRE(!rb.tables.empty());
    const auto& probs = rb.tables.front();
    CHECK(probs.name == "probs");
    CHECK(probs.rows.size() == 24);
    double s = 0.0;
    for (const auto& r : probs.rows) s += r[1];
    CHECK(s == Approx(1.0));
    CHECK(rb.summary["cutoff"] == 24);
}

TEST_CASE("sweep covers the product grid", "[cli]") {
    auto doc = base_steady();
    doc["task"] = "sweep";
    doc["sweep"] = json::parse(R"({"task": "steady",
        "grid": {"rates.kappa1": [0.5, 1.0, 2.0], "rates.temperature": [0.0, 0.1, 0.2]}})");
    const auto rb = execute(parse_config(doc), 2);
    REQUIRE(rb.tables.size() == 1);
    const auto& t = rb.tables.front();
    CHECK(t.rows.size() == 9);
    CHECK(t.columns[1] == "rates.kappa1");
    CHECK(t.rows[4][1] == 1.0);
    CHECK(t.rows[4][2] == 0.1);
    CHECK(rb.summary["failed"] == 0);

    doc["sweep"]["grid"]["rates.kappa1"] = json::array({1.0, -1.0});
    const auto bad = execute(parse_config(doc), 1);
    CHECK(bad.summary["failed"] == 3);
    CHECK(bad.errors.size() == 3);
}

TEST_CASE("seeded ensembles reproduce", "[cli]") {
    const auto doc = json::parse(R"({
        "task": "classical-ensemble", "model": "classical", "seed": 5,
        "classical": {"variant": "vdp", "epsilon": 0.1, "amplitude_scale": 1, "noise_temp": 0.01, "noise_coupling": 1},
        "ensemble": {"count": 50, "t_end": 5, "sample_step": 1, "dt": 0.05}
    })");
    const auto a = execute(parse_config(doc), 1);
    const auto b = execute(parse_config(doc), 3);
    REQUIRE(a.tables.front().rows.size() == b.tables.front().rows.size());
    CHECK(a.tables.front().rows.back() == b.tables.front().rows.back());
    auto other = doc;
    other["seed"] = 6;
    CHECK(execute(parse_config(other), 1).tables.front().rows.back() != a.tables.front().rows.back());
}

TEST_CASE("bundle round trip", "[cli]") {
    const auto dir = scratch("bundle");
    const auto rb = execute(parse_config(base_steady()), 1);
    Provenance prov{utc_now(), utc_now(), 0, 1};
    write_bundle(rb, prov, dir);
    const auto m = json::parse(read_file(dir / "manifest.json"));
    CHECK(m["config"] == base_steady());
    CHECK(m["files"][0] == "probs.csv");
    CHECK(m["errors"].empty());
    CHECK(m["summary"]["cutoff"] == 24);
    const auto csv = read_file(dir / "probs.csv");
    CHECK(csv.rfind("n,p_full", 0) == 0);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(nan_v) == "nan");
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes", "[cli]") {
    if (!std::getenv("LIMITCYCLE_CLI")) SKIP("LIMITCYCLE_CLI not set");
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    auto doc = base_steady();
    {
        std::ofstream(dir / "ok.json") << doc.dump();
        doc["model"] = "duffing";
        std::ofstream(dir / "bad.json") << doc.dump();
    }
    const auto p = dir.string();
    CHECK(run_cli("steady --config " + p + "/ok.json --out " + p + "/ok") == 0);
    CHECK(fs::exists(dir / "ok" / "probs.csv"));
    CHECK(run_cli("run --config " + p + "/ok.json --set rates.gamma2=0.2 --out " + p + "/ok2") == 0);
    CHECK(json::parse(read_file(dir / "ok2" / "manifest.json"))["config"]["rates"]["gamma2"] == 0.2);
    CHECK(run_cli("steady --config " + p + "/bad.json --out " + p + "/bad") == 2);
    CHECK(!json::parse(read_file(dir / "bad" / "manifest.json"))["errors"].empty());
    CHECK(run_cli("evolve --config " + p + "/ok.json --out " + p + "/x") == 2);
    CHECK(run_cli("steady --config " + p + "/missing.json --out " + p + "/x") == 2);
    CHECK(run_cli("steady --config " + p + "/ok.json --set cutoff=400 --out " + p + "/x") == 2);
    CHECK(run_cli("--list-presets") == 0);
    fs::remove_all(dir);
}
