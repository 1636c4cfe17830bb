// limitcycle: command-line front end.
//
//   limitcycle <task> --config FILE [--set key=value]... [--out DIR] [--seed N] [--jobs K]
//   limitcycle run --preset NAME [...]

#include "limitcycle/cli/config.hpp"
#include "limitcycle/cli/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace limitcycle;
using namespace limitcycle::cli;

namespace {

fs::path preset_dir() {
    if (const char* env = std::getenv("LIMITCYCLE_PRESET_DIR")) return env;
#ifdef LIMITCYCLE_PRESET_DIR
    return LIMITCYCLE_PRESET_DIR;
#else
    return "presets";
#endif
}

void report(const Error& e) {
    json j{{"error", json{{"code", std::string(to_string(e.code()))},
                          {"category", std::string(to_string(e.category()))},
                          {"message", e.what()}}}};
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum and classical limit-cycle oscillators"};
    std::string task, config_file, preset, out_dir = "out";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
    bool list = false;

    app.add_option("task", task,
                   "steady | evolve | wigner | analytic | classical-ensemble | correlate | sweep | run");
    app.add_option("--config,-c", config_file, "JSON configuration file");
    app.add_option("--preset,-p", preset, "named configuration from the preset directory");
    app.add_option("--set,-s", sets, "override a config value, key=value with dotted keys")->take_all();
    app.add_option("--out,-o", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--jobs,-j", jobs, "worker threads (default LIMITCYCLE_JOBS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--list-presets", list, "print available presets and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (list) {
        std::vector<std::string> names;
        if (fs::is_directory(preset_dir()))
            for (const auto& f : fs::directory_iterator(preset_dir()))
                if (f.path().extension() == ".json") names.push_back(f.path().stem().string());
        std::sort(names.begin(), names.end());
        for (const auto& n : names) std::cout << n << '\n';
        return 0;
    }

    Provenance prov;
    prov.started = utc_now();
    prov.jobs = jobs;
    json doc = json::object();
    try {
        limitcycle::detail::require(!task.empty(), ErrorCode::validation, "missing task");
        limitcycle::detail::require(config_file.empty() != preset.empty(), ErrorCode::validation,
                        "give exactly one of --config or --preset");
        doc = load_json_file(preset.empty() ? config_file : (preset_dir() / (preset + ".json")).string());
        limitcycle::detail::require(doc.is_object(), ErrorCode::validation, "config must be a JSON object");
        for (const auto& s : sets) apply_override(doc, s);
        if (*seed_opt) doc["seed"] = seed;
        if (task != "run") {
            (void)parse_task(task);
            if (doc.contains("task"))
                limitcycle::detail::require(doc["task"] == task, ErrorCode::validation,
                                "task '" + task + "' does not match the config task '" +
                                    doc["task"].dump() + "'");
            else
                doc["task"] = task;
        }
        const auto cfg = parse_config(doc);
        prov.seed = cfg.seed;
        const auto rb = execute(cfg, jobs);
        prov.finished = utc_now();
        write_bundle(rb, prov, out_dir);
        std::cout << rb.summary.dump(2) << '\n';
        return 0;
    } catch (const Error& e) {
        report(e);
        prov.finished = utc_now();
        try {
            write_manifest(manifest_json(doc, prov, nullptr, json::array({json{{"code", std::string(to_string(e.code()))},
                                                                                {"category", std::string(to_string(e.category()))},
                                                                                {"message", e.what()}}})),
                           out_dir);
        } catch (...) {
        }
        return exit_code(e.category());
    } catch (const std::bad_alloc&) {
        report(Error(ErrorCode::resource_limit, "out of memory"));
        return 4;
    } catch (const std::exception& e) {
        report(Error(ErrorCode::integration_failure, e.what()));
        return 3;
    }
}
