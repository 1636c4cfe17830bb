// cli/config.hpp: experiment configuration: JSON parsing, schema checks and
// dotted-path overrides.

#pragma once

#include "limitcycle/classical.hpp"
#include "limitcycle/correlations.hpp"
#include "limitcycle/error.hpp"
#include "limitcycle/liouville.hpp"
#include "limitcycle/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace limitcycle::cli {

using json = nlohmann::ordered_json;

enum class Task { steady, evolve, wigner, analytic, classical_ensemble, correlate, sweep };
enum class ModelChoice { rvdp, vdp, rayleigh, classical };

inline constexpr std::string_view to_string(Task t) noexcept {
    switch (t) {
        case Task::steady: return "steady";
        case Task::evolve: return "evolve";
        case Task::wigner: return "wigner";
        case Task::analytic: return "analytic";
        case Task::classical_ensemble: return "classical-ensemble";
        case Task::correlate: return "correlate";
        case Task::sweep: return "sweep";
    }
    return "unknown";
}

inline constexpr std::string_view to_string(ModelChoice m) noexcept {
    switch (m) {
        case ModelChoice::rvdp: return "rvdp";
        case ModelChoice::vdp: return "vdp";
        case ModelChoice::rayleigh: return "rayleigh";
        case ModelChoice::classical: return "classical";
    }
    return "unknown";
}

inline Task parse_task(const std::string& s) {
    for (auto t : {Task::steady, Task::evolve, Task::wigner, Task::analytic, Task::classical_ensemble,
                   Task::correlate, Task::sweep})
        if (s == to_string(t)) return t;
    throw Error(ErrorCode::validation, "unknown task '" + s + "'");
}

inline ModelChoice parse_model(const std::string& s) {
    for (auto m : {ModelChoice::rvdp, ModelChoice::vdp, ModelChoice::rayleigh, ModelChoice::classical})
        if (s == to_string(m)) return m;
    throw Error(ErrorCode::validation,
                "model: unknown value '" + s + "' (expected rvdp, vdp, rayleigh or classical)");
}

inline ModelKind quantum_kind(ModelChoice m) {
    switch (m) {
        case ModelChoice::rvdp: return ModelKind::rvdp;
        case ModelChoice::vdp: return ModelKind::vdp;
        case ModelChoice::rayleigh: return ModelKind::rayleigh;
        case ModelChoice::classical: break;
    }
    throw Error(ErrorCode::validation, "this task needs a quantum model (rvdp, vdp or rayleigh)");
}

// eta + 3 zeta of each variant; the limit-cycle amplitude is 2 A_c / sqrt(eta + 3 zeta).
inline double shape_factor(ModelChoice m) {
    switch (m) {
        case ModelChoice::rvdp: return 4.0;
        case ModelChoice::vdp: return 1.0;
        case ModelChoice::rayleigh: return 3.0;
        case ModelChoice::classical: break;
    }
    return 4.0;
}

// ---- schema reader ----

namespace detail {

using limitcycle::detail::require;

// Reads one JSON object, remembering which keys were used so leftovers can be rejected.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        const json* v = get(key, def.has_value());
        if (!v) return *def;
        if (!v->is_number()) fail_key(key, "expected a number");
        return v->get<double>();
    }

    long long integer(const std::string& key, std::optional<long long> def = std::nullopt) {
        const json* v = get(key, def.has_value());
        if (!v) return *def;
        if (v->is_number_integer() || v->is_number_unsigned()) return v->get<long long>();
        if (v->is_number_float() && v->get<double>() == std::floor(v->get<double>()))
            return static_cast<long long>(v->get<double>());
        fail_key(key, "expected an integer");
        return 0;
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
        const json* v = get(key, def.has_value());
        if (!v) return *def;
        if (!v->is_string()) fail_key(key, "expected a string");
        return v->get<std::string>();
    }

    bool boolean(const std::string& key, std::optional<bool> def = std::nullopt) {
        const json* v = get(key, def.has_value());
        if (!v) return *def;
        if (!v->is_boolean()) fail_key(key, "expected true or false");
        return v->get<bool>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def = {}) {
        const json* v = get(key, true);
        if (!v) return def;
        if (!v->is_array()) fail_key(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) fail_key(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key, std::vector<std::string> def = {}) {
        const json* v = get(key, true);
        if (!v) return def;
        if (!v->is_array()) fail_key(key, "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) fail_key(key, "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    // Sub-object; an absent key reads as an empty object.
    Section child(const std::string& key) {
        const json* v = get(key, true);
        static const json empty = json::object();
        return Section(v ? *v : empty, join(key));
    }

    const json* raw(const std::string& key) { return get(key, true); }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!used_.count(k)) fail("unknown key '" + join(k) + "'");
    }

    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
        throw Error(ErrorCode::validation, join(key) + ": " + msg);
    }

private:
    const json* get(const std::string& key, bool optional) {
        used_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) {
            if (!optional) fail("missing required key '" + join(key) + "'");
            return nullptr;
        }
        return &j_.at(key);
    }
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::validation, (path_.empty() ? std::string("config") : path_) + ": " + msg);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace detail

// ---- typed configuration ----

struct GridSpec {
    double extent = 0.0;  // half-width; 0 picks a grid from the state
    int points = 201;
};

struct InitialState {
    std::string kind = "coherent";  // coherent | fock | thermal
    cplx alpha{0.0, 0.0};
    int n = 0;
    double nbar = 0.0;
};

struct SteadyTask {
    bool amplitude = true;  // Wigner-peak amplitude in the summary
    bool density = false;   // emit rho.csv
    GridSpec grid;
};

struct EvolveTask {
    double t_end = 10.0;
    double step = 0.1;
    Method method = Method::automatic;
    double dt = 0.01;
    InitialState initial;
    std::vector<double> wigner_times;
    GridSpec grid;
    bool classical = false;  // deterministic classical trajectory from the matched point
};

struct WignerTask {
    GridSpec grid;
};

struct EnsembleTask {
    std::size_t count = 1000;
    PhasePoint center{0.5, 0.5};
    double sigma = 0.1;
    double t_end = 10.0;
    double sample_step = 1.0;
    std::vector<double> snapshot_times;
    NoiseScheme scheme = NoiseScheme::heun;
    double dt = 1e-3;
};

struct CorrelateTask {
    double t_end = 100.0;
    double step = 0.1;
    Window window = Window::hann;
    Method method = Method::automatic;
    double dt = 0.01;
    double plateau_time = 1e5;
};

struct SweepAxis {
    std::string path;  // dotted key, e.g. rates.temperature
    std::vector<json> values;
};

struct SweepTask {
    Task task = Task::steady;
    std::vector<SweepAxis> axes;
    bool keep_tables = false;
};

struct ExperimentConfig {
    json source;  // validated input, echoed into every manifest
    Task task = Task::steady;
    ModelChoice model = ModelChoice::rvdp;
    RateSet rates;
    ClassicalParams classical;
    Variant variant = Variant::vdp;
    std::optional<int> cutoff;  // empty means auto
    std::uint64_t seed = 0;
    std::string description;

    SteadyTask steady;
    EvolveTask evolve;
    WignerTask wigner;
    EnsembleTask ensemble;
    CorrelateTask correlate;
    SweepTask sweep;
};

// ---- overrides ----

// Value text is read as JSON when it parses, otherwise as a bare string.
inline json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);
    }
}

inline void set_path(json& root, const std::string& path, json value) {
    detail::require(!path.empty(), ErrorCode::validation, "empty override key");
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        detail::require(!key.empty(), ErrorCode::validation, "malformed override key '" + path + "'");
        if (!node->is_object()) throw Error(ErrorCode::validation, "override '" + path + "' descends into a non-object");
        if (dot == std::string::npos) {
            // objects merge key by key so one sweep entry can move several fields together
            auto& slot = (*node)[key];
            if (slot.is_object() && value.is_object())
                slot.update(value);
            else
                slot = std::move(value);
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    detail::require(eq != std::string::npos && eq > 0, ErrorCode::validation,
                    "--set expects key=value, got '" + assignment + "'");
    set_path(root, assignment.substr(0, eq), parse_value(assignment.substr(eq + 1)));
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::validation, "cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::validation, "config file '" + path + "': " + e.what());
    }
}

// ---- parsing ----

namespace detail {

inline Method parse_method(const std::string& s, const std::string& where) {
    if (s == "rk4") return Method::rk4;
    if (s == "exponential") return Method::exponential;
    if (s == "auto") return Method::automatic;
    throw Error(ErrorCode::validation, where + ": expected rk4, exponential or auto");
}

inline GridSpec parse_grid(Section s) {
    GridSpec g;
    g.extent = s.number("extent", 0.0);
    g.points = static_cast<int>(s.integer("points", 201));
    require(g.extent >= 0.0, ErrorCode::validation, "grid.extent must be >= 0");
    require(g.points >= 16 && g.points <= 2001, ErrorCode::validation, "grid.points must lie in [16, 2001]");
    s.finish();
    return g;
}

// Either raw rates, or (epsilon, r) with amplitude_scale (A_c) or amplitude (limit-cycle A).
inline RateSet parse_rates(Section s, ModelChoice model) {
    const bool by_scale = s.has("amplitude_scale");
    const bool by_amp = s.has("amplitude");
    RateSet rs;
    if (by_scale || by_amp) {
        require(!(by_scale && by_amp), ErrorCode::validation, "rates: give amplitude_scale or amplitude, not both");
        for (const char* k : {"kappa1", "gamma1", "gamma2"})
            require(!s.has(k), ErrorCode::validation,
                    std::string("rates: ") + k + " conflicts with an amplitude specification");
        const double eps = s.number("epsilon");
        const double r = s.number("r", 0.0);
        double ac = by_scale ? s.number("amplitude_scale") : 0.0;
        if (by_amp) ac = s.number("amplitude") * std::sqrt(shape_factor(model)) / 2.0;
        try {
            rs = RateSet::from_amplitude(eps, r, ac);
        } catch (const Error& e) {
            throw Error(ErrorCode::validation, std::string("rates: ") + e.what());
        }
    } else {
        for (const char* k : {"epsilon", "r"})
            require(!s.has(k), ErrorCode::validation,
                    std::string("rates: ") + k + " needs amplitude_scale or amplitude");
        rs.kappa1 = s.number("kappa1", 0.0);
        rs.gamma1 = s.number("gamma1", 0.0);
        rs.gamma2 = s.number("gamma2", 0.0);
    }
    rs.kappa2 = s.number("kappa2", 0.0);
    rs.temperature = s.number("temperature", 0.0);
    rs.delta1 = s.number("delta1", 0.1);
    rs.delta2 = s.number("delta2", 0.1);
    s.finish();
    try {
        rs.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::validation, std::string("rates: ") + e.what());
    }
    return rs;
}

inline Variant parse_variant(const std::string& s) {
    if (s == "rvdp") return Variant::rvdp;
    if (s == "vdp") return Variant::vdp;
    if (s == "rayleigh") return Variant::rayleigh;
    throw Error(ErrorCode::validation, "classical.variant: expected rvdp, vdp or rayleigh");
}

inline ClassicalParams parse_classical(Section s, Variant& variant) {
    variant = parse_variant(s.string("variant", "vdp"));
    const double eps = s.number("epsilon");
    double g2 = 0.0;
    if (s.has("amplitude_scale")) {
        require(!s.has("gamma2"), ErrorCode::validation, "classical: give gamma2 or amplitude_scale, not both");
        const double ac = s.number("amplitude_scale");
        require(ac > 0.0, ErrorCode::validation, "classical.amplitude_scale must be > 0");
        g2 = eps / (ac * ac);
    } else {
        g2 = s.number("gamma2");
    }
    auto p = ClassicalParams::for_variant(variant, eps, g2);
    p.noise_temp = s.number("noise_temp", 0.0);
    if (s.has("noise_coupling")) p.noise_coupling = s.number("noise_coupling");
    s.finish();
    try {
        p.validate();
        (void)p.noise_intensity();
    } catch (const Error& e) {
        throw Error(ErrorCode::validation, std::string("classical: ") + e.what());
    }
    return p;
}

inline InitialState parse_initial(Section s) {
    InitialState st;
    st.kind = s.string("kind", "coherent");
    if (st.kind == "coherent") {
        const auto a = s.numbers("alpha", {0.0, 0.0});
        require(a.size() == 2, ErrorCode::validation, "evolve.initial.alpha must be [re, im]");
        st.alpha = cplx(a[0], a[1]);
    } else if (st.kind == "fock") {
        st.n = static_cast<int>(s.integer("n", 0));
    } else if (st.kind == "thermal") {
        st.nbar = s.number("nbar", 0.0);
        require(st.nbar >= 0.0, ErrorCode::validation, "evolve.initial.nbar must be >= 0");
    } else {
        throw Error(ErrorCode::validation, "evolve.initial.kind: expected coherent, fock or thermal");
    }
    s.finish();
    return st;
}

inline void require_times(double t_end, double step, const std::string& where) {
    require(std::isfinite(t_end) && t_end > 0.0, ErrorCode::validation, where + ".t_end must be > 0");
    require(std::isfinite(step) && step > 0.0 && step <= t_end, ErrorCode::validation,
            where + ".step must lie in (0, t_end]");
    require(t_end / step <= 2e6, ErrorCode::validation, where + ": too many output samples");
}

}  // namespace detail

// Validates the whole document; throws Error(validation) on the first problem.
inline ExperimentConfig parse_config(const json& doc) {
    using detail::require;
    detail::Section root(doc, "");
    ExperimentConfig c;
    c.source = doc;
    c.description = root.string("description", "");
    c.task = parse_task(root.string("task"));
    c.model = parse_model(root.string("model", c.task == Task::classical_ensemble ? "classical" : "rvdp"));
    c.seed = static_cast<std::uint64_t>(root.integer("seed", 0));

    if (const json* cut = root.raw("cutoff")) {
        if (cut->is_string()) {
            require(cut->get<std::string>() == "auto", ErrorCode::validation, "cutoff: expected an integer or \"auto\"");
        } else if (cut->is_number_integer()) {
            const auto n = cut->get<long long>();
            require(n >= 2 && n <= max_liouville_cutoff, ErrorCode::validation,
                    "cutoff: must lie in [2, " + std::to_string(max_liouville_cutoff) + "]");
            c.cutoff = static_cast<int>(n);
        } else {
            root.fail_key("cutoff", "expected an integer or \"auto\"");
        }
    }

    if (c.model == ModelChoice::classical) {
        require(!root.has("rates"), ErrorCode::validation, "rates: not used by the classical model");
        c.classical = detail::parse_classical(root.child("classical"), c.variant);
    } else {
        require(!root.has("classical"), ErrorCode::validation, "classical: only used with model \"classical\"");
        c.rates = detail::parse_rates(root.child("rates"), c.model);
    }

    const bool classical_task = c.task == Task::classical_ensemble;
    const bool sweep_classical = c.task == Task::sweep && root.has("sweep") && doc.at("sweep").is_object() &&
                                 doc.at("sweep").value("task", "") == "classical-ensemble";
    if (classical_task || sweep_classical)
        require(c.model == ModelChoice::classical, ErrorCode::validation,
                "classical-ensemble needs model \"classical\"");
    else if (c.task != Task::sweep)
        require(c.model != ModelChoice::classical, ErrorCode::validation,
                std::string(to_string(c.task)) + " needs a quantum model");

    {
        auto s = root.child("steady");
        c.steady.amplitude = s.boolean("amplitude", true);
        c.steady.density = s.boolean("density", false);
        c.steady.grid = detail::parse_grid(s.child("grid"));
        s.finish();
    }
    {
        auto s = root.child("evolve");
        auto& e = c.evolve;
        e.t_end = s.number("t_end", 10.0);
        e.step = s.number("step", 0.1);
        e.method = detail::parse_method(s.string("method", "auto"), "evolve.method");
        e.dt = s.number("dt", 0.01);
        e.initial = detail::parse_initial(s.child("initial"));
        e.wigner_times = s.numbers("wigner_times");
        e.grid = detail::parse_grid(s.child("grid"));
        e.classical = s.boolean("classical", false);
        s.finish();
        if (c.task == Task::evolve) {
            detail::require_times(e.t_end, e.step, "evolve");
            require(e.dt > 0.0, ErrorCode::validation, "evolve.dt must be > 0");
            for (double t : e.wigner_times)
                require(t >= 0.0 && t <= e.t_end, ErrorCode::validation, "evolve.wigner_times must lie in [0, t_end]");
        }
    }
    {
        auto s = root.child("wigner");
        c.wigner.grid = detail::parse_grid(s.child("grid"));
        s.finish();
    }
    {
        auto s = root.child("ensemble");
        auto& e = c.ensemble;
        const auto n = s.integer("count", 1000);
        require(n >= 1 && n <= 10000000, ErrorCode::validation, "ensemble.count must lie in [1, 1e7]");
        e.count = static_cast<std::size_t>(n);
        const auto ctr = s.numbers("center", {0.5, 0.5});
        require(ctr.size() == 2, ErrorCode::validation, "ensemble.center must be [x, v]");
        e.center = {ctr[0], ctr[1]};
        e.sigma = s.number("sigma", 0.1);
        require(e.sigma >= 0.0, ErrorCode::validation, "ensemble.sigma must be >= 0");
        e.t_end = s.number("t_end", 10.0);
        e.sample_step = s.number("sample_step", 1.0);
        e.snapshot_times = s.numbers("snapshot_times");
        const auto scheme = s.string("scheme", "heun");
        if (scheme == "heun") e.scheme = NoiseScheme::heun;
        else if (scheme == "euler-maruyama") e.scheme = NoiseScheme::euler_maruyama;
        else throw Error(ErrorCode::validation, "ensemble.scheme: expected heun or euler-maruyama");
        e.dt = s.number("dt", 1e-3);
        s.finish();
        if (classical_task) {
            detail::require_times(e.t_end, e.sample_step, "ensemble");
            require(e.dt > 0.0, ErrorCode::validation, "ensemble.dt must be > 0");
            for (double t : e.snapshot_times)
                require(t >= 0.0 && t <= e.t_end, ErrorCode::validation,
                        "ensemble.snapshot_times must lie in [0, t_end]");
        }
    }
    {
        auto s = root.child("correlate");
        auto& k = c.correlate;
        k.t_end = s.number("t_end", 100.0);
        k.step = s.number("step", 0.1);
        const auto w = s.string("window", "hann");
        if (w == "hann") k.window = Window::hann;
        else if (w == "none") k.window = Window::none;
        else throw Error(ErrorCode::validation, "correlate.window: expected hann or none");
        k.method = detail::parse_method(s.string("method", "auto"), "correlate.method");
        k.dt = s.number("dt", 0.01);
        k.plateau_time = s.number("plateau_time", 1e5);
        s.finish();
        if (c.task == Task::correlate) {
            detail::require_times(k.t_end, k.step, "correlate");
            require(k.plateau_time > k.t_end, ErrorCode::validation, "correlate.plateau_time must exceed t_end");
        }
    }
    {
        auto s = root.child("sweep");
        if (c.task == Task::sweep) {
            c.sweep.task = parse_task(s.string("task"));
            require(c.sweep.task != Task::sweep, ErrorCode::validation, "sweep.task cannot be sweep");
            c.sweep.keep_tables = s.boolean("keep_tables", false);
            const json* grid = s.raw("grid");
            require(grid && grid->is_object() && !grid->empty(), ErrorCode::validation,
                    "sweep.grid must be a non-empty object of key -> list");
            std::size_t points = 1;
            for (const auto& [k, v] : grid->items()) {
                require(v.is_array() && !v.empty(), ErrorCode::validation,
                        "sweep.grid." + k + " must be a non-empty list");
                require(k.rfind("sweep", 0) != 0 && k != "task", ErrorCode::validation,
                        "sweep.grid." + k + ": this key cannot be swept");
                c.sweep.axes.push_back({k, std::vector<json>(v.begin(), v.end())});
                points *= v.size();
            }
            require(points <= 100000, ErrorCode::validation, "sweep grid exceeds 1e5 points");
        } else {
            for (const char* k : {"task", "grid", "keep_tables"}) (void)s.raw(k);
        }
        s.finish();
    }
    root.finish();
    return c;
}

// Base config of one sweep point: sweep section dropped, overrides applied.
inline json sweep_point_config(const json& base, const SweepTask& sw, const std::vector<std::size_t>& index) {
    json doc = base;
    doc.erase("sweep");
    doc["task"] = std::string(to_string(sw.task));
    for (std::size_t a = 0; a < sw.axes.size(); ++a) set_path(doc, sw.axes[a].path, sw.axes[a].values[index[a]]);
    return doc;
}

}  // namespace limitcycle::cli
