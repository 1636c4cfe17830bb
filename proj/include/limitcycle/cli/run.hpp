// cli/run.hpp: task dispatch, result tables, sweeps and on-disk persistence.

#pragma once

#include "limitcycle/analytic.hpp"
#include "limitcycle/classical.hpp"
#include "limitcycle/cli/config.hpp"
#include "limitcycle/correlations.hpp"
#include "limitcycle/liouville.hpp"
#include "limitcycle/models.hpp"
#include "limitcycle/parallel.hpp"
#include "limitcycle/phasespace.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace limitcycle::cli {

inline constexpr const char* version = "1.0.0";

struct Table {
    std::string name;                   // file stem
    std::vector<std::string> preamble;  // '#' lines before the header
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ResultBundle {
    json config;
    json summary = json::object();
    std::vector<Table> tables;
    json errors = json::array();
};

inline constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// ---- helpers ----

namespace detail {

using limitcycle::detail::require;

// nlohmann writes NaN as null, which is what the manifest wants.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json error_json(const Error& e) {
    return json{{"code", std::string(to_string(e.code()))},
                {"category", std::string(to_string(e.category()))},
                {"message", e.what()}};
}

// Output axis 0, step, ..., t_end merged with extra times (duplicates within 1e-9 dropped).
inline std::vector<double> merged_times(double t_end, double step, const std::vector<double>& extra) {
    auto t = uniform_times(t_end, step);
    t.insert(t.end(), extra.begin(), extra.end());
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (double v : t)
        if (out.empty() || v - out.back() > 1e-9 * std::max(1.0, std::abs(v))) out.push_back(v);
    return out;
}

inline std::size_t nearest_index(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return best;
}

inline double coherent_need(cplx alpha) {
    return std::ceil(4.0 * std::norm(alpha));
}

// RvdP rates with the same limit-cycle amplitude as the requested model.
inline RateSet matched_rvdp_rates(const RateSet& r, ModelChoice m) {
    RateSet out = r;
    out.gamma2 = r.gamma2 * shape_factor(m) / 4.0;
    return out;
}

inline double diag_tail(const DensityMatrix& rho) {
    return rho.matrix()(rho.cutoff() - 1, rho.cutoff() - 1).real();
}

inline constexpr int max_auto_full_cutoff = 128;
inline constexpr double full_tail_tol = 1e-8;

// Cutoff from the config, or from the banded RvdP tail (matched amplitude for vdP and
// Rayleigh, checked against the full steady state).
inline int resolve_cutoff(const ExperimentConfig& c, json& summary, int floor_n = 2) {
    if (c.cutoff) {
        summary["cutoff"] = *c.cutoff;
        summary["cutoff_auto"] = false;
        return *c.cutoff;
    }
    const auto eff = effective_rates(matched_rvdp_rates(c.rates, c.model));
    int N = std::max(auto_cutoff(eff), floor_n);
    if (c.model != ModelChoice::rvdp) {
        const auto kind = quantum_kind(c.model);
        while (true) {
            require(N <= max_auto_full_cutoff, ErrorCode::resource_limit,
                    "automatic cutoff exceeds " + std::to_string(max_auto_full_cutoff));
            const auto rho = steady_state(build_model(kind, c.rates, N));
            if (diag_tail(rho) < full_tail_tol) break;
            N = std::max(N + 1, static_cast<int>(N * 1.25));
        }
    }
    summary["cutoff"] = N;
    summary["cutoff_auto"] = true;
    return N;
}

inline PhaseGrid make_grid(const GridSpec& g, const Matrix& rho) {
    if (g.extent > 0.0) return PhaseGrid::symmetric(g.extent, g.points);
    return default_grid(rho, g.points);
}

inline Table wigner_table(const WignerField& f, const std::string& name, const std::string& note = "") {
    Table t{name, {}, {"x", "p", "w"}, {}};
    char buf[256];
    std::snprintf(buf, sizeof buf, "grid x_min=%.17g x_max=%.17g nx=%d p_min=%.17g p_max=%.17g np=%d",
                  f.grid.x_min, f.grid.x_max, f.grid.nx, f.grid.p_min, f.grid.p_max, f.grid.np);
    t.preamble.push_back(buf);
    if (!note.empty()) t.preamble.push_back(note);
    t.rows.reserve(static_cast<std::size_t>(f.grid.nx) * f.grid.np);
    for (int i = 0; i < f.grid.nx; ++i)
        for (int j = 0; j < f.grid.np; ++j) t.rows.push_back({f.grid.x(i), f.grid.p(j), f.values(i, j)});
    return t;
}

inline Table radial_table(const RadialProfile& prof, const std::string& name) {
    Table t{name, {}, {"r", "w", "count", "anisotropy"}, {}};
    for (std::size_t b = 0; b < prof.radii.size(); ++b)
        t.rows.push_back({prof.radii[b], prof.values[b], double(prof.counts[b]), prof.anisotropy[b]});
    return t;
}

// Peak radius and field diagnostics; the amplitude is null when the field is not ring-like.
inline void wigner_summary(const WignerField& f, json& out) {
    const auto prof = radial_profile(f);
    out["normalization"] = f.normalization();
    out["w_min"] = f.min();
    out["w_max"] = f.max();
    out["asymmetry"] = prof.asymmetry;
    out["coverage_warning"] = f.coverage_warning;
    try {
        out["amplitude"] = peak_radius(f);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::not_applicable) throw;
        out["amplitude"] = nullptr;
    }
}

inline double mean_number(const DensityMatrix& rho) { return expectation(rho, number(rho.cutoff())).real(); }

}  // namespace detail

// ---- tasks ----

inline ResultBundle run_steady(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    auto& s = rb.summary;
    const auto kind = quantum_kind(c.model);
    const int N = detail::resolve_cutoff(c, s);
    const auto model = build_model(kind, c.rates, N);
    SteadyStateInfo info;
    const auto rho = steady_state(model, &info);
    s["residual"] = info.residual;
    s["mean_n"] = detail::mean_number(rho);
    s["tail"] = detail::diag_tail(rho);
    {
        double off = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (i != j) off = std::max(off, std::abs(rho.matrix()(i, j)));
        s["max_offdiag"] = off;
    }

    Table probs{"probs", {}, {"n", "p_full"}, {}};
    const auto pf = rho.diagonal();
    std::vector<double> pb, pa;
    if (kind == ModelKind::rvdp) {
        const auto eff = effective_rates(c.rates);
        pb.assign(N, nan_v);
        pa.assign(N, nan_v);
        const auto banded = rvdp_diag_steady(eff, N);
        for (int n = 0; n < N; ++n) pb[n] = banded[n];
        probs.columns.push_back("p_banded");
        probs.columns.push_back("p_analytic");
        try {
            AnalyticInfo ai;
            const auto an = steady_probs(eff, N - 1, &ai);
            for (int n = 0; n < N; ++n) pa[n] = an[n];
            s["analytic_digits"] = ai.digits;
            s["analytic_error_estimate"] = ai.error_estimate;
        } catch (const Error& e) {
            if (e.category() == ErrorCategory::resource) throw;
            s["analytic"] = detail::error_json(e);
        }
        double db = 0.0, da = 0.0;
        for (int n = 0; n < N; ++n) {
            db = std::max(db, std::abs(pf[n] - pb[n]));
            if (std::isfinite(pa[n])) da = std::max(da, std::abs(pf[n] - pa[n]));
        }
        s["max_diff_banded"] = db;
        s["max_diff_analytic"] = std::isfinite(pa[0]) ? json(da) : json(nullptr);
        try {
            s["amplitude_quantum_limit"] = limit_amplitude(ratio_R(c.rates));
        } catch (const Error&) {
            s["amplitude_quantum_limit"] = nullptr;
        }
    }
    for (int n = 0; n < N; ++n) {
        std::vector<double> row{double(n), pf[n]};
        if (!pb.empty()) {
            row.push_back(pb[n]);
            row.push_back(pa[n]);
        }
        probs.rows.push_back(std::move(row));
    }
    rb.tables.push_back(std::move(probs));

    if (c.steady.amplitude) {
        const auto f = wigner(rho, detail::make_grid(c.steady.grid, rho.matrix()), jobs);
        json w;
        detail::wigner_summary(f, w);
        s["wigner"] = w;
        s["amplitude"] = w["amplitude"];
    }
    if (c.steady.density) {
        Table t{"rho", {}, {"n", "m", "re", "im"}, {}};
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                t.rows.push_back({double(i), double(j), rho.matrix()(i, j).real(), rho.matrix()(i, j).imag()});
        rb.tables.push_back(std::move(t));
    }
    return rb;
}

inline ResultBundle run_analytic(const ExperimentConfig& c, int) {
    ResultBundle rb;
    auto& s = rb.summary;
    detail::require(c.model == ModelChoice::rvdp, ErrorCode::validation, "analytic task needs model rvdp");
    const int N = detail::resolve_cutoff(c, s);
    const auto eff = effective_rates(c.rates);
    AnalyticInfo ai;
    const auto p = steady_probs(eff, N - 1, &ai);
    s["digits"] = ai.digits;
    s["error_estimate"] = ai.error_estimate;
    s["sum"] = p.sum();
    s["mean_n"] = p.mean();
    s["tail"] = p.tail();
    s["effective_rates"] = json{{"Gamma1", eff.Gamma1_t}, {"K1", eff.K1_t}, {"Gamma2", eff.Gamma2_t}, {"K2", eff.K2_t}};
    Table t{"probs", {}, {"n", "p"}, {}};
    for (int n = 0; n < p.size(); ++n) t.rows.push_back({double(n), p[n]});
    rb.tables.push_back(std::move(t));
    return rb;
}

inline ResultBundle run_wigner(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    auto& s = rb.summary;
    const int N = detail::resolve_cutoff(c, s);
    const auto rho = steady_state(build_model(quantum_kind(c.model), c.rates, N));
    s["mean_n"] = detail::mean_number(rho);
    const auto f = wigner(rho, detail::make_grid(c.wigner.grid, rho.matrix()), jobs);
    detail::wigner_summary(f, s);
    rb.tables.push_back(detail::wigner_table(f, "wigner"));
    rb.tables.push_back(detail::radial_table(radial_profile(f), "radial"));
    return rb;
}

inline ResultBundle run_evolve(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    auto& s = rb.summary;
    const auto& e = c.evolve;
    const auto kind = quantum_kind(c.model);
    int floor_n = 2;
    if (e.initial.kind == "coherent") floor_n = static_cast<int>(detail::coherent_need(e.initial.alpha));
    if (e.initial.kind == "fock") floor_n = e.initial.n + 1;
    const int N = detail::resolve_cutoff(c, s, std::min(floor_n, max_liouville_cutoff));

    DensityMatrix rho0 = [&] {
        if (e.initial.kind == "coherent") {
            const auto psi = coherent_state(e.initial.alpha, N);
            s["initial_truncation_adequate"] = psi.truncation_adequate();
            return DensityMatrix::from_state(psi);
        }
        if (e.initial.kind == "fock") return DensityMatrix::from_state(fock_state(e.initial.n, N));
        return thermal_state(e.initial.nbar, N);
    }();

    const auto times = detail::merged_times(e.t_end, e.step, e.wigner_times);
    std::vector<std::size_t> snap;
    for (double t : e.wigner_times) snap.push_back(detail::nearest_index(times, t));

    const auto x = position(N), p = momentum(N), n = number(N);
    Table tab{"expectations", {}, {"t", "x", "p", "n", "trace_drift"}, {}};
    std::vector<WignerField> fields;
    std::size_t idx = 0;
    EvolveOptions opt;
    opt.propagation = PropagateOptions{e.method, e.dt, 1024};
    opt.store_states = false;
    opt.observer = [&](double t, const DensityMatrix& rho) {
        tab.rows.push_back({t, expectation(rho, x).real(), expectation(rho, p).real(), expectation(rho, n).real(), 0.0});
        for (std::size_t k = 0; k < snap.size(); ++k)
            if (snap[k] == idx) fields.push_back(wigner(rho, detail::make_grid(e.grid, rho.matrix()), jobs));
        ++idx;
    };
    const auto traj = evolve(build_model(kind, c.rates, N), rho0, times, opt);
    double drift = 0.0;
    for (std::size_t k = 0; k < tab.rows.size(); ++k) {
        tab.rows[k][4] = traj.trace_drift[k];
        drift = std::max(drift, traj.trace_drift[k]);
    }
    s["max_trace_drift"] = drift;
    s["final"] = json{{"x", tab.rows.back()[1]}, {"p", tab.rows.back()[2]}, {"n", tab.rows.back()[3]}};

    if (e.classical) {
        const Variant v = kind == ModelKind::rvdp ? Variant::rvdp : kind == ModelKind::vdp ? Variant::vdp : Variant::rayleigh;
        const auto cp = ClassicalParams::for_variant(v, c.rates.epsilon(), c.rates.gamma2);
        const PhasePoint s0{std::sqrt(2.0) * e.initial.alpha.real(), std::sqrt(2.0) * e.initial.alpha.imag()};
        const auto traj_c = integrate(s0, cp, times);
        tab.columns.push_back("x_classical");
        tab.columns.push_back("v_classical");
        double dev = 0.0;
        for (std::size_t k = 0; k < tab.rows.size(); ++k) {
            tab.rows[k].push_back(traj_c[k].x);
            tab.rows[k].push_back(traj_c[k].v);
            dev = std::max(dev, std::hypot(tab.rows[k][1] - traj_c[k].x, tab.rows[k][2] - traj_c[k].v));
        }
        s["max_classical_deviation"] = dev;
    }
    rb.tables.push_back(std::move(tab));

    json snaps = json::array();
    for (std::size_t k = 0; k < fields.size(); ++k) {
        const double t = times[snap[k]];
        json w{{"time", t}};
        detail::wigner_summary(fields[k], w);
        snaps.push_back(w);
        rb.tables.push_back(detail::wigner_table(fields[k], "wigner_" + std::to_string(k), "time " + std::to_string(t)));
    }
    s["wigner_snapshots"] = snaps;
    return rb;
}

inline ResultBundle run_ensemble(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    auto& s = rb.summary;
    const auto& e = c.ensemble;
    const auto times = detail::merged_times(e.t_end, e.sample_step, e.snapshot_times);
    const auto cloud = gaussian_cloud(e.center, e.sigma, e.sigma, e.count, c.seed);
    EnsembleOptions opt{e.scheme, e.dt, jobs};
    const auto states = ensemble_evolve(cloud, c.classical, times, c.seed, opt);
    s["limit_amplitude"] = c.classical.limit_amplitude();
    s["noise_intensity"] = c.classical.noise_intensity();
    Table stats{"stats", {}, {"t", "median_radius", "mean_radius", "circular_variance"}, {}};
    for (const auto& st : states)
        stats.rows.push_back({st.time, median(radii(st)), mean_radius(st), circular_variance(st)});
    s["final"] = json{{"t", stats.rows.back()[0]},
                      {"median_radius", stats.rows.back()[1]},
                      {"mean_radius", stats.rows.back()[2]},
                      {"circular_variance", stats.rows.back()[3]}};
    rb.tables.push_back(std::move(stats));
    for (std::size_t k = 0; k < e.snapshot_times.size(); ++k) {
        const auto& st = states[detail::nearest_index(times, e.snapshot_times[k])];
        Table t{"snapshot_" + std::to_string(k), {"time " + std::to_string(st.time)}, {"x", "v"}, {}};
        t.rows.reserve(st.points.size());
        for (const auto& q : st.points) t.rows.push_back({q.x, q.v});
        rb.tables.push_back(std::move(t));
    }
    return rb;
}

inline ResultBundle run_correlate(const ExperimentConfig& c, int) {
    ResultBundle rb;
    auto& s = rb.summary;
    const auto& k = c.correlate;
    const int N = detail::resolve_cutoff(c, s);
    const auto model = build_model(quantum_kind(c.model), c.rates, N);
    const auto times = uniform_times(k.t_end, k.step);
    CorrelationOptions opt{PropagateOptions{k.method, k.dt, 1024}};
    const auto b = preset_correlators(model, times, opt);

    const std::vector<std::pair<std::string, const CorrelationSeries*>> series{
        {"xx", &b.xx}, {"x2x2", &b.x2x2}, {"a2a2", &b.a2a2}};
    Table ct{"correlations", {}, {"t"}, {}};
    for (const auto& [name, _] : series) {
        ct.columns.push_back(name + "_re");
        ct.columns.push_back(name + "_im");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row{times[i]};
        for (const auto& [_, sr] : series) {
            row.push_back(sr->values[i].real());
            row.push_back(sr->values[i].imag());
        }
        ct.rows.push_back(std::move(row));
    }
    rb.tables.push_back(std::move(ct));

    Table st{"spectra", {}, {"omega"}, {}};
    std::vector<Spectrum> spectra;
    for (const auto& [name, sr] : series) {
        st.columns.push_back("S_" + name);
        spectra.push_back(spectrum(*sr, k.window));
    }
    for (std::size_t i = 0; i < spectra[0].freqs.size(); ++i) {
        std::vector<double> row{spectra[0].freqs[i]};
        for (const auto& sp : spectra) row.push_back(sp.values[i]);
        st.rows.push_back(std::move(row));
    }
    rb.tables.push_back(std::move(st));

    // long-time limit of <adag^2(t) a^2(0)> against the factorized value
    const auto a2 = annihilation(N) * annihilation(N);
    const auto plateau = two_time_corr(model, b.rho_ss, a2.adjoint(), a2, {0.0, k.plateau_time},
                                       CorrelationOptions{PropagateOptions{Method::exponential, k.dt, 1 << 30}});
    const cplx ea = expectation(b.rho_ss, a2);

    s["bin_width"] = spectra[0].bin_width();
    json per = json::object();
    for (std::size_t q = 0; q < series.size(); ++q) {
        json o;
        const auto pk = spectral_peaks(spectra[q], 1e-2);
        json peaks = json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(pk.size(), 4); ++i) peaks.push_back(spectra[q].freqs[pk[i]]);
        o["peaks"] = peaks;
        o["truncation_warning"] = spectra[q].truncation_warning;
        try {
            o["decay_rate"] = fit_decay_rate(*series[q].second).rate;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::not_applicable) throw;
            o["decay_rate"] = nullptr;
        }
        per[series[q].first] = o;
    }
    s["correlators"] = per;
    s["a2a2_plateau"] = std::abs(plateau.values.back());
    s["a2a2_factorized"] = std::norm(ea);
    return rb;
}

// ---- dispatch ----

inline ResultBundle execute(const ExperimentConfig& c, int jobs);

namespace detail {

// Scalar summary fields flattened to "a.b" column names.
inline void flatten(const json& j, const std::string& prefix, std::map<std::string, double>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_number()) {
        out[prefix] = j.get<double>();
    } else if (j.is_boolean()) {
        out[prefix] = j.get<bool>() ? 1.0 : 0.0;
    } else if (j.is_null()) {
        out[prefix] = nan_v;
    }
}

}  // namespace detail

// Product grid, row-major in the order the axes are listed. Points run on a pool of
// single-threaded jobs; a failing point records its error and leaves its columns empty.
inline ResultBundle run_sweep(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    const auto& sw = c.sweep;
    std::size_t total = 1;
    for (const auto& a : sw.axes) total *= a.values.size();

    struct Point {
        json config;
        std::map<std::string, double> fields;
        std::optional<Error> error;
        std::vector<Table> tables;
    };
    std::vector<Point> pts(total);
    parallel_for(total, jobs, [&](std::size_t i) {
        std::vector<std::size_t> idx(sw.axes.size());
        std::size_t rem = i;
        for (std::size_t a = sw.axes.size(); a-- > 0;) {
            idx[a] = rem % sw.axes[a].values.size();
            rem /= sw.axes[a].values.size();
        }
        auto& pt = pts[i];
        try {
            pt.config = sweep_point_config(c.source, sw, idx);
            const auto sub = parse_config(pt.config);
            auto res = execute(sub, 1);
            detail::flatten(res.summary, "", pt.fields);
            if (sw.keep_tables) pt.tables = std::move(res.tables);
        } catch (const Error& e) {
            pt.error = e;
        } catch (const std::exception& e) {
            pt.error = Error(ErrorCode::validation, e.what());
        }
    });

    std::set<std::string> names;
    for (const auto& p : pts)
        for (const auto& [k, _] : p.fields) names.insert(k);
    // Swept values that are not numbers (model names) are recorded as the list index.
    Table t{"sweep", {}, {"point"}, {}};
    for (const auto& a : sw.axes) t.columns.push_back(a.path);
    t.columns.push_back("ok");
    for (const auto& n : names) t.columns.push_back(n);
    json failures = json::array();
    for (std::size_t i = 0; i < total; ++i) {
        std::vector<double> row{double(i)};
        std::size_t rem = i;
        std::vector<std::size_t> idx(sw.axes.size());
        for (std::size_t a = sw.axes.size(); a-- > 0;) {
            idx[a] = rem % sw.axes[a].values.size();
            rem /= sw.axes[a].values.size();
        }
        for (std::size_t a = 0; a < sw.axes.size(); ++a) {
            const auto& v = sw.axes[a].values[idx[a]];
            row.push_back(v.is_number() ? v.get<double>() : double(idx[a]));
        }
        row.push_back(pts[i].error ? 0.0 : 1.0);
        for (const auto& n : names) {
            const auto it = pts[i].fields.find(n);
            row.push_back(it == pts[i].fields.end() ? nan_v : it->second);
        }
        t.rows.push_back(std::move(row));
        if (pts[i].error) {
            auto e = detail::error_json(*pts[i].error);
            e["point"] = i;
            failures.push_back(e);
        }
        for (auto& tab : pts[i].tables) {
            tab.name = "point" + std::to_string(i) + "_" + tab.name;
            rb.tables.push_back(std::move(tab));
        }
    }
    rb.tables.insert(rb.tables.begin(), std::move(t));
    json axes = json::object();
    for (const auto& a : sw.axes) axes[a.path] = a.values;
    rb.summary["points"] = total;
    rb.summary["failed"] = failures.size();
    rb.summary["axes"] = axes;
    rb.errors = failures;
    return rb;
}

inline ResultBundle execute(const ExperimentConfig& c, int jobs) {
    ResultBundle rb;
    switch (c.task) {
        case Task::steady: rb = run_steady(c, jobs); break;
        case Task::analytic: rb = run_analytic(c, jobs); break;
        case Task::wigner: rb = run_wigner(c, jobs); break;
        case Task::evolve: rb = run_evolve(c, jobs); break;
        case Task::classical_ensemble: rb = run_ensemble(c, jobs); break;
        case Task::correlate: rb = run_correlate(c, jobs); break;
        case Task::sweep: rb = run_sweep(c, jobs); break;
    }
    rb.config = c.source;
    return rb;
}

// ---- persistence ----

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const Table& t, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::resource_limit, "cannot write " + file.string());
    for (const auto& line : t.preamble) out << "# " << line << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::resource_limit, "write failed for " + file.string());
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Provenance {
    std::string started, finished;
    std::uint64_t seed = 0;
    int jobs = 1;
};

inline json manifest_json(const json& config, const Provenance& prov, const ResultBundle* rb, const json& errors) {
    json m;
    m["config"] = config;
    m["provenance"] = json{{"version", version},
                           {"seed", prov.seed},
                           {"jobs", prov.jobs},
                           {"started", prov.started},
                           {"finished", prov.finished}};
    if (rb) {
        m["summary"] = rb->summary;
        json files = json::array();
        for (const auto& t : rb->tables) files.push_back(t.name + ".csv");
        m["files"] = files;
    }
    m["errors"] = errors;
    return m;
}

inline void write_manifest(const json& manifest, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::resource_limit, "cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

inline void write_bundle(const ResultBundle& rb, const Provenance& prov, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& t : rb.tables) write_csv(t, dir / (t.name + ".csv"));
    write_manifest(manifest_json(rb.config, prov, &rb, rb.errors), dir);
}

inline int exit_code(ErrorCategory cat) {
    switch (cat) {
        case ErrorCategory::validation: return 2;
        case ErrorCategory::numerical: return 3;
        case ErrorCategory::resource: return 4;
    }
    return 1;
}

}  // namespace limitcycle::cli
