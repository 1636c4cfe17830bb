// classical.hpp: generalized Rayleigh-van der Pol oscillator:
//   x' = v,  v' = -x + eps v - gamma2 (eta x^2 + zeta v^2) v  (+ noise on v)
// deterministic RK4, stochastic ensembles, slow-amplitude and mean-field flows.

#pragma once

#include "limitcycle/error.hpp"
#include "limitcycle/models.hpp"
#include "limitcycle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace limitcycle {

enum class Variant { rvdp, vdp, rayleigh };

inline constexpr std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::rvdp: return "rvdp";
        case Variant::vdp: return "vdp";
        case Variant::rayleigh: return "rayleigh";
    }
    return "unknown";
}

// ------------------------------ ClassicalParams ------------------------------

struct ClassicalParams {
    double epsilon = 0.0;
    double gamma2 = 1.0;
    double eta = 1.0;
    double zeta = 1.0;
    double noise_temp = 0.0;
    double noise_coupling = std::numeric_limits<double>::quiet_NaN();  // unset

    static ClassicalParams for_variant(Variant v, double epsilon, double gamma2) {
        ClassicalParams p;
        p.epsilon = epsilon;
        p.gamma2 = gamma2;
        p.eta = v == Variant::rayleigh ? 0.0 : 1.0;
        p.zeta = v == Variant::vdp ? 0.0 : 1.0;
        return p;
    }

    // Noise coupling defaults to kappa1 + gamma1.
    static ClassicalParams from_rates(Variant v, const RateSet& r) {
        auto p = for_variant(v, r.epsilon(), r.gamma2);
        p.noise_coupling = r.kappa1 + r.gamma1;
        return p;
    }

    double amplitude_scale() const {
        detail::require(epsilon > 0.0 && gamma2 > 0.0, ErrorCode::invalid_parameter,
                        "A_c needs epsilon > 0 and gamma2 > 0");
        return std::sqrt(epsilon / gamma2);
    }
    double eta_eff() const noexcept { return eta + 3.0 * zeta; }

    // Saturated amplitude 2 A_c / sqrt(eta + 3 zeta).
    double limit_amplitude() const { return 2.0 * amplitude_scale() / std::sqrt(eta_eff()); }

    double noise_intensity() const {
        if (noise_temp == 0.0) return 0.0;
        detail::require(std::isfinite(noise_coupling) && noise_coupling >= 0.0, ErrorCode::invalid_parameter,
                        "noise coupling must be set and >= 0 when noise_temp > 0");
        return 2.0 * noise_coupling * noise_temp;
    }

    void validate() const {
        detail::require(std::isfinite(epsilon), ErrorCode::invalid_parameter, "epsilon must be finite");
        detail::require(gamma2 >= 0.0, ErrorCode::invalid_parameter, "gamma2 must be >= 0");
        detail::require(eta >= 0.0 && eta <= 1.0 && zeta >= 0.0 && zeta <= 1.0, ErrorCode::invalid_parameter,
                        "eta and zeta must lie in [0, 1]");
        detail::require(noise_temp >= 0.0, ErrorCode::invalid_parameter, "noise_temp must be >= 0");
    }
};

struct PhasePoint {
    double x = 0.0;
    double v = 0.0;

    double radius() const noexcept { return std::hypot(x, v); }
    // Phase of x = r cos(t + phi), v = -r sin(t + phi).
    double phase() const noexcept { return std::atan2(-v, x); }
};

inline PhasePoint grvdp_rhs(const PhasePoint& s, const ClassicalParams& p) {
    return {s.v, -s.x + p.epsilon * s.v - p.gamma2 * (p.eta * s.x * s.x + p.zeta * s.v * s.v) * s.v};
}

// ---------------------------- deterministic RK4 ------------------------------

namespace detail {

inline void check_divergence(const PhasePoint& s) {
    if (!(std::abs(s.x) <= 1e6) || !(std::abs(s.v) <= 1e6))
        throw Error(ErrorCode::instability, "trajectory diverged (|x| or |v| > 1e6)");
}

inline PhasePoint rk4_step(const PhasePoint& s, const ClassicalParams& p, double h) {
    auto add = [](const PhasePoint& a, const PhasePoint& b, double c) { return PhasePoint{a.x + c * b.x, a.v + c * b.v}; };
    const auto k1 = grvdp_rhs(s, p);
    const auto k2 = grvdp_rhs(add(s, k1, 0.5 * h), p);
    const auto k3 = grvdp_rhs(add(s, k2, 0.5 * h), p);
    const auto k4 = grvdp_rhs(add(s, k3, h), p);
    return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

inline void check_times_from(const std::vector<double>& times) {
    require(!times.empty(), ErrorCode::invalid_parameter, "no output times");
    for (std::size_t k = 1; k < times.size(); ++k)
        require(times[k] > times[k - 1], ErrorCode::invalid_parameter, "output times must be strictly increasing");
}

inline int substeps(double span, double dt) {
    return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
}

}  // namespace detail

// RK4 from s0 at times[0], returning the state at every output time.
inline std::vector<PhasePoint> integrate(const PhasePoint& s0, const ClassicalParams& p,
                                         const std::vector<double>& times, double dt = 0.01) {
    p.validate();
    detail::check_times_from(times);
    detail::require(dt > 0.0 && dt <= 0.01, ErrorCode::invalid_parameter, "RK4 step must lie in (0, 0.01]");
    std::vector<PhasePoint> out;
    out.reserve(times.size());
    PhasePoint s = s0;
    out.push_back(s);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double span = times[k] - times[k - 1];
        const int n = detail::substeps(span, dt);
        for (int i = 0; i < n; ++i) s = detail::rk4_step(s, p, span / n);
        detail::check_divergence(s);
        out.push_back(s);
    }
    return out;
}

inline std::vector<double> uniform_times(double t_end, double step, double t0 = 0.0) {
    detail::require(step > 0.0 && t_end >= t0, ErrorCode::invalid_parameter, "bad time axis");
    const int n = static_cast<int>(std::floor((t_end - t0) / step + 1e-9));
    std::vector<double> t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = t0 + k * step;
    if (t_end - t.back() > 1e-9 * std::max(1.0, t_end)) t.push_back(t_end);
    return t;
}

// ---- orbit statistics ----

struct OrbitStats {
    double mean_radius = 0.0;
    double radius_std = 0.0;
    double radius_variance = 0.0;
    double max_abs_x = 0.0;
};

inline OrbitStats orbit_stats(const std::vector<PhasePoint>& pts) {
    detail::require(!pts.empty(), ErrorCode::invalid_parameter, "empty orbit");
    OrbitStats s;
    for (const auto& q : pts) {
        s.mean_radius += q.radius();
        s.max_abs_x = std::max(s.max_abs_x, std::abs(q.x));
    }
    s.mean_radius /= pts.size();
    for (const auto& q : pts) s.radius_variance += (q.radius() - s.mean_radius) * (q.radius() - s.mean_radius);
    s.radius_variance /= pts.size();
    s.radius_std = std::sqrt(s.radius_variance);
    return s;
}

// ------------------------------- ensembles -----------------------------------

struct EnsembleState {
    double time = 0.0;
    std::vector<PhasePoint> points;
};

enum class NoiseScheme { euler_maruyama, heun };

struct EnsembleOptions {
    NoiseScheme scheme = NoiseScheme::euler_maruyama;
    double dt = 1e-3;
    int jobs = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, member), fixed regardless of scheduling.
inline std::mt19937_64 member_rng(std::uint64_t seed, std::uint64_t member) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(member + 0x632be59bd9b4e019ULL)));
}

}  // namespace detail

inline EnsembleState gaussian_cloud(PhasePoint center, double sigma_x, double sigma_v, std::size_t count,
                                    std::uint64_t seed) {
    detail::require(sigma_x >= 0.0 && sigma_v >= 0.0, ErrorCode::invalid_parameter, "sigma must be >= 0");
    EnsembleState e;
    e.points.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = detail::member_rng(seed ^ 0xc10dULL, i);
        std::normal_distribution<double> n01(0.0, 1.0);
        e.points[i] = {center.x + sigma_x * n01(rng), center.v + sigma_v * n01(rng)};
    }
    return e;
}

// Snapshots at every output time; times[0] must equal e0.time.
inline std::vector<EnsembleState> ensemble_evolve(const EnsembleState& e0, const ClassicalParams& p,
                                                  const std::vector<double>& times, std::uint64_t seed,
                                                  const EnsembleOptions& opt = {}) {
    p.validate();
    detail::check_times_from(times);
    detail::require(std::abs(times.front() - e0.time) < 1e-12, ErrorCode::invalid_parameter,
                    "first output time must equal the ensemble time");
    detail::require(opt.dt > 0.0, ErrorCode::invalid_parameter, "step must be > 0");
    const double D = p.noise_intensity();
    const double kick = std::sqrt(D);
    const std::size_t M = e0.points.size();

    std::vector<EnsembleState> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out[k].time = times[k];
        out[k].points.resize(M);
    }
    parallel_for(M, opt.jobs, [&](std::size_t m) {
        auto rng = detail::member_rng(seed, m);
        std::normal_distribution<double> n01(0.0, 1.0);
        PhasePoint s = e0.points[m];
        out[0].points[m] = s;
        for (std::size_t k = 1; k < times.size(); ++k) {
            const double span = times[k] - times[k - 1];
            const int n = detail::substeps(span, opt.dt);
            const double h = span / n;
            const double sh = std::sqrt(h);
            for (int i = 0; i < n; ++i) {
                if (D == 0.0) {
                    s = detail::rk4_step(s, p, h);
                    continue;
                }
                const double dW = kick * sh * n01(rng);
                const auto f0 = grvdp_rhs(s, p);
                if (opt.scheme == NoiseScheme::euler_maruyama) {
                    s = {s.x + h * f0.x, s.v + h * f0.v + dW};
                } else {
                    const PhasePoint pred{s.x + h * f0.x, s.v + h * f0.v + dW};
                    const auto f1 = grvdp_rhs(pred, p);
                    s = {s.x + 0.5 * h * (f0.x + f1.x), s.v + 0.5 * h * (f0.v + f1.v) + dW};
                }
            }
            detail::check_divergence(s);
            out[k].points[m] = s;
        }
    });
    return out;
}

// ---- ensemble statistics ----

inline std::vector<double> radii(const EnsembleState& e) {
    std::vector<double> r(e.points.size());
    std::transform(e.points.begin(), e.points.end(), r.begin(), [](const PhasePoint& q) { return q.radius(); });
    return r;
}

inline double median(std::vector<double> v) {
    detail::require(!v.empty(), ErrorCode::invalid_parameter, "median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
    return m;
}

inline double mean_radius(const EnsembleState& e) {
    const auto r = radii(e);
    return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

// 1 - |<exp(i phi)>|: 0 for a single phase, 1 for a uniform spread.
inline double circular_variance(const EnsembleState& e) {
    detail::require(!e.points.empty(), ErrorCode::invalid_parameter, "empty ensemble");
    std::complex<double> s = 0.0;
    for (const auto& q : e.points) s += std::polar(1.0, q.phase());
    return 1.0 - std::abs(s) / static_cast<double>(e.points.size());
}

// -------------------------------- slow flows ---------------------------------

// dA/dT = (1 - (eta + 3 zeta)|A|^2 / (4 A_c^2)) A / 2 on the slow time T = eps t.
inline std::complex<double> slow_amplitude_flow(std::complex<double> A, const ClassicalParams& p) {
    const double Ac = p.amplitude_scale();
    return 0.5 * (1.0 - p.eta_eff() * std::norm(A) / (4.0 * Ac * Ac)) * A;
}

// Semiclassical equation for alpha = <a>.
inline std::complex<double> meanfield_flow(std::complex<double> alpha, const ClassicalParams& p, Variant variant) {
    const std::complex<double> rot = std::complex<double>(0.0, -1.0) * alpha;
    if (p.epsilon == 0.0) return rot;
    const double Ac2 = p.epsilon / p.gamma2;
    const double x = std::sqrt(2.0) * alpha.real();
    const double q = std::sqrt(2.0) * alpha.imag();
    double sat = 0.0;
    switch (variant) {
        case Variant::rvdp: sat = 2.0 * std::norm(alpha) / Ac2; break;
        case Variant::vdp: sat = x * x / (2.0 * Ac2); break;
        case Variant::rayleigh: sat = (x * x + 2.0 * q * q) / (2.0 * Ac2); break;
    }
    return rot + 0.5 * p.epsilon * (1.0 - sat) * alpha;
}

}  // namespace limitcycle
