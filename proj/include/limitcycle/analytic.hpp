// analytic.hpp: exact steady-state Fock distribution of the RvdP oscillator from
// its generating function, and closed forms of the extreme quantum limit.

#pragma once

#include "limitcycle/error.hpp"
#include "limitcycle/fock.hpp"
#include "limitcycle/hypergeometric.hpp"
#include "limitcycle/models.hpp"
#include "limitcycle/probs.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace limitcycle {

// Rates scaled by the effective nonlinear damping.
struct GenFunParams {
    double Gamma1 = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double a = 0.0;  // sqrt(K2)
    double b = 0.0;  // (a Gamma1 + K1) / (2a(1-a)), infinite at a = 0
    double c = 0.0;  // (Gamma1 + K1) / (1 - a^2)

    static GenFunParams from(const EffectiveRates& r) {
        detail::require(r.Gamma2_t > 0.0, ErrorCode::invalid_parameter,
                        "effective nonlinear damping must be > 0");
        GenFunParams g;
        g.Gamma1 = r.Gamma1_t / r.Gamma2_t;
        g.K1 = r.K1_t / r.Gamma2_t;
        g.K2 = r.K2_t / r.Gamma2_t;
        g.a = std::sqrt(g.K2);
        detail::require(g.a < 1.0, ErrorCode::invalid_parameter,
                        "no steady state when nonlinear gain >= nonlinear damping");
        g.b = g.a > 0.0 ? (g.a * g.Gamma1 + g.K1) / (2.0 * g.a * (1.0 - g.a))
                        : std::numeric_limits<double>::infinity();
        g.c = (g.Gamma1 + g.K1) / (1.0 - g.K2);
        return g;
    }
};

struct AnalyticInfo {
    int digits = 0;               // decimal digits of the arithmetic that was accepted
    double error_estimate = 0.0;  // max absolute rounding-error bound on P_n
};

// ---- Kummer branch (K2 = 0) ----

// P_n = K1^n/(K1+G1)_n 1F1(1+n; K1+G1+n; K1) / 1F1(1; K1+G1; 2K1)
inline ProbVector kummer_probs(double Gamma1, double K1, int n_max) {
    detail::require(n_max >= 0, ErrorCode::invalid_cutoff, "n_max must be >= 0");
    detail::require(Gamma1 >= 0.0 && K1 >= 0.0, ErrorCode::invalid_parameter, "rates must be >= 0");
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n_max + 1);
    if (K1 == 0.0) {
        p(0) = 1.0;
        return ProbVector(std::move(p));
    }
    const double c = K1 + Gamma1;
    const double norm = hyp1f1<double>(1.0, c, 2.0 * K1);
    for (int n = 0; n <= n_max; ++n) {
        const double logpre = n * std::log(K1) - (std::lgamma(c + n) - std::lgamma(c));
        p(n) = std::exp(logpre) * hyp1f1<double>(1.0 + n, c + n, K1) / norm;
    }
    return ProbVector(std::move(p));
}

// ---- hypergeometric branch ----

namespace detail {

template <class Real>
struct PnEval {
    std::vector<double> p;
    double error = 0.0;
    bool finite = true;
};

// F_k = 2F1(1+k, b+k; c+k; z) for k = 0..n. For z >= 1/2 the forward three-term
// recurrence from the hypergeometric equation is dominated by F_k and is used,
// checked against the direct series at k = n; otherwise every F_k is summed.
template <class Real>
std::vector<Real> shifted_hyp2f1(const Real& b, const Real& c, const Real& z, int n) {
    using std::abs;
    const Real one = 1;
    std::vector<Real> F(n + 1);
    auto direct = [&](int k) {
        const Real kk = k;
        return hyp2f1<Real>(one + kk, b + kk, c + kk, z);
    };
    if (z >= Real(0.5) && n >= 2) {
        F[0] = direct(0);
        F[1] = direct(1);
        for (int k = 0; k + 2 <= n; ++k) {
            const Real al = one + k, be = b + k, ga = c + k;
            F[k + 2] = (F[k] - (ga - (al + be + 1) * z) / ga * F[k + 1]) * ga * (ga + 1) /
                       (z * (one - z) * (al + 1) * (be + 1));
        }
        const Real check = direct(n);
        const Real tol = std::numeric_limits<Real>::epsilon() * Real(1000) * Real(n + 1);
        if (abs(F[n] / check - one) <= tol) return F;
    }
    for (int k = 0; k <= n; ++k) F[k] = direct(k);
    return F;
}

// Direct evaluation of P_n = C(-a)^n sum_k binom(n,k) (b)_k/(c)_k w^k 2F1(1+k, b+k; c+k; z0),
// with a running bound on the rounding error of the alternating sum.
template <class Real>
PnEval<Real> eval_pn(const GenFunParams& g, int n_max) {
    using std::abs;
    using std::sqrt;
    const Real one = 1;
    const Real K1 = g.K1, G1 = g.Gamma1, K2 = g.K2;
    const Real a = sqrt(K2);
    const Real b = (a * G1 + K1) / (2 * a * (one - a));
    const Real c = (G1 + K1) / (one - K2);
    const Real z0 = 2 * a / (one + a);
    const Real w = 2 * (a - one) / (one + a);
    const Real z1 = 4 * a / ((one + a) * (one + a));
    const Real C = (one + a) / hyp2f1<Real>(one, b, c, z1);

    const std::vector<Real> F = shifted_hyp2f1<Real>(b, c, z0, n_max);
    std::vector<Real> u(n_max + 1);
    Real poch = 1, wk = 1;
    for (int k = 0; k <= n_max; ++k) {
        const Real kk = k;
        u[k] = poch * wk * F[k];
        poch *= (b + kk) / (c + kk);
        wk *= w;
    }

    PnEval<Real> out;
    out.p.resize(n_max + 1);
    const double eps = static_cast<double>(std::numeric_limits<Real>::epsilon());
    Real an = 1;
    for (int n = 0; n <= n_max; ++n) {
        Real s = 0, sabs = 0, binom = 1;
        for (int k = 0; k <= n; ++k) {
            const Real t = binom * u[k];
            s += t;
            sabs += abs(t);
            binom = binom * (n - k) / (k + 1);
        }
        const Real pn = C * an * ((n % 2) ? -s : s);
        const double pd = static_cast<double>(pn);
        const double bound = static_cast<double>(C * an * sabs) * eps * (n + 8);
        if (!std::isfinite(pd) || !std::isfinite(bound)) out.finite = false;
        out.p[n] = pd;
        out.error = std::max(out.error, bound);
        an *= a;
    }
    return out;
}

inline constexpr double analytic_error_tol = 1e-13;

template <class Real>
bool try_level(const GenFunParams& g, int n_max, std::vector<double>& p, AnalyticInfo& info) {
    PnEval<Real> r;
    try {
        r = eval_pn<Real>(g, n_max);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::precision_failure) throw;
        return false;
    }
    if (!r.finite || !(r.error <= analytic_error_tol)) return false;
    p = r.p;
    info.digits = std::numeric_limits<Real>::digits10;
    info.error_estimate = r.error;
    return true;
}

}  // namespace detail

inline ProbVector steady_probs(const EffectiveRates& rates, int n_max, AnalyticInfo* info = nullptr) {
    detail::require(n_max >= 0, ErrorCode::invalid_cutoff, "n_max must be >= 0");
    const auto g = GenFunParams::from(rates);
    AnalyticInfo local;
    if (g.K1 == 0.0 && g.K2 == 0.0) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n_max + 1);
        p(0) = 1.0;
        local.digits = 15;
        if (info) *info = local;
        return ProbVector(std::move(p));
    }
    if (g.K2 == 0.0) {
        auto p = kummer_probs(g.Gamma1, g.K1, n_max);
        local.digits = 15;
        if (info) *info = local;
        if (p.sum() < 1.0 - 1e-9)
            throw Error(ErrorCode::truncation_inadequate,
                        "probabilities up to n_max sum to " + std::to_string(p.sum()));
        return p;
    }
    detail::require(g.c > 1.0, ErrorCode::unsupported_parameter_regime,
                    "c = " + std::to_string(g.c) + " <= 1; the bounded-solution selection does not apply");

    namespace mp = boost::multiprecision;
    std::vector<double> p;
    const bool ok = detail::try_level<double>(g, n_max, p, local) ||
                    detail::try_level<mp::cpp_bin_float_50>(g, n_max, p, local) ||
                    detail::try_level<mp::cpp_bin_float_100>(g, n_max, p, local) ||
                    detail::try_level<mp::number<mp::cpp_bin_float<200>>>(g, n_max, p, local) ||
                    detail::try_level<mp::number<mp::cpp_bin_float<400>>>(g, n_max, p, local);
    if (!ok)
        throw Error(ErrorCode::precision_failure,
                    "cancellation in the alternating sum exceeds 400-digit arithmetic");
    if (info) *info = local;
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    if (v.sum() < 1.0 - 1e-9)
        throw Error(ErrorCode::truncation_inadequate,
                    "probabilities up to n_max sum to " + std::to_string(v.sum()));
    return ProbVector(std::move(v));
}

// A(x) = C 2F1(1, b; c; z(x)) / (1 + a x), or its confluent limit when K2 = 0.
inline double genfun_value(const EffectiveRates& rates, double x, bool use_beta = false) {
    detail::require(x > -1.0 && x <= 1.0, ErrorCode::invalid_parameter, "x must lie in (-1, 1]");
    const auto g = GenFunParams::from(rates);
    if (g.K2 == 0.0) {
        const double c = g.K1 + g.Gamma1;
        if (g.K1 == 0.0) return 1.0;
        return hyp1f1<double>(1.0, c, g.K1 * (1.0 + x)) / hyp1f1<double>(1.0, c, 2.0 * g.K1);
    }
    detail::require(g.c > 1.0, ErrorCode::unsupported_parameter_regime, "c <= 1");
    const double a = g.a;
    const double z = 2.0 * a / (1.0 + a) * (1.0 + x) / (1.0 + a * x);
    const double z1 = 4.0 * a / ((1.0 + a) * (1.0 + a));
    auto f = [&](double zz) {
        return use_beta ? hyp2f1_one_via_beta(g.b, g.c, zz) : hyp2f1<double>(1.0, g.b, g.c, zz);
    };
    const double C = (1.0 + a) / f(z1);
    return C * f(z) / (1.0 + a * x);
}

// ---- quantum limit ----

// R = Gamma1~/K1~; equals gamma1/kappa1 at T = 0.
inline double ratio_R(const RateSet& rates) {
    const auto eff = effective_rates(rates);
    detail::require(eff.K1_t > 0.0, ErrorCode::undefined_ratio, "effective pump rate is zero");
    return eff.Gamma1_t / eff.K1_t;
}

inline DensityMatrix quantum_limit_rho(double R) {
    detail::require(R >= 0.0 && std::isfinite(R), ErrorCode::invalid_parameter, "R must be >= 0");
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = (2.0 + R) / (3.0 + R);
    rho(1, 1) = 1.0 / (3.0 + R);
    return DensityMatrix(std::move(rho));
}

// Wigner-peak amplitude in x units; zero below threshold.
inline double limit_amplitude(double R) {
    detail::require(R >= 0.0, ErrorCode::invalid_parameter, "R must be >= 0");
    return R <= 1.0 ? std::sqrt((1.0 - R) / 2.0) : 0.0;
}

// Decay rate of rho_{0,1} in the quantum limit.
inline double rvdp_corr_decay(double kappa1, double gamma1) {
    detail::require(gamma1 >= 0.0 && kappa1 >= gamma1, ErrorCode::invalid_parameter,
                    "need kappa1 >= gamma1 >= 0");
    return (3.0 * kappa1 + gamma1) / 2.0;
}

}  // namespace limitcycle
