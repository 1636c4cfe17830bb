// hypergeometric.hpp: power-series 2F1 and 1F1 for real arguments, generic in the
// floating-point type so the same code runs in double or boost::multiprecision.

#pragma once

#include "limitcycle/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace limitcycle {

inline constexpr long max_series_terms = 1000000;

namespace detail {

template <class Real>
Real series_tol() {
    if constexpr (std::is_same_v<Real, double>) return 1e-17;
    else return std::numeric_limits<Real>::epsilon();
}

inline bool nonpositive_integer(double g) { return g <= 0.0 && g == std::floor(g); }

// Sums t_0 = 1, t_{j+1} = t_j * ratio(j) until |t| < tol |sum| three times in a row
// while the terms are shrinking.
template <class Real, class Ratio>
Real sum_series(Ratio ratio, const char* name) {
    using std::abs;
    const Real tol = series_tol<Real>();
    Real sum = 1, term = 1;
    int small = 0;
    for (long j = 0; j < max_series_terms; ++j) {
        const Real next = term * ratio(j);
        const bool shrinking = abs(next) <= abs(term);
        term = next;
        sum += term;
        if (term == 0 || !(abs(sum) <= std::numeric_limits<Real>::max())) return sum;
        if (shrinking && abs(term) < tol * abs(sum)) {
            if (++small == 3) return sum;
        } else {
            small = 0;
        }
    }
    throw Error(ErrorCode::precision_failure,
                std::string(name) + " series did not converge within " + std::to_string(max_series_terms) + " terms");
}

}  // namespace detail

// ---- 2F1 ----

template <class Real>
Real hyp2f1(const Real& alpha, const Real& beta, const Real& gamma, const Real& z) {
    using std::abs;
    detail::require(abs(z) < 1, ErrorCode::invalid_parameter, "hyp2f1 requires |z| < 1");
    detail::require(!detail::nonpositive_integer(static_cast<double>(gamma)), ErrorCode::invalid_parameter,
                    "hyp2f1 gamma is a nonpositive integer");
    return detail::sum_series<Real>(
        [&](long j) {
            const Real jj = j;
            return (alpha + jj) * (beta + jj) / ((gamma + jj) * (jj + 1)) * z;
        },
        "2F1");
}

// ---- 1F1 ----

template <class Real>
Real hyp1f1(const Real& alpha, const Real& gamma, const Real& z) {
    detail::require(!detail::nonpositive_integer(static_cast<double>(gamma)), ErrorCode::invalid_parameter,
                    "hyp1f1 gamma is a nonpositive integer");
    return detail::sum_series<Real>(
        [&](long j) {
            const Real jj = j;
            return (alpha + jj) / ((gamma + jj) * (jj + 1)) * z;
        },
        "1F1");
}

// ---- incomplete-beta representation ----

// B_z(p, q) by tanh-sinh quadrature, 0 <= z < 1, p, q > 0 not required for q.
inline double incomplete_beta(double p, double q, double z) {
    detail::require(z >= 0.0 && z < 1.0 && p > 0.0, ErrorCode::invalid_parameter,
                    "incomplete beta needs 0 <= z < 1 and p > 0");
    if (z == 0.0) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double t) { return std::pow(t, p - 1.0) * std::pow(1.0 - t, q - 1.0); };
    return integrator.integrate(f, 0.0, z);
}

// 2F1(1, b; c; z) = (c-1) z^{1-c} (1-z)^{c-1-b} B_z(c-1, b-c+1), valid for c > 1, 0 < z < 1.
inline double hyp2f1_one_via_beta(double b, double c, double z) {
    detail::require(c > 1.0 && z > 0.0 && z < 1.0, ErrorCode::invalid_parameter,
                    "beta representation needs c > 1 and 0 < z < 1");
    return (c - 1.0) * std::pow(z, 1.0 - c) * std::pow(1.0 - z, c - 1.0 - b) *
           incomplete_beta(c - 1.0, b - c + 1.0, z);
}

}  // namespace limitcycle
