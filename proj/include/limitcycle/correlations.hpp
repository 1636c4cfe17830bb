// correlations.hpp: steady-state two-time correlations by quantum regression and
// their two-sided spectra.

#pragma once

#include "limitcycle/error.hpp"
#include "limitcycle/fock.hpp"
#include "limitcycle/liouville.hpp"
#include "limitcycle/models.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace limitcycle {

struct CorrelationSeries {
    std::vector<double> times;
    std::vector<cplx> values;
    std::string label_a, label_b;
};

struct CorrelationOptions {
    PropagateOptions propagation{Method::automatic, 0.01, 1024};
};

// <A(t) B(0)> = Tr[A Lambda(t)], Lambda(0) = B rho_ss, Lambda evolved without Hermitization.
inline CorrelationSeries two_time_corr(const LindbladModel& model, const DensityMatrix& rho_ss,
                                       const FockOperator& A, const FockOperator& B,
                                       const std::vector<double>& times, const CorrelationOptions& opt = {},
                                       std::string label_a = "A", std::string label_b = "B") {
    FockOperator::check_same_cutoff(A, B);
    detail::require(rho_ss.cutoff() == model.cutoff() && A.cutoff() == model.cutoff(), ErrorCode::cutoff_mismatch,
                    "operators, state and model must share one cutoff");
    const auto L = liouvillian(model);
    // Tr(A X) = sum_ij A_ji X_ij = vec(A^T) . vec(X)
    const Vector at = vec(A.matrix().transpose());
    CorrelationSeries out{{}, {}, std::move(label_a), std::move(label_b)};
    out.times.reserve(times.size());
    out.values.reserve(times.size());
    propagate(L, vec(B.matrix() * rho_ss.matrix()), times, opt.propagation,
              [&](std::size_t, double t, Vector& v) {
                  if (!v.allFinite())
                      throw Error(ErrorCode::integration_failure, "correlation propagation produced non-finite values");
                  out.times.push_back(t);
                  out.values.push_back(at.transpose() * v);
              });
    return out;
}

inline CorrelationSeries two_time_corr(const LindbladModel& model, const FockOperator& A, const FockOperator& B,
                                       const std::vector<double>& times, const CorrelationOptions& opt = {}) {
    return two_time_corr(model, steady_state(model), A, B, times, opt);
}

struct CorrelatorBundle {
    DensityMatrix rho_ss;
    CorrelationSeries xx;    // <x(t) x(0)>
    CorrelationSeries x2x2;  // <x^2(t) x^2(0)>
    CorrelationSeries a2a2;  // <a^dag^2(t) a^2(0)>
};

inline CorrelatorBundle preset_correlators(const LindbladModel& model, const std::vector<double>& times,
                                           const CorrelationOptions& opt = {}) {
    const int N = model.cutoff();
    auto rho = steady_state(model);
    const auto x = position(N);
    const auto x2 = x * x;
    const auto a = annihilation(N);
    const auto a2 = a * a;
    auto xx = two_time_corr(model, rho, x, x, times, opt, "x", "x");
    auto x2x2 = two_time_corr(model, rho, x2, x2, times, opt, "x^2", "x^2");
    auto aa = two_time_corr(model, rho, a2.adjoint(), a2, times, opt, "adag^2", "a^2");
    return CorrelatorBundle{std::move(rho), std::move(xx), std::move(x2x2), std::move(aa)};
}

// ---------------------------------- spectra ----------------------------------

enum class Window { none, hann };

struct Spectrum {
    std::vector<double> freqs;   // ascending, two-sided
    std::vector<double> values;  // S(omega) = Re int C(t) e^{i omega t} dt
    bool truncation_warning = false;

    double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

namespace detail {

inline double uniform_step(const std::vector<double>& t) {
    require(t.size() >= 2, ErrorCode::invalid_parameter, "series needs at least two samples");
    const double dt = t[1] - t[0];
    for (std::size_t k = 1; k < t.size(); ++k)
        require(std::abs((t[k] - t[k - 1]) - dt) <= 1e-9 * std::max(1.0, std::abs(t[k])),
                ErrorCode::invalid_parameter, "spectrum needs uniformly sampled times");
    require(std::abs(t[0]) < 1e-12, ErrorCode::invalid_parameter, "series must start at t = 0");
    return dt;
}

}  // namespace detail

// Two-sided sequence over t in [-(M-1)dt, (M-1)dt] built by C(-t) = conj(C(t)), windowed.
inline std::vector<cplx> reflected_series(const CorrelationSeries& s, Window window) {
    const std::size_t M = s.values.size();
    const std::size_t L = 2 * M - 1;
    std::vector<cplx> c(L);
    for (std::size_t j = 0; j < M; ++j) {
        double w = 1.0;
        if (window == Window::hann) w = 0.5 * (1.0 + std::cos(std::numbers::pi * double(j) / double(M)));
        c[j] = w * s.values[j];
        if (j > 0) c[L - j] = std::conj(c[j]);
    }
    return c;
}

inline Spectrum spectrum(const CorrelationSeries& s, Window window = Window::hann) {
    const double dt = detail::uniform_step(s.times);
    const std::size_t M = s.values.size();
    const std::size_t L = 2 * M - 1;
    const auto c = reflected_series(s, window);
    // sum_n c_n e^{+i omega_k t_n} = L * ifft(c)_k
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, c);
    Spectrum sp;
    sp.freqs.resize(L);
    sp.values.resize(L);
    const double dw = 2.0 * std::numbers::pi / (L * dt);
    const std::size_t half = (L - 1) / 2;  // L is odd
    for (std::size_t i = 0; i < L; ++i) {
        const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(half);
        const std::size_t src = static_cast<std::size_t>((k + static_cast<std::ptrdiff_t>(L)) % static_cast<std::ptrdiff_t>(L));
        sp.freqs[i] = k * dw;
        sp.values[i] = (out[src] * double(L)).real() * dt;
    }
    sp.truncation_warning = std::abs(s.values.back()) > 0.01 * std::abs(s.values.front());
    return sp;
}

// Local maxima sorted by height, largest first.
inline std::vector<std::size_t> spectral_peaks(const Spectrum& sp, double min_rel_height = 1e-3) {
    std::vector<std::size_t> idx;
    if (sp.values.empty()) return idx;
    const double top = *std::max_element(sp.values.begin(), sp.values.end());
    for (std::size_t i = 1; i + 1 < sp.values.size(); ++i)
        if (sp.values[i] >= sp.values[i - 1] && sp.values[i] > sp.values[i + 1] &&
            sp.values[i] >= min_rel_height * top)
            idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return sp.values[a] > sp.values[b]; });
    return idx;
}

// ---------------------------------- decay fit --------------------------------

struct DecayFit {
    double rate = 0.0;
    std::size_t points = 0;
    bool envelope = true;  // false when the fit fell back to every sample in the window
};

// Least squares on log|C| against t over the window |C| in [1e-3, 1e-1] |C(0)|,
// using the local maxima of |C| so oscillations do not bias the slope.
inline DecayFit fit_decay_rate(const CorrelationSeries& s, double lo = 1e-3, double hi = 1e-1) {
    const std::size_t M = s.values.size();
    detail::require(M >= 3, ErrorCode::invalid_parameter, "series too short to fit");
    const double c0 = std::abs(s.values.front());
    detail::require(c0 > 0.0, ErrorCode::not_applicable, "C(0) = 0");
    std::vector<double> mag(M);
    for (std::size_t i = 0; i < M; ++i) mag[i] = std::abs(s.values[i]);
    auto in_window = [&](std::size_t i) { return mag[i] >= lo * c0 && mag[i] <= hi * c0; };

    std::vector<std::size_t> use;
    for (std::size_t i = 1; i + 1 < M; ++i)
        if (in_window(i) && mag[i] >= mag[i - 1] && mag[i] >= mag[i + 1]) use.push_back(i);
    DecayFit fit;
    if (use.size() < 2) {
        use.clear();
        for (std::size_t i = 0; i < M; ++i)
            if (in_window(i)) use.push_back(i);
        fit.envelope = false;
    }
    detail::require(use.size() >= 2, ErrorCode::not_applicable, "correlation never enters the fit window");
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (auto i : use) {
        const double t = s.times[i], y = std::log(mag[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double n = static_cast<double>(use.size());
    const double den = n * stt - st * st;
    detail::require(den > 0.0, ErrorCode::not_applicable, "degenerate fit window");
    fit.rate = -(n * sty - st * sy) / den;
    fit.points = use.size();
    return fit;
}

}  // namespace limitcycle
