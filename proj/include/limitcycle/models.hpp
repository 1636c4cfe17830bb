// models.hpp: Lindblad models of the three quantum limit-cycle oscillators,
// thermal effective rates, and the physical-to-scaled parameter map.

#pragma once

#include "limitcycle/error.hpp"
#include "limitcycle/fock.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace limitcycle {

// Dimensionless rates. Temperature is in units of hbar*omega/k_B, detunings in units of omega.
struct RateSet {
    double kappa1 = 0.0;       // single-phonon pump
    double gamma1 = 0.0;       // linear damping
    double gamma2 = 0.0;       // two-phonon damping
    double kappa2 = 0.0;       // two-phonon pump
    double temperature = 0.0;
    double delta1 = 0.1;       // pump detuning
    double delta2 = 0.1;       // two-phonon pump detuning

    double epsilon() const noexcept { return kappa1 - gamma1; }

    // A_c = sqrt(epsilon/gamma2); NaN when undefined.
    double amplitude_scale() const noexcept {
        if (epsilon() <= 0.0 || gamma2 <= 0.0) return std::nan("");
        return std::sqrt(epsilon() / gamma2);
    }

    void validate() const {
        auto nonneg = [](double v, const char* name) {
            detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::invalid_parameter,
                            std::string(name) + " must be finite and >= 0");
        };
        nonneg(kappa1, "kappa1");
        nonneg(gamma1, "gamma1");
        nonneg(gamma2, "gamma2");
        nonneg(kappa2, "kappa2");
        nonneg(temperature, "temperature");
        detail::require(std::isfinite(delta1) && delta1 > 0.0, ErrorCode::invalid_parameter,
                        "delta1 must be > 0");
        detail::require(std::isfinite(delta2) && delta2 > 0.0, ErrorCode::invalid_parameter,
                        "delta2 must be > 0");
    }

    // kappa1 = eps/(1-r), gamma1 = r*kappa1, gamma2 = eps/A_c^2.
    static RateSet from_amplitude(double epsilon, double r, double amplitude_scale) {
        detail::require(epsilon > 0.0 && r >= 0.0 && r < 1.0 && amplitude_scale > 0.0,
                        ErrorCode::invalid_parameter,
                        "need epsilon > 0, 0 <= r < 1 and A_c > 0");
        RateSet rs;
        rs.kappa1 = epsilon / (1.0 - r);
        rs.gamma1 = r * rs.kappa1;
        rs.gamma2 = epsilon / (amplitude_scale * amplitude_scale);
        return rs;
    }
};

struct EffectiveRates {
    double Gamma1_t = 0.0;  // effective single-phonon loss
    double K1_t = 0.0;      // effective single-phonon gain
    double Gamma2_t = 0.0;  // effective two-phonon loss
    double K2_t = 0.0;      // effective two-phonon gain
};

// 1/(exp(omega/T) - 1), zero at T = 0.
inline double bose_einstein(double omega, double temperature) {
    detail::require(omega > 0.0 && std::isfinite(omega), ErrorCode::invalid_frequency,
                    "frequency must be > 0");
    detail::require(temperature >= 0.0, ErrorCode::invalid_parameter, "temperature must be >= 0");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

inline EffectiveRates effective_rates(const RateSet& rates) {
    rates.validate();
    const double T = rates.temperature;
    const double n1 = bose_einstein(1.0, T);
    const double n2 = bose_einstein(2.0, T);
    const double nd1 = bose_einstein(rates.delta1, T);
    const double nd2 = bose_einstein(rates.delta2, T);
    EffectiveRates eff;
    eff.Gamma1_t = (1.0 + n1) * rates.gamma1 + nd1 * rates.kappa1;
    eff.K1_t = (1.0 + nd1) * rates.kappa1 + n1 * rates.gamma1;
    eff.Gamma2_t = (1.0 + n2) * rates.gamma2 + nd2 * rates.kappa2;
    eff.K2_t = (1.0 + nd2) * rates.kappa2 + n2 * rates.gamma2;
    return eff;
}

// ------------------------------ LindbladModel --------------------------------

enum class ModelKind { rvdp, vdp, rayleigh };

inline constexpr std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::rvdp: return "rvdp";
        case ModelKind::vdp: return "vdp";
        case ModelKind::rayleigh: return "rayleigh";
    }
    return "unknown";
}

struct Channel {
    std::string label;
    double rate;
    FockOperator op;
};

// Channel order is pump, linear damping, nonlinear damping(s), nonlinear pump.
struct LindbladModel {
    ModelKind kind;
    FockOperator hamiltonian;
    std::vector<Channel> channels;

    int cutoff() const noexcept { return hamiltonian.cutoff(); }

    bool has_damping() const noexcept {
        for (const auto& ch : channels)
            if (ch.rate > 0.0 && ch.label != "pump" && ch.label != "nonlinear-pump") return true;
        return false;
    }
};

inline LindbladModel build_rvdp(const RateSet& rates, int cutoff) {
    const auto eff = effective_rates(rates);
    const auto a = annihilation(cutoff);
    const auto ad = a.adjoint();
    return LindbladModel{ModelKind::rvdp,
                         number(cutoff),
                         {{"pump", eff.K1_t, ad},
                          {"linear-damping", eff.Gamma1_t, a},
                          {"nonlinear-damping", eff.Gamma2_t, a * a},
                          {"nonlinear-pump", eff.K2_t, ad * ad}}};
}

namespace detail {
inline void require_zero_temperature(const RateSet& rates, const char* model) {
    rates.validate();
    require(rates.temperature == 0.0 && rates.kappa2 == 0.0, ErrorCode::unsupported_model_regime,
            std::string(model) + " model is defined only at T = 0 with kappa2 = 0");
}
}  // namespace detail

inline LindbladModel build_vdp(const RateSet& rates, int cutoff) {
    detail::require_zero_temperature(rates, "vdP");
    const auto a = annihilation(cutoff);
    return LindbladModel{ModelKind::vdp,
                         number(cutoff),
                         {{"pump", rates.kappa1, a.adjoint()},
                          {"linear-damping", rates.gamma1, a},
                          {"nonlinear-damping", rates.gamma2 / 2.0, position(cutoff) * a}}};
}

inline LindbladModel build_rayleigh(const RateSet& rates, int cutoff) {
    detail::require_zero_temperature(rates, "Rayleigh");
    const auto a = annihilation(cutoff);
    return LindbladModel{ModelKind::rayleigh,
                         number(cutoff),
                         {{"pump", rates.kappa1, a.adjoint()},
                          {"linear-damping", rates.gamma1, a},
                          {"nonlinear-damping", rates.gamma2 / 2.0, position(cutoff) * a},
                          {"nonlinear-damping-p", rates.gamma2, momentum(cutoff) * a}}};
}

inline LindbladModel build_model(ModelKind kind, const RateSet& rates, int cutoff) {
    switch (kind) {
        case ModelKind::rvdp: return build_rvdp(rates, cutoff);
        case ModelKind::vdp: return build_vdp(rates, cutoff);
        case ModelKind::rayleigh: return build_rayleigh(rates, cutoff);
    }
    throw Error(ErrorCode::invalid_parameter, "unknown model kind");
}

// C rho C^dagger - (C^dagger C rho + rho C^dagger C)/2
inline Matrix dissipator(const FockOperator& c, const Matrix& rho) {
    detail::require(c.cutoff() == rho.rows() && rho.rows() == rho.cols(), ErrorCode::cutoff_mismatch,
                    "dissipator operator and state have different cutoffs");
    const Matrix& C = c.matrix();
    const Matrix CdC = C.adjoint() * C;
    return C * rho * C.adjoint() - 0.5 * (CdC * rho + rho * CdC);
}

inline Matrix dissipator(const FockOperator& c, const DensityMatrix& rho) {
    return dissipator(c, rho.matrix());
}

// Right-hand side of the master equation, evaluated directly on the matrix.
inline Matrix master_rhs(const LindbladModel& model, const Matrix& rho) {
    detail::require(model.cutoff() == rho.rows(), ErrorCode::cutoff_mismatch,
                    "model and state have different cutoffs");
    const Matrix& H = model.hamiltonian.matrix();
    Matrix out = cplx(0.0, -1.0) * (H * rho - rho * H);
    for (const auto& ch : model.channels)
        if (ch.rate != 0.0) out += ch.rate * dissipator(ch.op, rho);
    return out;
}

// ------------------------------ Physical scaling ------------------------------

struct ScalingParams {
    double mass = 1.0;
    double frequency = 1.0;
    double hbar = 1.0;
    double kappa1 = 0.0;  // physical pump coefficient
    double gamma1 = 0.0;  // physical linear damping coefficient
    double eta = 0.0;     // physical vdP damping coefficient
    double zeta = 0.0;    // physical Rayleigh damping coefficient
};

struct ScaledRates {
    double kappa1 = 0.0;
    double gamma1 = 0.0;
    double gamma2_eta = 0.0;   // gamma2 * eta
    double gamma2_zeta = 0.0;  // gamma2 * zeta

    // Overall gamma2 with the larger of (eta, zeta) set to one.
    double gamma2() const noexcept { return std::max(gamma2_eta, gamma2_zeta); }
    double eta() const noexcept { return gamma2() > 0.0 ? gamma2_eta / gamma2() : 0.0; }
    double zeta() const noexcept { return gamma2() > 0.0 ? gamma2_zeta / gamma2() : 0.0; }
};

inline ScaledRates scale_physical(const ScalingParams& p) {
    detail::require(p.mass > 0.0 && p.frequency > 0.0, ErrorCode::invalid_parameter,
                    "mass and frequency must be > 0");
    detail::require(p.hbar > 0.0, ErrorCode::invalid_parameter, "hbar must be > 0");
    const double mw = p.mass * p.frequency;
    return ScaledRates{p.kappa1 / mw, p.gamma1 / mw, p.hbar * p.eta / (mw * mw),
                       p.hbar * p.zeta / (p.mass * p.mass)};
}

// Inverse of scale_physical for given mass, frequency and hbar.
inline ScalingParams unscale(const ScaledRates& s, double mass, double frequency, double hbar = 1.0) {
    detail::require(mass > 0.0 && frequency > 0.0 && hbar > 0.0, ErrorCode::invalid_parameter,
                    "mass, frequency and hbar must be > 0");
    const double mw = mass * frequency;
    return ScalingParams{mass,          frequency,     hbar, s.kappa1 * mw, s.gamma1 * mw,
                         s.gamma2_eta * mw * mw / hbar, s.gamma2_zeta * mass * mass / hbar};
}

}  // namespace limitcycle
