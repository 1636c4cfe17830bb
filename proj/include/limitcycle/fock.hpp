// fock.hpp: truncated Fock-space operators and canonical states.
//
// Scaled units throughout: hbar = m = omega = 1, a = (x + i p)/sqrt(2).
// Basis |0>, ..., |N-1> where N is the cutoff.

#pragma once

#include "limitcycle/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

namespace limitcycle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double hermiticity_tol = 1e-10;
inline constexpr double trace_tol = 1e-10;
inline constexpr double positivity_tol = 1e-8;

// ------------------------------- FockOperator --------------------------------

class FockOperator {
public:
    explicit FockOperator(Matrix m) : m_(std::move(m)) {
        detail::require(m_.rows() == m_.cols() && m_.rows() >= 1, ErrorCode::invalid_cutoff,
                        "operator matrix must be square and non-empty");
    }

    int cutoff() const noexcept { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }

    FockOperator adjoint() const { return FockOperator(m_.adjoint()); }

    friend FockOperator operator*(const FockOperator& lhs, const FockOperator& rhs) {
        check_same_cutoff(lhs, rhs);
        return FockOperator(lhs.m_ * rhs.m_);
    }
    friend FockOperator operator+(const FockOperator& lhs, const FockOperator& rhs) {
        check_same_cutoff(lhs, rhs);
        return FockOperator(lhs.m_ + rhs.m_);
    }
    friend FockOperator operator-(const FockOperator& lhs, const FockOperator& rhs) {
        check_same_cutoff(lhs, rhs);
        return FockOperator(lhs.m_ - rhs.m_);
    }
    friend FockOperator operator*(cplx s, const FockOperator& op) { return FockOperator(s * op.m_); }

    static void check_same_cutoff(const FockOperator& a, const FockOperator& b) {
        detail::require(a.cutoff() == b.cutoff(), ErrorCode::cutoff_mismatch,
                        "operators have cutoffs " + std::to_string(a.cutoff()) + " and " +
                            std::to_string(b.cutoff()));
    }

private:
    Matrix m_;
};

namespace detail {
inline void check_cutoff(int cutoff) {
    require(cutoff >= 2, ErrorCode::invalid_cutoff,
            "cutoff must be >= 2, got " + std::to_string(cutoff));
}
}  // namespace detail

inline FockOperator identity(int cutoff) {
    detail::check_cutoff(cutoff);
    return FockOperator(Matrix::Identity(cutoff, cutoff));
}

// (a)_{n-1,n} = sqrt(n)
inline FockOperator annihilation(int cutoff) {
    detail::check_cutoff(cutoff);
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return FockOperator(std::move(a));
}

inline FockOperator creation(int cutoff) { return annihilation(cutoff).adjoint(); }

inline FockOperator number(int cutoff) {
    detail::check_cutoff(cutoff);
    Matrix n = Matrix::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
    return FockOperator(std::move(n));
}

inline FockOperator position(int cutoff) {
    const auto a = annihilation(cutoff);
    return FockOperator((a.matrix() + a.matrix().adjoint()) / std::sqrt(2.0));
}

inline FockOperator momentum(int cutoff) {
    const auto a = annihilation(cutoff);
    return FockOperator(cplx(0.0, 1.0) * (a.matrix().adjoint() - a.matrix()) / std::sqrt(2.0));
}

// -------------------------------- StateVector --------------------------------

class StateVector {
public:
    StateVector(Vector amplitudes, bool truncation_adequate = true)
        : amp_(std::move(amplitudes)), adequate_(truncation_adequate) {
        detail::require(amp_.size() >= 1, ErrorCode::invalid_cutoff, "empty state vector");
        const double norm = amp_.norm();
        detail::require(norm > 0.0 && std::isfinite(norm), ErrorCode::invalid_parameter,
                        "state vector has zero or non-finite norm");
        amp_ /= norm;
    }

    int cutoff() const noexcept { return static_cast<int>(amp_.size()); }
    const Vector& amplitudes() const noexcept { return amp_; }
    bool truncation_adequate() const noexcept { return adequate_; }

private:
    Vector amp_;
    bool adequate_;
};

enum class TruncationPolicy { warn, error };

inline StateVector fock_state(int n, int cutoff) {
    detail::check_cutoff(cutoff);
    detail::require(n >= 0 && n < cutoff, ErrorCode::invalid_parameter,
                    "Fock index outside truncated basis");
    Vector v = Vector::Zero(cutoff);
    v(n) = 1.0;
    return StateVector(std::move(v));
}

// Amplitudes alpha^n / sqrt(n!) e^{-|alpha|^2/2}, renormalized after truncation.
// The truncation is flagged inadequate when |alpha|^2 > N/4.
inline StateVector coherent_state(cplx alpha, int cutoff,
                                  TruncationPolicy policy = TruncationPolicy::warn) {
    detail::check_cutoff(cutoff);
    const bool adequate = std::norm(alpha) <= cutoff / 4.0;
    if (!adequate && policy == TruncationPolicy::error) {
        throw Error(ErrorCode::truncation_inadequate,
                    "|alpha|^2 = " + std::to_string(std::norm(alpha)) + " exceeds cutoff/4 = " +
                        std::to_string(cutoff / 4.0));
    }
    Vector v(cutoff);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < cutoff; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return StateVector(std::move(v), adequate);
}

// ------------------------------- DensityMatrix -------------------------------

struct DensityCheck {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double trace_error = 0.0;        // |tr rho - 1|
    double min_eigenvalue = 0.0;
};

inline DensityCheck inspect_density(const Matrix& rho) {
    DensityCheck c;
    c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    c.trace_error = std::abs(rho.trace() - cplx(1.0));
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

class DensityMatrix {
public:
    // Validates Hermiticity, unit trace and positivity.
    explicit DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
        detail::require(rho_.rows() == rho_.cols() && rho_.rows() >= 1, ErrorCode::invalid_cutoff,
                        "density matrix must be square");
        const auto c = inspect_density(rho_);
        detail::require(c.hermiticity_error <= hermiticity_tol, ErrorCode::validation,
                        "density matrix not Hermitian (error " + std::to_string(c.hermiticity_error) + ")");
        detail::require(c.trace_error <= trace_tol, ErrorCode::validation,
                        "density matrix trace differs from 1 by " + std::to_string(c.trace_error));
        detail::require(c.min_eigenvalue >= -positivity_tol, ErrorCode::validation,
                        "density matrix has eigenvalue " + std::to_string(c.min_eigenvalue));
    }

    static DensityMatrix from_state(const StateVector& psi) {
        return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
    }

    int cutoff() const noexcept { return static_cast<int>(rho_.rows()); }
    const Matrix& matrix() const noexcept { return rho_; }
    cplx operator()(int row, int col) const { return rho_(row, col); }

    Eigen::VectorXd diagonal() const { return rho_.diagonal().real(); }

private:
    Matrix rho_;
};

// Diagonal state with P_n proportional to (nbar/(1+nbar))^n on the truncated basis.
inline DensityMatrix thermal_state(double nbar, int cutoff) {
    detail::check_cutoff(cutoff);
    detail::require(nbar >= 0.0 && std::isfinite(nbar), ErrorCode::invalid_parameter,
                    "thermal occupation must be >= 0");
    Eigen::VectorXd p(cutoff);
    const double q = nbar / (1.0 + nbar);
    p(0) = 1.0;
    for (int n = 1; n < cutoff; ++n) p(n) = p(n - 1) * q;
    p /= p.sum();
    return DensityMatrix(p.cast<cplx>().asDiagonal().toDenseMatrix());
}

// (rho + rho^dagger)/2 followed by trace renormalization. Returns the trace drift
// |tr rho - 1| measured before the correction.
inline double hermitize_normalize(Matrix& rho) {
    const cplx tr = rho.trace();
    const double drift = std::abs(tr - cplx(1.0));
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return drift;
}

}  // namespace limitcycle
