// liouville.hpp: vectorized Liouvillian, time evolution, steady states and the
// transformed (n, m) representation of density matrices.
//
// Vectorization is column stacking: vec(rho)[i + N*j] = rho(i, j), so that
// vec(A X B) = (B^T kron A) vec(X) and
//   L = -i(I kron H - H^T kron I) + sum_k rate_k (conj(C) kron C - I kron C^dag C / 2 - (C^dag C)^T kron I / 2).

#pragma once

#include "limitcycle/banded.hpp"
#include "limitcycle/error.hpp"
#include "limitcycle/fock.hpp"
#include "limitcycle/models.hpp"
#include "limitcycle/probs.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace limitcycle {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr int max_liouville_cutoff = 320;

// ------------------------------- vectorization --------------------------------

inline Vector vec(const Matrix& rho) { return Eigen::Map<const Vector>(rho.data(), rho.size()); }

inline Matrix unvec(const Vector& v, int cutoff) {
    detail::require(v.size() == static_cast<Eigen::Index>(cutoff) * cutoff, ErrorCode::cutoff_mismatch,
                    "vector length does not match cutoff^2");
    return Eigen::Map<const Matrix>(v.data(), cutoff, cutoff);
}

// ------------------------------- Liouvillian ---------------------------------

struct Liouvillian {
    int cutoff = 0;
    SparseMatrix matrix;

    Vector apply(const Vector& v) const { return matrix * v; }
};

namespace detail {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

// Appends s * (A kron B) restricted to nonzero entries of the dense factors.
inline void add_kron(Triplets& out, const Matrix& A, const Matrix& B, cplx s) {
    const int N = static_cast<int>(A.rows());
    std::vector<std::pair<int, int>> nzA, nzB;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (A(i, j) != cplx(0.0)) nzA.emplace_back(i, j);
            if (B(i, j) != cplx(0.0)) nzB.emplace_back(i, j);
        }
    for (auto [ia, ja] : nzA)
        for (auto [ib, jb] : nzB)
            out.emplace_back(ia * N + ib, ja * N + jb, s * A(ia, ja) * B(ib, jb));
}

}  // namespace detail

inline Liouvillian liouvillian(const LindbladModel& model) {
    const int N = model.cutoff();
    if (N > max_liouville_cutoff)
        throw Error(ErrorCode::resource_limit, "cutoff " + std::to_string(N) +
                                                   " exceeds the Liouvillian limit " +
                                                   std::to_string(max_liouville_cutoff));
    const Matrix I = Matrix::Identity(N, N);
    const Matrix& H = model.hamiltonian.matrix();
    detail::Triplets t;
    detail::add_kron(t, I, H, cplx(0.0, -1.0));
    detail::add_kron(t, H.transpose(), I, cplx(0.0, 1.0));
    for (const auto& ch : model.channels) {
        detail::require(ch.rate >= 0.0, ErrorCode::invalid_parameter, "negative channel rate");
        FockOperator::check_same_cutoff(model.hamiltonian, ch.op);
        if (ch.rate == 0.0) continue;
        const Matrix& C = ch.op.matrix();
        const Matrix CdC = C.adjoint() * C;
        detail::add_kron(t, C.conjugate(), C, ch.rate);
        detail::add_kron(t, I, CdC, -0.5 * ch.rate);
        detail::add_kron(t, CdC.transpose(), I, -0.5 * ch.rate);
    }
    Liouvillian L{N, SparseMatrix(N * N, N * N)};
    L.matrix.setFromTriplets(t.begin(), t.end());
    L.matrix.prune(cplx(0.0));
    L.matrix.makeCompressed();
    return L;
}

// Off-diagonality degree of vec index k: m = j - i for rho(i, j).
inline int offdiag_degree(Eigen::Index k, int cutoff) {
    return static_cast<int>(k / cutoff) - static_cast<int>(k % cutoff);
}

// Distinct (m_row, m_col) pairs with a nonzero Liouvillian entry.
inline std::set<std::pair<int, int>> block_couplings(const Liouvillian& L) {
    std::set<std::pair<int, int>> out;
    for (int c = 0; c < L.matrix.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(L.matrix, c); it; ++it)
            out.emplace(offdiag_degree(it.row(), L.cutoff), offdiag_degree(it.col(), L.cutoff));
    return out;
}

// Connected components of the sparsity graph; each component evolves independently.
inline std::vector<std::vector<int>> coupled_components(const Liouvillian& L) {
    const int D = static_cast<int>(L.matrix.rows());
    std::vector<int> parent(D);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int c = 0; c < D; ++c)
        for (SparseMatrix::InnerIterator it(L.matrix, c); it; ++it) {
            const int a = find(static_cast<int>(it.row())), b = find(c);
            if (a != b) parent[a] = b;
        }
    std::vector<int> label(D, -1);
    std::vector<std::vector<int>> comps;
    for (int k = 0; k < D; ++k) {
        const int r = find(k);
        if (label[r] < 0) {
            label[r] = static_cast<int>(comps.size());
            comps.emplace_back();
        }
        comps[label[r]].push_back(k);
    }
    return comps;
}

// -------------------------------- propagation --------------------------------

enum class Method { rk4, exponential, automatic };

struct PropagateOptions {
    Method method = Method::rk4;
    double dt = 0.01;                 // RK4 step upper bound
    int max_block = 1024;             // largest component for the exponential method
};

// Called at every output time; the callback may modify the vector in place.
using OutputCallback = std::function<void(std::size_t index, double t, Vector& v)>;

namespace detail {

inline void check_times(const std::vector<double>& times) {
    require(!times.empty(), ErrorCode::invalid_parameter, "no output times");
    require(times.front() == 0.0, ErrorCode::invalid_parameter, "output times must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        require(times[k] > times[k - 1], ErrorCode::invalid_parameter,
                "output times must be strictly increasing");
}

inline void rk4_advance(const SparseMatrix& L, Vector& v, double span, double dt_max) {
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-9)));
    const double h = span / steps;
    Vector k1, k2, k3, k4;
    for (int s = 0; s < steps; ++s) {
        k1 = L * v;
        k2 = L * (v + 0.5 * h * k1);
        k3 = L * (v + 0.5 * h * k2);
        k4 = L * (v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

// exp(L dt) restricted to each coupled component.
class BlockPropagator {
public:
    BlockPropagator(const Liouvillian& L, int max_block) : comps_(coupled_components(L)) {
        for (const auto& c : comps_)
            if (static_cast<int>(c.size()) > max_block)
                throw Error(ErrorCode::resource_limit,
                            "coupled block of size " + std::to_string(c.size()) +
                                " exceeds the exponential-propagator limit " + std::to_string(max_block));
        blocks_.reserve(comps_.size());
        std::vector<int> pos(L.matrix.rows(), -1), owner(L.matrix.rows(), -1);
        for (std::size_t b = 0; b < comps_.size(); ++b)
            for (std::size_t k = 0; k < comps_[b].size(); ++k) {
                pos[comps_[b][k]] = static_cast<int>(k);
                owner[comps_[b][k]] = static_cast<int>(b);
            }
        for (const auto& c : comps_) blocks_.push_back(Matrix::Zero(c.size(), c.size()));
        for (int col = 0; col < L.matrix.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(L.matrix, col); it; ++it)
                blocks_[owner[col]](pos[it.row()], pos[col]) = it.value();
    }

    void set_step(double dt) {
        if (std::abs(dt - dt_) <= 1e-9 * std::abs(dt)) return;  // rounding in uniform time axes
        dt_ = dt;
        exps_.clear();
        exps_.reserve(blocks_.size());
        for (const auto& B : blocks_) exps_.push_back((B * cplx(dt)).exp());
    }

    void apply(Vector& v) const {
        for (std::size_t b = 0; b < comps_.size(); ++b) {
            const auto& c = comps_[b];
            Vector x(c.size());
            for (std::size_t k = 0; k < c.size(); ++k) x(k) = v(c[k]);
            x = exps_[b] * x;
            for (std::size_t k = 0; k < c.size(); ++k) v(c[k]) = x(k);
        }
    }

private:
    std::vector<std::vector<int>> comps_;
    std::vector<Matrix> blocks_;
    std::vector<Matrix> exps_;
    double dt_ = -1.0;
};

}  // namespace detail

// Linear propagation of v under dv/dt = L v, reporting each output time.
inline void propagate(const Liouvillian& L, Vector v, const std::vector<double>& times,
                      const PropagateOptions& opt, const OutputCallback& on_output) {
    detail::check_times(times);
    detail::require(v.size() == L.matrix.rows(), ErrorCode::cutoff_mismatch,
                    "state size does not match Liouvillian");
    detail::require(opt.dt > 0.0, ErrorCode::invalid_parameter, "step must be > 0");
    Method method = opt.method;
    if (method == Method::automatic) {
        method = Method::rk4;
        std::size_t largest = 0;
        for (const auto& c : coupled_components(L)) largest = std::max(largest, c.size());
        if (static_cast<int>(largest) <= opt.max_block) method = Method::exponential;
    }
    if (method == Method::exponential) {
        detail::BlockPropagator prop(L, opt.max_block);
        on_output(0, times[0], v);
        for (std::size_t k = 1; k < times.size(); ++k) {
            prop.set_step(times[k] - times[k - 1]);
            prop.apply(v);
            on_output(k, times[k], v);
        }
        return;
    }
    on_output(0, times[0], v);
    for (std::size_t k = 1; k < times.size(); ++k) {
        detail::rk4_advance(L.matrix, v, times[k] - times[k - 1], opt.dt);
        on_output(k, times[k], v);
    }
}

// ---------------------------------- evolve -----------------------------------

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<double> trace_drift;  // |tr rho - 1| before each correction
};

struct EvolveOptions {
    PropagateOptions propagation;
    double max_drift_rate = 1e-6;  // per unit time
    bool store_states = true;
    std::function<void(double, const DensityMatrix&)> observer;
};

inline Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0,
                         const std::vector<double>& times, const EvolveOptions& opt = {}) {
    detail::require(rho0.cutoff() == model.cutoff(), ErrorCode::cutoff_mismatch,
                    "initial state and model have different cutoffs");
    const auto L = liouvillian(model);
    const int N = model.cutoff();
    Trajectory traj;
    propagate(L, vec(rho0.matrix()), times, opt.propagation, [&](std::size_t k, double t, Vector& v) {
        Matrix rho = unvec(v, N);
        const double drift = hermitize_normalize(rho);
        if (k > 0) {
            const double span = times[k] - times[k - 1];
            if (!(drift <= opt.max_drift_rate * span))
                throw Error(ErrorCode::integration_failure,
                            "trace drift " + std::to_string(drift) + " over [" +
                                std::to_string(times[k - 1]) + ", " + std::to_string(t) +
                                "] exceeds the per-unit-time bound");
        }
        v = vec(rho);
        const double min_ev = inspect_density(rho).min_eigenvalue;
        if (min_ev < -positivity_tol)
            throw Error(ErrorCode::integration_failure,
                        "state lost positivity (eigenvalue " + std::to_string(min_ev) + ") at t = " +
                            std::to_string(t) + "; reduce dt or use the exponential method");
        DensityMatrix state(std::move(rho));
        if (opt.observer) opt.observer(t, state);
        traj.times.push_back(t);
        traj.trace_drift.push_back(drift);
        if (opt.store_states) traj.states.push_back(std::move(state));
    });
    return traj;
}

// -------------------------------- steady state --------------------------------

struct SteadyStateInfo {
    double residual = 0.0;  // max |L vec(rho)| before Hermitization
    double scale = 0.0;     // max |L_ij|
};

inline DensityMatrix steady_state(const LindbladModel& model, SteadyStateInfo* info = nullptr) {
    detail::require(model.has_damping(), ErrorCode::degenerate_steady_state,
                    "model has no damping channel; steady state is not unique");
    const auto L = liouvillian(model);
    const int N = model.cutoff();
    const int D = N * N;

    double scale = 0.0;
    detail::Triplets t;
    t.reserve(L.matrix.nonZeros() + N);
    for (int c = 0; c < L.matrix.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(L.matrix, c); it; ++it) {
            scale = std::max(scale, std::abs(it.value()));
            if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), c, it.value());
        }
    for (int i = 0; i < N; ++i) t.emplace_back(0, i + N * i, cplx(1.0));
    SparseMatrix A(D, D);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();

    if (D <= 400) {
        Eigen::JacobiSVD<Matrix> svd{Matrix(L.matrix)};
        const auto& s = svd.singularValues();
        const double thr = 1e-10 * std::max(1.0, s(0));
        if (s(D - 2) < thr)
            throw Error(ErrorCode::degenerate_steady_state,
                        "Liouvillian kernel has dimension > 1 (second smallest singular value " +
                            std::to_string(s(D - 2)) + ")");
    }

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorCode::degenerate_steady_state, "bordered Liouvillian is singular: " + lu.lastErrorMessage());
    Vector rhs = Vector::Zero(D);
    rhs(0) = 1.0;
    Vector x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorCode::degenerate_steady_state, "bordered solve failed");

    const double residual = (L.matrix * x).cwiseAbs().maxCoeff();
    if (info) *info = {residual, scale};
    if (!(residual < 1e-9 * std::max(1.0, scale)))
        throw Error(ErrorCode::degenerate_steady_state,
                    "steady-state residual " + std::to_string(residual) + " too large");
    Matrix rho = unvec(x, N);
    hermitize_normalize(rho);
    return DensityMatrix(std::move(rho));
}

// Diagonal rate equations of the RvdP model on the truncated basis, solved as a
// pentadiagonal system. Loss rates at the top of the basis follow the truncated
// operators so the result matches the full Liouvillian steady state exactly.
inline ProbVector rvdp_diag_steady(const EffectiveRates& r, int cutoff) {
    detail::check_cutoff(cutoff);
    detail::require(r.Gamma2_t > 0.0, ErrorCode::invalid_parameter, "nonlinear damping must be > 0");
    const int N = cutoff;
    auto fill = [&](BandedMatrix& M) {
        for (int n = 0; n < N; ++n) {
            const double dn = n;
            double loss = r.Gamma1_t * dn + r.Gamma2_t * dn * (dn - 1.0);
            if (n + 1 < N) loss += r.K1_t * (dn + 1.0);
            if (n + 2 < N) loss += r.K2_t * (dn + 1.0) * (dn + 2.0);
            M.at(n, n) = -loss;
            if (n >= 1) M.at(n, n - 1) = r.K1_t * dn;
            if (n >= 2) M.at(n, n - 2) = r.K2_t * dn * (dn - 1.0);
            if (n + 1 < N) M.at(n, n + 1) = r.Gamma1_t * (dn + 1.0);
            if (n + 2 < N) M.at(n, n + 2) = r.Gamma2_t * (dn + 1.0) * (dn + 2.0);
        }
    };
    // Pin P_j = 1, solve, renormalize; the second pass pins the most probable level.
    auto solve_pinned = [&](int j) {
        BandedMatrix M(N, 2, 2);
        fill(M);
        M.zero_row(j);
        M.at(j, j) = 1.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
        b(j) = 1.0;
        Eigen::VectorXd p = M.solve(std::move(b));
        for (int n = 0; n < N; ++n) p(n) = std::max(p(n), 0.0);
        const double s = p.sum();
        if (!(s > 0.0) || !std::isfinite(s))
            throw Error(ErrorCode::degenerate_steady_state, "banded steady state not normalizable");
        return Eigen::VectorXd(p / s);
    };
    Eigen::VectorXd p = solve_pinned(0);
    Eigen::Index jmax;
    p.maxCoeff(&jmax);
    if (jmax != 0) p = solve_pinned(static_cast<int>(jmax));
    return ProbVector(std::move(p));
}

// Smallest cutoff on a x1.25 ladder whose banded steady state has P_{N-1} < tol.
inline int auto_cutoff(const EffectiveRates& r, int start = 16, double tol = tail_tol,
                       int limit = max_liouville_cutoff) {
    int N = std::max(start, 2);
    while (true) {
        if (rvdp_diag_steady(r, N).tail() < tol) return N;
        if (N >= limit)
            throw Error(ErrorCode::resource_limit,
                        "no cutoff up to " + std::to_string(limit) + " reaches the tail tolerance");
        N = std::min(limit, std::max(N + 1, static_cast<int>(N * 1.25)));
    }
}

// --------------------------------- expectation --------------------------------

inline cplx expectation(const Matrix& rho, const FockOperator& op) {
    detail::require(rho.rows() == op.cutoff(), ErrorCode::cutoff_mismatch,
                    "state and operator have different cutoffs");
    return (rho * op.matrix()).trace();
}

inline cplx expectation(const DensityMatrix& rho, const FockOperator& op) {
    return expectation(rho.matrix(), op);
}

// ------------------------------ TransformedMatrix -----------------------------

// rho~_{n,m} = e^{imt} sqrt((n+m)!/n!) rho_{n,n+m}, for 0 <= n, n+m < N.
class TransformedMatrix {
public:
    TransformedMatrix(int cutoff, double t) : N_(cutoff), t_(t), e_(Matrix::Zero(cutoff, 2 * cutoff - 1)) {}

    int cutoff() const noexcept { return N_; }
    double time() const noexcept { return t_; }
    bool contains(int n, int m) const noexcept { return n >= 0 && n < N_ && n + m >= 0 && n + m < N_; }

    cplx operator()(int n, int m) const {
        detail::require(contains(n, m), ErrorCode::invalid_parameter, "transformed index out of range");
        return e_(n, m + N_ - 1);
    }
    cplx& at(int n, int m) {
        detail::require(contains(n, m), ErrorCode::invalid_parameter, "transformed index out of range");
        return e_(n, m + N_ - 1);
    }

    // Largest |rho~_{n,m}| over all n for a given m.
    double max_abs(int m) const {
        double v = 0.0;
        for (int n = 0; n < N_; ++n)
            if (contains(n, m)) v = std::max(v, std::abs((*this)(n, m)));
        return v;
    }

private:
    int N_;
    double t_;
    Matrix e_;
};

inline TransformedMatrix transform_elements(const Matrix& rho, double t) {
    const int N = static_cast<int>(rho.rows());
    detail::require(rho.cols() == N, ErrorCode::invalid_cutoff, "density matrix must be square");
    TransformedMatrix out(N, t);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < N; ++k) {
            const int m = k - n;
            const double logf = 0.5 * (std::lgamma(k + 1.0) - std::lgamma(n + 1.0));
            out.at(n, m) = std::polar(std::exp(logf), m * t) * rho(n, k);
        }
    return out;
}

inline TransformedMatrix transform_elements(const DensityMatrix& rho, double t) {
    return transform_elements(rho.matrix(), t);
}

}  // namespace limitcycle
