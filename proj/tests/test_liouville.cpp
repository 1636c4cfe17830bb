#include <catch_amalgamated.hpp>

#include "limitcycle/analytic.hpp"
#include "limitcycle/banded.hpp"
#include "limitcycle/liouville.hpp"

#include <cmath>
#include <random>

using namespace limitcycle;
using Catch::Approx;

namespace {

Matrix random_density(int N, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Matrix A(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) A(i, j) = cplx(g(rng), g(rng));
    Matrix rho = A * A.adjoint();
    return rho / rho.trace();
}

RateSet rates(double k1, double g1, double g2, double k2 = 0.0, double T = 0.0) {
    RateSet r;
    r.kappa1 = k1;
    r.gamma1 = g1;
    r.gamma2 = g2;
    r.kappa2 = k2;
    r.temperature = T;
    return r;
}

}  // namespace

TEST_CASE("Liouvillian matches the direct right-hand side", "[liouville]") {
    const int N = 10;
    const Matrix rho = random_density(N, 1);
    auto rs = rates(0.7, 0.2, 0.3, 0.1, 0.4);
    std::vector<LindbladModel> models{build_rvdp(rs, N)};
    rs.kappa2 = 0.0;
    rs.temperature = 0.0;
    models.push_back(build_vdp(rs, N));
    models.push_back(build_rayleigh(rs, N));
    for (const auto& m : models) {
        const Matrix direct = master_rhs(m, rho);
        const Matrix viaL = unvec(liouvillian(m).apply(vec(rho)), N);
        CHECK((direct - viaL).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("closed oscillator spectrum", "[liouville]") {
    const int N = 5;
    const auto L = liouvillian(build_rvdp(RateSet{}, N));
    // diagonal in the Fock basis: entry for rho(i, j) is -i(i - j)
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int k = i + N * j;
            CHECK(std::abs(L.matrix.coeff(k, k) - cplx(0.0, -(i - j))) < 1e-15);
        }
}

TEST_CASE("block structure by off-diagonality", "[liouville]") {
    const int N = 12;
    for (const auto& [m_row, m_col] : block_couplings(liouvillian(build_rvdp(rates(0.5, 0.1, 0.2, 0.05, 0.3), N))))
        CHECK(m_row == m_col);
    for (const auto& [m_row, m_col] : block_couplings(liouvillian(build_vdp(rates(0.5, 0.1, 0.2), N)))) {
        const int d = std::abs(m_row - m_col);
        CHECK((d == 0 || d == 2));
    }
    CHECK(coupled_components(liouvillian(build_rvdp(rates(0.5, 0.1, 0.2), N))).size() == std::size_t(2 * N - 1));
}

TEST_CASE("free rotation of a coherent state", "[liouville]") {
    const int N = 20;
    const auto rho0 = DensityMatrix::from_state(coherent_state(1.0, N));
    const auto model = build_rvdp(RateSet{}, N);
    const auto times = std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.0};
    for (auto method : {Method::rk4, Method::exponential}) {
        EvolveOptions opt;
        opt.propagation.method = method;
        opt.propagation.dt = 0.002;
        const auto tr = evolve(model, rho0, times, opt);
        const auto a = annihilation(N);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const cplx ea = expectation(tr.states[k], a);
            CHECK(std::abs(ea - std::polar(1.0, -times[k]) * expectation(rho0, a)) < 1e-8);
            CHECK(std::abs(tr.states[k].matrix().trace() - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("evolution relaxes to the steady state", "[liouville]") {
    const int N = 14;
    const auto model = build_rvdp(rates(1.0, 0.0, 0.25), N);
    const auto ss = steady_state(model);
    EvolveOptions opt;
    opt.propagation.method = Method::automatic;
    const auto tr = evolve(model, DensityMatrix::from_state(fock_state(0, N)), {0.0, 10.0, 40.0}, opt);
    CHECK((tr.states.back().matrix() - ss.matrix()).cwiseAbs().maxCoeff() < 1e-6);
    for (double d : tr.trace_drift) CHECK(d < 1e-8);
    CHECK_THROWS_AS(evolve(model, DensityMatrix::from_state(fock_state(0, N)), {1.0, 2.0}), Error);
    CHECK_THROWS_AS(evolve(build_rvdp(rates(1.0, 0.0, 0.25), N + 1), ss, {0.0, 1.0}), Error);

    // RK4 phase error on the fast coherences eventually breaks positivity
    EvolveOptions coarse;
    coarse.propagation.dt = 0.01;
    try {
        evolve(build_rvdp(RateSet{}, 20), DensityMatrix::from_state(coherent_state(1.0, 20)), {0.0, 3.0}, coarse);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::integration_failure);
    }
}

TEST_CASE("steady state basics", "[liouville]") {
    SECTION("pure decay") {
        const auto ss = steady_state(build_rvdp(rates(0.0, 1.0, 1.0), 8));
        CHECK(ss(0, 0).real() == Approx(1.0).margin(1e-12));
    }
    SECTION("kernel") {
        const auto model = build_vdp(rates(0.3, 0.0, 0.2), 16);
        SteadyStateInfo info;
        const auto ss = steady_state(model, &info);
        CHECK(liouvillian(model).apply(vec(ss.matrix())).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(info.residual < 1e-9);
    }
    SECTION("no damping") {
        try {
            steady_state(build_rvdp(rates(1.0, 0.0, 0.0), 6));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::degenerate_steady_state);
        }
    }
}

TEST_CASE("banded oracle", "[liouville]") {
    SECTION("no pumping") {
        EffectiveRates e{1.0, 0.0, 1.0, 0.0};
        const auto p = rvdp_diag_steady(e, 10);
        CHECK(p[0] == Approx(1.0));
    }
    SECTION("agrees with the full steady state") {
        const auto rs = rates(3.0, 1.0, 1.0, 0.5);
        const auto full = steady_state(build_rvdp(rs, 40)).diagonal();
        const auto band = rvdp_diag_steady(effective_rates(rs), 40);
        for (int n = 0; n < 40; ++n) CHECK(std::abs(full(n) - band[n]) < 1e-10);
        const auto e = effective_rates(rs);
        const int M = auto_cutoff(e);
        const auto wide = rvdp_diag_steady(e, M);
        const auto an = steady_probs(e, M - 1);
        for (int n = 0; n < M; ++n) CHECK(std::abs(an[n] - wide[n]) < 1e-10);
    }
    SECTION("automatic cutoff") {
        const auto e = effective_rates(rates(20.0, 1.0, 1.0));
        const int N = auto_cutoff(e);
        CHECK(rvdp_diag_steady(e, N).tail() < tail_tol);
        CHECK_THROWS_AS(auto_cutoff(e, 16, 1e-10, 20), Error);
    }
    SECTION("banded solver") {
        BandedMatrix B(5, 2, 2);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = std::max(0, i - 2); j <= std::min(4, i + 2); ++j) {
                const double v = (i == j) ? 4.0 + i : 1.0 / (1.0 + i + 2 * j);
                B.at(i, j) = v;
                D(i, j) = v;
            }
        Eigen::VectorXd b(5);
        b << 1, -2, 3, 0.5, 2;
        const Eigen::VectorXd x = B.solve(b);
        CHECK((D * x - b).norm() < 1e-13);
    }
}

TEST_CASE("RvdP steady state is diagonal", "[liouville]") {
    const auto ss = steady_state(build_rvdp(rates(0.3, 0.0, 0.3 / 16.0), 48));
    double off = 0.0;
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 48; ++j)
            if (i != j) off = std::max(off, std::abs(ss(i, j)));
    CHECK(off < 1e-8);
}

TEST_CASE("expectation values", "[liouville]") {
    const int N = 60;
    const auto th = thermal_state(1.5, N);
    CHECK(expectation(th, number(N)).real() == Approx(1.5).margin(1e-6));
    const cplx alpha(0.8, -0.3);
    const auto coh = DensityMatrix::from_state(coherent_state(alpha, N));
    CHECK(expectation(coh, position(N)).real() == Approx(std::sqrt(2.0) * alpha.real()).margin(1e-12));
    CHECK_THROWS_AS(expectation(coh, number(N - 1)), Error);
}

TEST_CASE("transformed elements", "[liouville]") {
    const int N = 6;
    const Matrix rho = random_density(N, 9);
    const auto tm = transform_elements(rho, 0.37);
    for (int n = 0; n < N; ++n) CHECK(std::abs(tm(n, 0) - rho(n, n)) < 1e-15);

    Matrix r01 = Matrix::Zero(2, 2);
    r01(0, 0) = 0.5;
    r01(1, 1) = 0.5;
    r01(0, 1) = 0.3;
    r01(1, 0) = 0.3;
    CHECK(std::abs(transform_elements(r01, 0.0)(0, 1) - 0.3) < 1e-15);
    CHECK(std::abs(transform_elements(r01, 0.0)(1, -1) - 0.3 / std::sqrt(1.0)) < 1e-15);
    CHECK_THROWS_AS(tm(0, N), Error);

    const auto vdp = steady_state(build_vdp(rates(0.3, 0.0, 0.3 / 4.0), 24));
    const auto tv = transform_elements(vdp, 0.0);
    for (int m = 1; m < 24; m += 2) CHECK(tv.max_abs(m) < 1e-8);
}
