// banded.hpp: real banded LU with partial pivoting (LAPACK gbtrf layout).

#pragma once

#include "limitcycle/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace limitcycle {

// A(i, j) is stored at ab(kl + ku + i - j, j); the extra kl rows hold pivoting fill.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ab_(Eigen::MatrixXd::Zero(2 * kl + ku + 1, n)) {
        detail::require(n >= 1 && kl >= 0 && ku >= 0, ErrorCode::invalid_parameter, "bad band shape");
    }

    int size() const noexcept { return n_; }
    bool in_band(int i, int j) const noexcept { return j - i <= ku_ && i - j <= kl_; }

    double& at(int i, int j) {
        detail::require(in_band(i, j), ErrorCode::invalid_parameter, "entry outside band");
        return ab_(kl_ + ku_ + i - j, j);
    }

    void zero_row(int i) {
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) at(i, j) = 0.0;
    }

    // Solves A x = b in place; the matrix is consumed.
    Eigen::VectorXd solve(Eigen::VectorXd b) {
        const int kv = kl_ + ku_;
        auto A = [&](int i, int j) -> double& { return ab_(kv + i - j, j); };
        std::vector<int> piv(n_);
        for (int k = 0; k < n_; ++k) {
            const int last = std::min(n_ - 1, k + kl_);
            int p = k;
            for (int i = k + 1; i <= last; ++i)
                if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
            if (A(p, k) == 0.0) throw Error(ErrorCode::degenerate_steady_state, "singular banded system");
            piv[k] = p;
            const int jmax = std::min(n_ - 1, k + kv);
            if (p != k) {
                for (int j = k; j <= jmax; ++j) std::swap(A(k, j), A(p, j));
                std::swap(b(k), b(p));
            }
            for (int i = k + 1; i <= last; ++i) {
                const double f = A(i, k) / A(k, k);
                A(i, k) = f;
                if (f == 0.0) continue;
                for (int j = k + 1; j <= jmax; ++j) A(i, j) -= f * A(k, j);
                b(i) -= f * b(k);
            }
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b(i);
            for (int j = i + 1; j <= std::min(n_ - 1, i + kv); ++j) s -= A(i, j) * b(j);
            b(i) = s / A(i, i);
        }
        return b;
    }

private:
    int n_, kl_, ku_;
    Eigen::MatrixXd ab_;
};

}  // namespace limitcycle
