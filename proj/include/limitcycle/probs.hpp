// probs.hpp: steady-state Fock occupation probabilities.

#pragma once

#include "limitcycle/error.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace limitcycle {

inline constexpr double tail_tol = 1e-10;

class ProbVector {
public:
    explicit ProbVector(Eigen::VectorXd p) : p_(std::move(p)) {
        detail::require(p_.size() >= 1, ErrorCode::invalid_cutoff, "empty probability vector");
        for (Eigen::Index n = 0; n < p_.size(); ++n)
            detail::require(p_(n) >= -1e-12 && p_(n) <= 1.0 + 1e-12, ErrorCode::validation,
                            "P_" + std::to_string(n) + " = " + std::to_string(p_(n)) + " outside [0, 1]");
        detail::require(p_.sum() <= 1.0 + 1e-9, ErrorCode::validation,
                        "probabilities sum to " + std::to_string(p_.sum()));
    }

    const Eigen::VectorXd& probs() const noexcept { return p_; }
    int size() const noexcept { return static_cast<int>(p_.size()); }
    int n_max() const noexcept { return size() - 1; }
    double operator[](int n) const { return p_(n); }

    double sum() const { return p_.sum(); }
    double tail() const { return p_(p_.size() - 1); }
    bool tail_adequate() const { return tail() < tail_tol; }

    double mean() const {
        double m = 0.0;
        for (Eigen::Index n = 1; n < p_.size(); ++n) m += static_cast<double>(n) * p_(n);
        return m;
    }

private:
    Eigen::VectorXd p_;
};

}  // namespace limitcycle
