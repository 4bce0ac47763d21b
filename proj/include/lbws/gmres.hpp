#pragma once

#include "lbws/common.hpp"

#include <cmath>
#include <functional>

namespace lbws {

enum class StopReason { rel_tol, abs_tol, max_iter };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::rel_tol: return "rel-tol";
        case StopReason::abs_tol: return "abs-tol";
        case StopReason::max_iter: return "max-iter";
    }
    return "?";
}

struct KrylovStats {
    int iterations = 0;
    double final_relative = 0.0;  // unpreconditioned ||b - Kx|| / ||b||
    double final_absolute = 0.0;
    bool converged = false;
    StopReason reason = StopReason::max_iter;
    std::vector<double> residual_history;  // per inner iteration, recurrence value
};

struct GmresOptions {
    double tol_rel = 1e-6;
    double tol_abs = 1e-10;
    int max_iter = 1000;
    int restart = 200;
};

/// Restarted GMRES with right preconditioning: the Arnoldi recurrence then
/// tracks the true unpreconditioned residual, so the stopping rule
/// ||b - Kx|| <= max(tol_rel*||b||, tol_abs) needs no extra residual
/// evaluations. Modified Gram-Schmidt with one reorthogonalization pass when
/// the projected vector loses more than half its norm.
template <class Operator, class Precond>
std::pair<Eigen::VectorXd, KrylovStats> gmres(const Operator& apply_op, const Precond& apply_precond,
                                              const Eigen::VectorXd& b, const GmresOptions& opt = {}) {
    if (!(opt.tol_rel > 0.0) || !(opt.tol_abs > 0.0))
        throw std::invalid_argument("gmres: tolerances must be positive");
    const Index n = b.size();
    KrylovStats stats;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

    const double b_norm = b.norm();
    if (b_norm == 0.0) {
        stats.converged = true;
        stats.reason = StopReason::abs_tol;
        return {x, stats};
    }
    const double target = std::max(opt.tol_rel * b_norm, opt.tol_abs);

    const int restart = std::max(1, opt.restart);
    Eigen::MatrixXd krylov(n, restart + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(restart + 1, restart);
    Eigen::VectorXd cs(restart), sn(restart), g(restart + 1);

    bool done = false;
    while (!done && stats.iterations < opt.max_iter) {
        Eigen::VectorXd r = b - apply_op(x);
        double beta = r.norm();
        if (beta <= target) {
            done = true;
            break;
        }
        krylov.col(0) = r / beta;
        g.setZero();
        g[0] = beta;
        int k = 0;

        for (int j = 0; j < restart && stats.iterations < opt.max_iter; ++j) {
            Eigen::VectorXd w = apply_op(apply_precond(krylov.col(j)));
            const double w_norm_before = w.norm();
            for (int i = 0; i <= j; ++i) {
                const double h = krylov.col(i).dot(w);
                hess(i, j) = h;
                w.noalias() -= h * krylov.col(i);
            }
            if (w.norm() < w_norm_before / std::sqrt(2.0)) {
                for (int i = 0; i <= j; ++i) {  // one reorthogonalization pass
                    const double h = krylov.col(i).dot(w);
                    hess(i, j) += h;
                    w.noalias() -= h * krylov.col(i);
                }
            }
            const double h_next = w.norm();
            hess(j + 1, j) = h_next;
            const bool breakdown = h_next <= 1e-14 * std::max(1.0, std::abs(hess(j, j)));
            if (!breakdown) krylov.col(j + 1) = w / h_next;

            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * hess(i, j) + sn[i] * hess(i + 1, j);
                hess(i + 1, j) = -sn[i] * hess(i, j) + cs[i] * hess(i + 1, j);
                hess(i, j) = t;
            }
            const double denom = std::hypot(hess(j, j), hess(j + 1, j));
            cs[j] = denom == 0.0 ? 1.0 : hess(j, j) / denom;
            sn[j] = denom == 0.0 ? 0.0 : hess(j + 1, j) / denom;
            hess(j, j) = denom;
            hess(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            ++stats.iterations;
            k = j + 1;
            const double res = std::abs(g[j + 1]);
            stats.residual_history.push_back(res);
            if (res <= target || breakdown) break;
        }

        // x += P(V y) with y from the triangular recurrence
        Eigen::VectorXd y = hess.topLeftCorner(k, k)
                                .template triangularView<Eigen::Upper>()
                                .solve(g.head(k));
        x.noalias() += apply_precond(krylov.leftCols(k) * y);

        const double true_res = (b - apply_op(x)).norm();
        if (true_res <= target) done = true;
    }

    const double final_res = (b - apply_op(x)).norm();
    stats.final_absolute = final_res;
    stats.final_relative = final_res / b_norm;
    if (final_res <= target) {
        stats.converged = true;
        stats.reason =
            stats.final_relative <= opt.tol_rel ? StopReason::rel_tol : StopReason::abs_tol;
    } else {
        stats.converged = false;
        stats.reason = StopReason::max_iter;
    }
    return {x, stats};
}

/// Matrix + preconditioner-object convenience overload.
template <class Precond>
std::pair<Eigen::VectorXd, KrylovStats> gmres(const SparseRow& K, const Eigen::VectorXd& b,
                                              const Precond& precond, const GmresOptions& opt = {}) {
    return gmres([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(K * v); },
                 [&](const Eigen::VectorXd& v) { return precond.apply(v); }, b, opt);
}

} // namespace lbws
