#include "lbws/gmres.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <random>

using namespace lbws;

namespace {

struct IdentityPrecond {
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return v; }
};

SparseRow laplacian_2d(int n) {
    SparseRow a(n * n, n * n);
    std::vector<Eigen::Triplet<double>> trips;
    auto id = [n](int i, int j) { return i + n * j; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            trips.emplace_back(id(i, j), id(i, j), 4.0);
            if (i > 0) trips.emplace_back(id(i, j), id(i - 1, j), -1.0);
            if (i + 1 < n) trips.emplace_back(id(i, j), id(i + 1, j), -1.0);
            if (j > 0) trips.emplace_back(id(i, j), id(i, j - 1), -1.0);
            if (j + 1 < n) trips.emplace_back(id(i, j), id(i, j + 1), -1.0);
        }
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

Eigen::VectorXd random_vector(Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = unit(rng);
    return v;
}

} // namespace

TEST_CASE("identity system converges in one iteration", "[gmres]") {
    SparseRow eye(5, 5);
    eye.setIdentity();
    const Eigen::VectorXd b = random_vector(5, 3);
    auto [x, stats] = gmres(eye, b, IdentityPrecond{});
    CHECK(stats.converged);
    CHECK(stats.iterations == 1);
    CHECK((x - b).norm() < 1e-14);
}

TEST_CASE("zero right-hand side returns zero immediately", "[gmres]") {
    const SparseRow a = laplacian_2d(4);
    auto [x, stats] = gmres(a, Eigen::VectorXd::Zero(16), IdentityPrecond{});
    CHECK(stats.converged);
    CHECK(stats.iterations == 0);
    CHECK(x.norm() == 0.0);
}

TEST_CASE("unpreconditioned laplacian matches a dense direct solve", "[gmres]") {
    const SparseRow a = laplacian_2d(10);
    const Eigen::VectorXd b = random_vector(100, 5);
    GmresOptions opt;
    opt.tol_rel = 1e-10;
    auto [x, stats] = gmres(a, b, IdentityPrecond{}, opt);
    REQUIRE(stats.converged);
    const Eigen::VectorXd want = Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(a)).solve(b);
    CHECK((x - want).norm() / want.norm() < 1e-8);
    CHECK((b - a * x).norm() <= std::max(opt.tol_rel * b.norm(), opt.tol_abs));
}

TEST_CASE("residual history is monotone within a cycle", "[gmres]") {
    const SparseRow a = laplacian_2d(10);
    const Eigen::VectorXd b = random_vector(100, 7);
    GmresOptions opt;
    opt.restart = 30;
    auto [x, stats] = gmres(a, b, IdentityPrecond{}, opt);
    int position_in_cycle = 0;
    for (std::size_t i = 1; i < stats.residual_history.size(); ++i) {
        ++position_in_cycle;
        if (position_in_cycle % opt.restart == 0) continue;  // cycle boundary
        CHECK(stats.residual_history[i] <= stats.residual_history[i - 1] * (1 + 1e-12));
    }
}

TEST_CASE("exact inverse preconditioner converges in one iteration", "[gmres]") {
    const SparseRow a = laplacian_2d(6);
    const Eigen::MatrixXd inv = Eigen::MatrixXd(a).inverse();
    struct ExactPrecond {
        const Eigen::MatrixXd* inv;
        Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return *inv * v; }
    };
    const Eigen::VectorXd b = random_vector(36, 9);
    GmresOptions opt;
    opt.tol_rel = 1e-12;
    auto [x, stats] = gmres(a, b, ExactPrecond{&inv}, opt);
    CHECK(stats.converged);
    CHECK(stats.iterations == 1);
    CHECK((b - a * x).norm() / b.norm() <= 1e-12);
}

TEST_CASE("restart independence of the converged solution", "[gmres]") {
    const SparseRow a = laplacian_2d(10);
    const Eigen::VectorXd b = random_vector(100, 11);
    GmresOptions small;
    small.restart = 7;
    GmresOptions large;
    large.restart = 200;
    auto [x1, s1] = gmres(a, b, IdentityPrecond{}, small);
    auto [x2, s2] = gmres(a, b, IdentityPrecond{}, large);
    REQUIRE(s1.converged);
    REQUIRE(s2.converged);
    CHECK((x1 - x2).norm() <= 10 * small.tol_rel * b.norm());
}

TEST_CASE("iteration cap returns best iterate unconverged", "[gmres]") {
    const SparseRow a = laplacian_2d(10);
    const Eigen::VectorXd b = random_vector(100, 13);
    GmresOptions opt;
    opt.max_iter = 3;
    auto [x, stats] = gmres(a, b, IdentityPrecond{}, opt);
    CHECK_FALSE(stats.converged);
    CHECK(stats.reason == StopReason::max_iter);
    CHECK(stats.iterations == 3);
    CHECK((b - a * x).norm() < b.norm());  // still made progress
}

TEST_CASE("stopping reasons", "[gmres]") {
    const SparseRow a = laplacian_2d(6);
    const Eigen::VectorXd b = random_vector(36, 15);
    GmresOptions rel;
    rel.tol_rel = 1e-8;
    rel.tol_abs = 1e-300;
    auto [x1, s1] = gmres(a, b, IdentityPrecond{}, rel);
    CHECK(s1.reason == StopReason::rel_tol);

    GmresOptions abs;
    abs.tol_rel = 1e-300;
    abs.tol_abs = 1e-6;
    auto [x2, s2] = gmres(a, b, IdentityPrecond{}, abs);
    CHECK(s2.reason == StopReason::abs_tol);
    CHECK(s2.final_absolute <= 1e-6);
}

TEST_CASE("invalid tolerances are rejected", "[gmres]") {
    const SparseRow a = laplacian_2d(4);
    GmresOptions opt;
    opt.tol_rel = 0.0;
    CHECK_THROWS_AS(gmres(a, Eigen::VectorXd::Ones(16), IdentityPrecond{}, opt), std::invalid_argument);
}
