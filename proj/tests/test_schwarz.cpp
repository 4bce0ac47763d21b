#include "lbws/schwarz.hpp"
#include "lbws/driver.hpp"
#include "lbws/gmres.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace lbws;

namespace {

struct Setup {
    Scenario scenario;
    WeldingDriver driver;
    BlockMatrix K;
    Eigen::VectorXd rhs;

    explicit Setup(std::array<int, 3> cells, std::array<int, 3> grid, bool driver_two_level = true)
        : scenario(make_scenario(cells, grid, driver_two_level)), driver(scenario) {
        driver.advance_step();
        auto [k, r] = driver.assembler().assemble(
            driver.state(), scenario.materials,
            driver.constraints_for(driver.state().time + scenario.dt));
        K = std::move(k);
        rhs = std::move(r);
    }

    static Scenario make_scenario(std::array<int, 3> cells, std::array<int, 3> grid, bool two_level) {
        Scenario sc;
        sc.extent = {6, 6, 6};
        sc.cells = cells;
        sc.grid = grid;
        sc.laser.center = {3, 3};
        sc.steps = 1;
        sc.two_level = two_level;
        return sc;
    }

    SchwarzOptions options(bool two_level, FirstLevelKind level) const {
        SchwarzOptions opts = driver.schwarz_options();
        opts.two_level = two_level;
        opts.first_level = level;
        opts.coarse.truncation_tol = 0.0;
        return opts;
    }
};

Eigen::VectorXd random_vector(Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = unit(rng);
    return v;
}

} // namespace

TEST_CASE("single subdomain additive one-level is an exact solve", "[schwarz]") {
    Setup fx({4, 4, 4}, {1, 1, 1}, /*driver_two_level=*/false);
    auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(),
                                                fx.options(false, FirstLevelKind::additive));
    const Eigen::VectorXd r = random_vector(fx.K.rows(), 3);
    const Eigen::VectorXd z = precond.apply(r);
    const Eigen::VectorXd want =
        Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(fx.K.matrix)).solve(r);
    CHECK((z - want).norm() / want.norm() < 1e-11);

    auto [x, stats] = gmres(fx.K.matrix, fx.rhs, precond, GmresOptions{});
    CHECK(stats.converged);
    CHECK(stats.iterations == 1);
}

TEST_CASE("zero residual maps to zero", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    auto precond =
        SchwarzPreconditioner::build(fx.K, fx.driver.context(), fx.options(true, FirstLevelKind::restricted));
    CHECK(precond.apply(Eigen::VectorXd::Zero(fx.K.rows())).norm() == 0.0);
}

TEST_CASE("restricted weights form a partition of unity", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    auto precond =
        SchwarzPreconditioner::build(fx.K, fx.driver.context(), fx.options(true, FirstLevelKind::restricted));
    Eigen::VectorXd cover = Eigen::VectorXd::Zero(fx.K.rows());
    const auto& dofs = precond.subdomain_dofs();
    const auto& owned = precond.owned_local_indices();
    for (std::size_t s = 0; s < dofs.size(); ++s)
        for (Index i : owned[s]) cover[dofs[s][static_cast<std::size_t>(i)]] += 1.0;
    CHECK((cover - Eigen::VectorXd::Ones(fx.K.rows())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coarse dimension of the dirichlet-free cube", "[schwarz]") {
    Scenario sc;
    sc.extent = {6, 6, 6};
    sc.cells = {4, 4, 4};
    sc.grid = {2, 2, 2};
    sc.welding_bcs = false;
    sc.laser.enabled = false;
    sc.load.enabled = false;
    sc.coarse.displacement = CoarseVariant::gdsw;
    sc.coarse.temperature = CoarseVariant::gdsw;
    sc.coarse.rotations = false;
    WeldingDriver driver(sc);
    auto [K, rhs] = driver.assembler().assemble(driver.state(), sc.materials,
                                                ConstraintSet(driver.dof_map().dof_count()));
    auto precond = SchwarzPreconditioner::build(K, driver.context(), driver.schwarz_options());
    CHECK(precond.coarse_dimension() == 3 * 19 + 19);
}

TEST_CASE("dense operator oracle on a small cube", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    for (bool two_level : {false, true})
        for (FirstLevelKind level : {FirstLevelKind::additive, FirstLevelKind::restricted}) {
            auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(),
                                                        fx.options(two_level, level));
            const Eigen::MatrixXd phi =
                two_level ? Eigen::MatrixXd(precond.coarse_basis().phi) : Eigen::MatrixXd(fx.K.rows(), 0);
            const Eigen::MatrixXd dense = oracle::dense_schwarz_operator(
                fx.K, fx.driver.context()->partition, phi, two_level,
                level == FirstLevelKind::restricted);
            const Eigen::VectorXd r = random_vector(fx.K.rows(), 11);
            const Eigen::VectorXd z = precond.apply(r);
            const Eigen::VectorXd want = dense * r;
            CHECK((z - want).norm() / want.norm() < 1e-11);
        }
}

TEST_CASE("apply is independent of the thread count", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    SchwarzOptions serial = fx.options(true, FirstLevelKind::restricted);
    serial.threads = 1;
    SchwarzOptions parallel = serial;
    parallel.threads = 4;
    auto p1 = SchwarzPreconditioner::build(fx.K, fx.driver.context(), serial);
    auto p2 = SchwarzPreconditioner::build(fx.K, fx.driver.context(), parallel);
    const Eigen::VectorXd r = random_vector(fx.K.rows(), 13);
    const Eigen::VectorXd z1 = p1.apply(r);
    const Eigen::VectorXd z2 = p2.apply(r);
    CHECK((z1 - z2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recycling policies", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    const SchwarzOptions opts = fx.options(true, FirstLevelKind::restricted);

    // a second operator at a slightly different state
    fx.driver.state().d *= 1.0 + 1e-3;
    auto [K2, rhs2] = fx.driver.assembler().assemble(
        fx.driver.state(), fx.scenario.materials,
        fx.driver.constraints_for(fx.driver.state().time + fx.scenario.dt));
    REQUIRE(K2.stamp != fx.K.stamp);

    SECTION("rebuild-all equals a fresh build") {
        auto updated = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        updated.update(K2, RecyclePolicy::rebuild_all);
        auto fresh = SchwarzPreconditioner::build(K2, fx.driver.context(), opts);
        const Eigen::VectorXd r = random_vector(fx.K.rows(), 17);
        CHECK((updated.apply(r) - fresh.apply(r)).cwiseAbs().maxCoeff() == 0.0);
        updated.check_operator(K2);
    }
    SECTION("reuse-all keeps the coarse parts byte-identical") {
        auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        const Eigen::MatrixXd phi_before = Eigen::MatrixXd(precond.coarse_basis().phi);
        const Eigen::MatrixXd k0_before = Eigen::MatrixXd(precond.coarse_operator());
        precond.update(K2, RecyclePolicy::reuse_all);
        CHECK(Eigen::MatrixXd(precond.coarse_basis().phi) == phi_before);
        CHECK(Eigen::MatrixXd(precond.coarse_operator()) == k0_before);
        precond.check_operator(K2);  // declared recycle passes the guard
    }
    SECTION("reuse-all on an unchanged operator acts like rebuild-all") {
        auto a = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        a.update(fx.K, RecyclePolicy::reuse_all);
        auto b = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        b.update(fx.K, RecyclePolicy::rebuild_all);
        const Eigen::VectorXd r = random_vector(fx.K.rows(), 19);
        CHECK((a.apply(r) - b.apply(r)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("reuse-phi reforms the coarse operator") {
        auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        const Eigen::MatrixXd phi_before = Eigen::MatrixXd(precond.coarse_basis().phi);
        precond.update(K2, RecyclePolicy::reuse_phi);
        CHECK(Eigen::MatrixXd(precond.coarse_basis().phi) == phi_before);
        const Eigen::MatrixXd want =
            phi_before.transpose() * Eigen::MatrixXd(K2.matrix) * phi_before;
        CHECK((Eigen::MatrixXd(precond.coarse_operator()) - want).norm() / want.norm() < 1e-13);
        precond.check_operator(K2);
    }
    SECTION("stale preconditioner without declared recycling is a misuse") {
        auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        CHECK_THROWS_AS(precond.check_operator(K2), stale_preconditioner_error);
    }
    SECTION("dimension change is rejected") {
        auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts);
        Scenario other = fx.scenario;
        other.cells = {6, 6, 6};
        WeldingDriver driver2(other);
        auto [K3, r3] = driver2.assembler().assemble(driver2.state(), other.materials,
                                                     driver2.constraints_for(other.dt));
        CHECK_THROWS_AS(precond.update(K3, RecyclePolicy::rebuild_all), std::invalid_argument);
    }
}

TEST_CASE("degenerate coarse configurations are rejected", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    SchwarzOptions opts = fx.options(true, FirstLevelKind::restricted);
    opts.coarse.truncation_tol = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(SchwarzPreconditioner::build(fx.K, fx.driver.context(), opts), configuration_error);
}

TEST_CASE("one-level preconditioner needs no coarse data", "[schwarz]") {
    Setup fx({4, 4, 4}, {2, 2, 2});
    auto precond = SchwarzPreconditioner::build(fx.K, fx.driver.context(),
                                                fx.options(false, FirstLevelKind::restricted));
    CHECK(precond.coarse_dimension() == 0);
    auto [x, stats] = gmres(fx.K.matrix, fx.rhs, precond, GmresOptions{});
    CHECK(stats.converged);
}
