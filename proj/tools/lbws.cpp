// Command-line front end: run a welding scenario, compare coarse-space
// combinations, or verify the solver stack on built-in fixtures.

#include "lbws/driver.hpp"
#include "lbws/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    writer(os);
}

int cmd_run(const std::string& config, const std::string& out_dir, bool dump_fields,
            bool dump_decomposition, bool dump_coarse, int threads) {
    lbws::Scenario sc = lbws::load_scenario(config);
    if (threads > 0) sc.threads = threads;
    lbws::WeldingDriver driver(sc);

    if (dump_decomposition)
        write_file(fs::path(out_dir) / "decomposition.jsonl", [&](std::ostream& os) {
            lbws::dump_classes_jsonl(driver.context()->classes, os);
        });
    if (dump_coarse) {
        auto [K, rhs] = driver.assembler().assemble(driver.state(), sc.materials,
                                                    driver.constraints_for(sc.dt));
        (void)rhs;
        auto precond = lbws::SchwarzPreconditioner::build(K, driver.context(), driver.schwarz_options());
        write_file(fs::path(out_dir) / "coarse_columns.json",
                   [&](std::ostream& os) { precond.coarse_basis().dump_metadata_json(os); });
    }

    lbws::RunOptions options;
    options.dump_fields = dump_fields;
    options.out_dir = out_dir;
    options.on_step = [](const lbws::StepRecord& rec) {
        std::printf("step %3d  t=%.4f  newton=%d  gmres_mean=%.1f  coarse=%lld\n", rec.step, rec.time,
                    rec.newton_iterations, rec.gmres_mean(), static_cast<long long>(rec.coarse_dim));
    };
    const lbws::RunReport report = driver.run(options);

    write_file(fs::path(out_dir) / "report.csv", [&](std::ostream& os) { report.write_csv(os); });
    write_file(fs::path(out_dir) / "report.json",
               [&](std::ostream& os) { os << report.to_json().dump(2) << "\n"; });

    std::printf("it_gmres=%.2f  it_newton=%.2f  coarse_dim=%lld  t_pc=%.2fs  t_solve=%.2fs  t_total=%.2fs\n",
                report.it_gmres_mean(), report.it_newton_mean(), static_cast<long long>(report.coarse_dim),
                report.t_pc_total(), report.t_solve_total(), report.t_total);
    if (!report.completed) {
        std::fprintf(stderr, "run failed: %s\n", report.failure.c_str());
        return 2;
    }
    return 0;
}

int cmd_compare(const std::string& config, const std::string& out_dir, int threads) {
    lbws::Scenario sc = lbws::load_scenario(config);
    if (threads > 0) sc.threads = threads;
    std::printf("%-22s %10s %10s %8s %10s %10s %10s\n", "pc_type", "coarse", "it_gmres", "it_N", "t_pc",
                "t_solve", "t_total");
    const auto rows = lbws::run_compare(sc, [](const lbws::CompareRow& row) {
        std::printf("%-22s %10lld %10.1f %8.1f %10.2f %10.2f %10.2f\n", row.name.c_str(),
                    static_cast<long long>(row.coarse_dim), row.it_gmres, row.it_newton, row.t_pc,
                    row.t_solve, row.t_total);
    });
    write_file(fs::path(out_dir) / "compare.csv",
               [&](std::ostream& os) { lbws::write_compare_csv(rows, os); });
    for (const auto& row : rows)
        if (!row.completed) return 2;
    return 0;
}

bool check(const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "[ok]  " : "[FAIL]", name);
    return ok;
}

int cmd_verify() {
    using namespace lbws;
    bool all = true;

    {
        const Mesh mesh = build_box_mesh({1, 1, 1}, {1, 1, 1});
        const auto eval = shape_eval(gauss_2x2x2(), mesh.element_corners(0));
        double worst = 0.0;
        for (const auto& pt : eval.points) {
            worst = std::max(worst, std::abs(pt.values.sum() - 1.0));
            worst = std::max(worst, pt.gradients.colwise().sum().cwiseAbs().maxCoeff());
        }
        all &= check("shape functions: partition of unity", worst < 1e-13);
        all &= check("quadrature volume", std::abs(eval.volume - 1.0) < 1e-13);
    }
    {
        const MaterialTable mat = steel_1_4301();
        all &= check("material breakpoints reproduced",
                     mat.youngs_modulus(170.0) == 19.1e4 && mat.poisson_ratio(2000.0) == 0.364);
        all &= check("material clamping", mat.youngs_modulus(1600.0) == 0.1e4);
    }
    {
        const Mesh mesh = build_box_mesh({1, 1, 1}, {4, 4, 4});
        const DofMap dofmap = build_dof_map(mesh);
        Partition part = partition_structured(mesh, {2, 2, 2});
        const auto classes = classify_interface(part, dofmap);
        const auto counts = count_classes(classes);
        all &= check("2x2x2 classification (12 faces, 6 edges, 1 vertex)",
                     counts.faces == 12 && counts.edges == 6 && counts.vertices == 1);
        const auto gdsw = build_components(classes, CoarseVariant::gdsw, mesh);
        const auto star = build_components(classes, CoarseVariant::gdsw_star, mesh);
        const auto reduced = build_components(classes, CoarseVariant::rgdsw, mesh);
        all &= check("component counts (19 / 13 / 1)",
                     gdsw.components.size() == 19 && star.components.size() == 13 &&
                         reduced.components.size() == 1);
        for (const auto& set : {gdsw, star, reduced}) {
            std::map<Index, double> weight;
            for (const auto& comp : set.components)
                for (const auto& [node, w] : comp.nodes) weight[node] += w;
            bool pou = weight.size() == part.interface_nodes.size();
            for (const auto& [node, w] : weight) pou &= std::abs(w - 1.0) < 1e-14;
            all &= check("interface partition of unity", pou);
        }
    }
    {
        Scenario sc;
        sc.extent = {4, 4, 4};
        sc.cells = {4, 4, 4};
        sc.grid = {1, 1, 1};
        sc.two_level = false;
        sc.first_level = FirstLevelKind::additive;
        sc.steps = 1;
        sc.laser.enabled = false;
        const RunResult result = time_loop(sc);
        bool one_iter = result.report.completed;
        for (const auto& st : result.report.steps)
            for (const auto& s : st.solves) one_iter &= s.gmres_iterations == 1;
        all &= check("single-subdomain additive preconditioner is exact (1 GMRES iteration)", one_iter);
    }
    {
        Scenario sc;
        sc.extent = {6, 6, 6};
        sc.cells = {6, 6, 6};
        sc.grid = {2, 2, 2};
        sc.steps = 2;
        WeldingDriver driver(sc);
        const RunReport report = driver.run();
        all &= check("2x2x2 desk run completes", report.completed);
        auto [K, rhs] = driver.assembler().assemble(driver.state(), sc.materials,
                                                    driver.constraints_for(driver.state().time + sc.dt));
        (void)rhs;
        const auto split = build_interface_split(K, driver.context()->partition);
        CoarseConfig cfg = sc.coarse;
        cfg.truncation_tol = 0.0;
        CoarseBasis basis = interface_values(driver.context()->components_u,
                                             driver.context()->components_theta, cfg, driver.mesh(), K);
        const auto fact = factor_interiors(K, split);
        extend(K, split, fact, driver.context()->components_u, driver.context()->components_theta, basis,
               /*remove_cross_field=*/false);
        const auto blocks = interface_blocks(K, split);
        const Eigen::VectorXd gamma_ones = Eigen::VectorXd::Ones(static_cast<Index>(split.interface_dofs.size()));
        double worst = 0.0;
        for (Index j = 0; j < basis.size(); ++j) {
            const Eigen::VectorXd full = basis.phi.col(j);
            const Eigen::VectorXd interior = gather(full, blocks.interior_all);
            const Eigen::VectorXd interface = gather(full, split.interface_dofs);
            const double scale = (blocks.interior_interface * interface).norm();
            if (scale == 0.0) continue;
            worst = std::max(worst, (blocks.interior_interior * interior +
                                     blocks.interior_interface * interface)
                                            .norm() /
                                        scale);
        }
        all &= check("harmonic extension residual <= 1e-10", worst <= 1e-10);
    }

    std::printf(all ? "verify: all checks passed\n" : "verify: FAILURES\n");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monolithic two-level Schwarz solver workbench for thermo-elastic welding models"};
    app.require_subcommand(1);

    std::string config, out_dir = "out";
    bool dump_fields = false, dump_decomposition = false, dump_coarse = false;
    int threads = 0;
    long seed = 0;  // reserved: the pipeline is deterministic

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config, "scenario config file (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--threads", threads, "worker threads (overrides config)");
        cmd->add_option("--seed", seed, "reserved; runs are deterministic");
    };

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write reports");
    add_common(run, true);
    run->add_flag("--dump-fields", dump_fields, "write per-step legacy-VTK field files");
    run->add_flag("--dump-decomposition", dump_decomposition, "write interface classes as JSON lines");
    run->add_flag("--dump-coarse", dump_coarse, "write coarse column metadata as JSON");

    CLI::App* compare = app.add_subcommand("compare", "run the coarse-space comparison matrix");
    add_common(compare, true);

    CLI::App* verify = app.add_subcommand("verify", "run built-in fixture checks");
    (void)verify;

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config, out_dir, dump_fields, dump_decomposition, dump_coarse, threads);
        if (compare->parsed()) return cmd_compare(config, out_dir, threads);
        return cmd_verify();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
