#pragma once

#include "lbws/assembly.hpp"
#include "lbws/gmres.hpp"
#include "lbws/scenario.hpp"
#include "lbws/schwarz.hpp"
#include "lbws/vtk.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>

namespace lbws {

/// External load displacement u_D(t) on the face y = l_y: the strain schedule
/// min(eps22, eps22_rate * t) measured from the load onset, scaled by the
/// loaded edge length when interpreted as a strain.
inline double load_displacement(const Scenario& sc, double t) {
    if (!sc.load.enabled) return 0.0;
    const double t_on = std::max(0.0, t - sc.load.start_time);
    const double strain = std::min(sc.load.eps22, sc.load.eps22_rate * t_on);
    return sc.load.interpret == LoadSpec::Interpret::strain ? strain * sc.extent[1] : strain;
}

/// Laser history: per-node ramp values of currently covered nodes.
struct LaserTracker {
    std::vector<double> ramp;  // NaN where uncovered

    explicit LaserTracker(Index node_count)
        : ramp(static_cast<std::size_t>(node_count), std::numeric_limits<double>::quiet_NaN()) {}
};

/// Temperature Dirichlet set of one time step: the melting-pool cylinder at
/// time t covers all nodes within the radius (horizontal distance); covered
/// nodes ramp from their current temperature by rate*dt per step, clamped at
/// the melting temperature. Nodes leaving the cylinder are released.
inline std::vector<std::pair<Index, double>> laser_constraints(LaserTracker& tracker, const Scenario& sc,
                                                               double t, const Mesh& mesh,
                                                               const Eigen::VectorXd& current) {
    std::vector<std::pair<Index, double>> out;
    if (!sc.laser.enabled) {
        std::fill(tracker.ramp.begin(), tracker.ramp.end(), std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    const double travel = sc.laser.velocity * std::max(0.0, t - sc.laser.init_duration);
    const double cx = sc.laser.center[0] + travel;
    const double cy = sc.laser.center[1];
    for (Index node = 0; node < mesh.node_count(); ++node) {
        const Vec3 pos = mesh.node_position(node);
        const double dist = std::hypot(pos.x() - cx, pos.y() - cy);
        auto& value = tracker.ramp[static_cast<std::size_t>(node)];
        if (dist <= sc.laser.radius) {
            const double base = std::isnan(value) ? current[DofMap::dof(node, kThetaComp)] : value;
            value = std::min(base + sc.laser.rate * sc.dt, sc.laser.melt_temperature);
            out.emplace_back(node, value);
        } else {
            value = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

struct SolveRecord {
    int gmres_iterations = 0;
    double final_relative = 0.0;
    double final_absolute = 0.0;
    bool converged = false;
};

struct StepRecord {
    int step = 0;
    double time = 0.0;
    int newton_iterations = 0;
    std::vector<SolveRecord> solves;
    Index coarse_dim = 0;
    double t_assemble = 0.0, t_pc = 0.0, t_solve = 0.0;
    bool converged = false;

    double gmres_mean() const {
        if (solves.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& s : solves) sum += s.gmres_iterations;
        return sum / static_cast<double>(solves.size());
    }
};

struct RunReport {
    std::vector<StepRecord> steps;
    bool completed = true;
    std::string failure;
    Index coarse_dim = 0;
    double coarse_apply_seconds = 0.0;
    double t_total = 0.0;

    double it_gmres_mean() const {
        double sum = 0.0;
        long count = 0;
        for (const auto& st : steps)
            for (const auto& s : st.solves) {
                sum += s.gmres_iterations;
                ++count;
            }
        return count ? sum / static_cast<double>(count) : 0.0;
    }
    double it_newton_mean() const {
        if (steps.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& st : steps) sum += st.newton_iterations;
        return sum / static_cast<double>(steps.size());
    }
    double t_pc_total() const {
        double sum = 0.0;
        for (const auto& st : steps) sum += st.t_pc;
        return sum;
    }
    double t_assemble_total() const {
        double sum = 0.0;
        for (const auto& st : steps) sum += st.t_assemble;
        return sum;
    }
    double t_solve_total() const {
        double sum = 0.0;
        for (const auto& st : steps) sum += st.t_solve;
        return sum;
    }

    /// Per-step CSV: step,time,newton_iters,gmres_iters_mean,coarse_dim,
    /// t_assemble,t_pc,t_solve
    void write_csv(std::ostream& os) const {
        os << "step,time,newton_iters,gmres_iters_mean,coarse_dim,t_assemble,t_pc,t_solve\n";
        char buf[256];
        for (const auto& st : steps) {
            std::snprintf(buf, sizeof(buf), "%d,%.9g,%d,%.9g,%lld,%.6f,%.6f,%.6f\n", st.step, st.time,
                          st.newton_iterations, st.gmres_mean(), static_cast<long long>(st.coarse_dim),
                          st.t_assemble, st.t_pc, st.t_solve);
            os << buf;
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["completed"] = completed;
        if (!failure.empty()) j["failure"] = failure;
        j["aggregates"] = {{"it_gmres", it_gmres_mean()},
                           {"it_newton", it_newton_mean()},
                           {"coarse_dim", coarse_dim},
                           {"t_pc", t_pc_total()},
                           {"t_assemble", t_assemble_total()},
                           {"t_solve", t_solve_total()},
                           {"t_coarse_apply", coarse_apply_seconds},
                           {"t_total", t_total}};
        j["steps"] = nlohmann::json::array();
        for (const auto& st : steps) {
            nlohmann::json s = {{"step", st.step},
                                {"time", st.time},
                                {"newton_iters", st.newton_iterations},
                                {"gmres_iters_mean", st.gmres_mean()},
                                {"coarse_dim", st.coarse_dim},
                                {"t_assemble", st.t_assemble},
                                {"t_pc", st.t_pc},
                                {"t_solve", st.t_solve},
                                {"converged", st.converged}};
            s["gmres_iters"] = nlohmann::json::array();
            for (const auto& sv : st.solves) s["gmres_iters"].push_back(sv.gmres_iterations);
            j["steps"].push_back(std::move(s));
        }
        return j;
    }
};

struct RunOptions {
    bool dump_fields = false;
    std::string out_dir = ".";
    std::function<void(const StepRecord&)> on_step;
};

/// Scenario executor: owns the mesh, DOF map, assembler, static decomposition
/// data, and the evolving state. The interface classification is computed
/// once from the static boundary conditions; per-step laser constraints only
/// change the elimination mask.
class WeldingDriver {
  public:
    explicit WeldingDriver(Scenario sc)
        : scenario_(std::move(sc)),
          mesh_(build_box_mesh(scenario_.extent, scenario_.cells)),
          dofmap_(build_dof_map(mesh_, scenario_.welding_bcs ? BoundarySpec::welding() : BoundarySpec::none())),
          assembler_(mesh_, dofmap_),
          laser_(mesh_.node_count()),
          state_(State::uniform(dofmap_.dof_count(), scenario_.initial_temperature, scenario_.dt)) {
        scenario_.validate();
        auto ctx = std::make_shared<SchwarzContext>(
            make_schwarz_context(mesh_, dofmap_, scenario_.grid, scenario_.overlap,
                                 scenario_.coarse.displacement, scenario_.coarse.temperature));
        ctx_ = std::move(ctx);
    }

    const Mesh& mesh() const { return mesh_; }
    const DofMap& dof_map() const { return dofmap_; }
    const Assembler& assembler() const { return assembler_; }
    const Scenario& scenario() const { return scenario_; }
    State& state() { return state_; }
    const State& state() const { return state_; }
    std::shared_ptr<const SchwarzContext> context() const { return ctx_; }

    SchwarzOptions schwarz_options() const {
        SchwarzOptions opts;
        // a single-subdomain decomposition has no interface and therefore no
        // coarse space; the first level alone is already an exact solve
        opts.two_level = scenario_.two_level && !ctx_->partition.interface_nodes.empty();
        opts.first_level = scenario_.first_level;
        opts.coarse = scenario_.coarse;
        opts.threads = scenario_.threads;
        return opts;
    }

    GmresOptions gmres_options() const {
        GmresOptions g;
        g.tol_rel = scenario_.tolerances.gmres_rel;
        g.tol_abs = scenario_.tolerances.gmres_abs;
        g.max_iter = scenario_.tolerances.gmres_max_iter;
        g.restart = scenario_.tolerances.gmres_restart;
        return g;
    }

    /// Dirichlet data for the step ending at t_next: static schedules
    /// evaluated at t_next plus the advancing melting-pool constraints.
    ConstraintSet constraints_for(double t_next) {
        ConstraintSet set(dofmap_.dof_count());
        const double u_load = load_displacement(scenario_, t_next);
        for (const auto& bc : dofmap_.displacement_bcs())
            set.add(DofMap::dof(bc.node, bc.component), bc.schedule == BcSchedule::load ? u_load : 0.0);
        for (const auto& bc : dofmap_.temperature_bcs())
            set.add(DofMap::dof(bc.node, bc.component), 0.0);
        for (const auto& [node, value] : laser_constraints(laser_, scenario_, t_next, mesh_, state_.d))
            set.add(DofMap::dof(node, kThetaComp), value);
        return set;
    }

    /// One Newton solve of the current step. Builds the preconditioner at
    /// the first iteration; later iterations follow the recycle policy.
    StepRecord newton_solve(const ConstraintSet& constraints) {
        StepRecord rec;
        rec.coarse_dim = 0;
        std::unique_ptr<SchwarzPreconditioner> precond;
        double prev_norm = std::numeric_limits<double>::infinity();
        int growth_streak = 0;

        for (int it = 0;; ++it) {
            const auto t0 = std::chrono::steady_clock::now();
            auto [K, rhs] = assembler_.assemble(state_, scenario_.materials, constraints);
            rec.t_assemble += seconds_since(t0);

            const double norm = rhs.norm();
            if (norm <= scenario_.tolerances.newton_abs) {
                rec.converged = true;
                break;
            }
            if (it >= scenario_.tolerances.newton_max_iter) break;
            growth_streak = norm >= prev_norm ? growth_streak + 1 : 0;
            if (growth_streak >= 3) break;
            prev_norm = norm;

            const auto t1 = std::chrono::steady_clock::now();
            if (!precond) {
                precond = std::make_unique<SchwarzPreconditioner>(
                    SchwarzPreconditioner::build(K, ctx_, schwarz_options()));
                rec.coarse_dim = precond->coarse_dimension();
            } else {
                precond->update(K, scenario_.recycle);
            }
            rec.t_pc += seconds_since(t1);
            precond->check_operator(K);

            const auto t2 = std::chrono::steady_clock::now();
            auto [dx, stats] = gmres(K.matrix, rhs, *precond, gmres_options());
            rec.t_solve += seconds_since(t2);

            state_.d += dx;
            ++rec.newton_iterations;
            rec.solves.push_back(
                {stats.iterations, stats.final_relative, stats.final_absolute, stats.converged});
        }
        if (precond) coarse_apply_seconds_ += precond->coarse_apply_seconds();
        return rec;
    }

    /// Advance one backward-Euler step; returns its record.
    StepRecord advance_step() {
        const double t_next = state_.time + scenario_.dt;
        const ConstraintSet constraints = constraints_for(t_next);
        StepRecord rec = newton_solve(constraints);
        rec.time = t_next;
        state_.d_prev = state_.d;
        state_.time = t_next;
        return rec;
    }

    RunReport run(const RunOptions& options = {}) {
        RunReport report;
        const auto t0 = std::chrono::steady_clock::now();
        for (int step = 1; step <= scenario_.steps; ++step) {
            StepRecord rec = advance_step();
            rec.step = step;
            report.coarse_dim = std::max(report.coarse_dim, rec.coarse_dim);
            report.steps.push_back(rec);
            if (options.on_step) options.on_step(rec);
            if (options.dump_fields) dump_fields(options.out_dir, step);
            if (!rec.converged) {
                report.completed = false;
                report.failure = "Newton did not converge in step " + std::to_string(step);
                break;
            }
        }
        report.coarse_apply_seconds = coarse_apply_seconds_;
        report.t_total = seconds_since(t0);
        return report;
    }

    void dump_fields(const std::string& out_dir, int step) const {
        std::filesystem::create_directories(out_dir);
        char name[64];
        std::snprintf(name, sizeof(name), "fields_%04d.vtk", step);
        std::ofstream os(std::filesystem::path(out_dir) / name);
        write_vtk_fields(os, mesh_, state_, assembler_.geometry());
    }

  private:
    static double seconds_since(std::chrono::steady_clock::time_point t) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    }

    Scenario scenario_;
    Mesh mesh_;
    DofMap dofmap_;
    Assembler assembler_;
    LaserTracker laser_;
    State state_;
    std::shared_ptr<const SchwarzContext> ctx_;
    double coarse_apply_seconds_ = 0.0;
};

struct RunResult {
    RunReport report;
    State state;
};

inline RunResult time_loop(const Scenario& sc, const RunOptions& options = {}) {
    WeldingDriver driver(sc);
    RunResult result{driver.run(options), driver.state()};
    return result;
}

struct CompareRow {
    std::string name;
    Index coarse_dim = 0;
    double it_gmres = 0.0;
    double it_newton = 0.0;
    double t_pc = 0.0, t_solve = 0.0, t_total = 0.0;
    bool completed = false;
};

/// Run the comparison matrix: one full time loop per coarse-space combination.
inline std::vector<CompareRow> run_compare(const Scenario& base,
                                           const std::function<void(const CompareRow&)>& on_row = {}) {
    std::vector<CompareRow> rows;
    for (const auto& combo : base.compare_combinations) {
        Scenario sc = base;
        sc.coarse.displacement = combo.displacement;
        sc.coarse.temperature = combo.temperature;
        sc.coarse.rotations = combo.rotations;
        const RunResult result = time_loop(sc);
        CompareRow row;
        row.name = combo.name();
        row.coarse_dim = result.report.coarse_dim;
        row.it_gmres = result.report.it_gmres_mean();
        row.it_newton = result.report.it_newton_mean();
        row.t_pc = result.report.t_pc_total();
        row.t_solve = result.report.t_solve_total();
        row.t_total = result.report.t_total;
        row.completed = result.report.completed;
        rows.push_back(row);
        if (on_row) on_row(row);
    }
    return rows;
}

/// Comparison CSV: pc_type,coarse_dim,it_gmres,it_newton then the timing
/// columns (t_pc,t_solve,t_total) last.
inline void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os) {
    os << "pc_type,coarse_dim,it_gmres,it_newton,t_pc,t_solve,t_total\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%lld,%.9g,%.9g,%.6f,%.6f,%.6f\n", r.name.c_str(),
                      static_cast<long long>(r.coarse_dim), r.it_gmres, r.it_newton, r.t_pc, r.t_solve,
                      r.t_total);
        os << buf;
    }
}

} // namespace lbws
