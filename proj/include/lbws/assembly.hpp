#pragma once

#include "lbws/common.hpp"
#include "lbws/dof_map.hpp"
#include "lbws/materials.hpp"
#include "lbws/mesh.hpp"
#include "lbws/shape.hpp"

#include <atomic>
#include <stdexcept>

namespace lbws {

/// Nonlinear solution state: current iterate, previous-time-step copy, and
/// the backward-Euler step data. DOFs are node-interleaved (u_x,u_y,u_z,theta).
struct State {
    Eigen::VectorXd d;
    Eigen::VectorXd d_prev;
    double time = 0.0;
    double dt = 1e-3;
    double theta_ref = 20.0;  // reference temperature of the stress-free state

    static State uniform(Index dof_count, double theta0, double dt) {
        State s;
        s.d = Eigen::VectorXd::Zero(dof_count);
        for (Index n = 0; n < dof_count / kDofsPerNode; ++n) s.d[DofMap::dof(n, kThetaComp)] = theta0;
        s.d_prev = s.d;
        s.dt = dt;
        s.theta_ref = theta0;
        return s;
    }
};

/// Monolithic assembled operator. Dirichlet rows/columns are eliminated
/// symmetrically: constrained rows are identity rows, and the constraint
/// increment is moved to the right-hand side.
struct BlockMatrix {
    SparseRow matrix;
    std::vector<std::uint8_t> constrained;  // elimination mask, one flag per DOF
    std::uint64_t stamp = 0;

    Index rows() const { return matrix.rows(); }
    static FieldKind field_of(Index dof) { return field_of_dof(dof); }
    bool is_constrained(Index dof) const {
        return !constrained.empty() && constrained[static_cast<std::size_t>(dof)] != 0;
    }
};

inline std::uint64_t next_matrix_stamp() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

/// Mean-dilatation B-bar: the volumetric part of the strain operator is
/// replaced at every quadrature point by its element-volume average; the
/// deviatoric part is untouched.
inline std::vector<Eigen::Matrix<double, 6, 24>> bbar_strain_operator(const ShapeEval& shape) {
    const std::size_t nq = shape.points.size();
    std::vector<Eigen::Matrix<double, 6, 24>> plain(nq);
    Eigen::Matrix<double, 1, 24> dil_mean = Eigen::Matrix<double, 1, 24>::Zero();
    for (std::size_t q = 0; q < nq; ++q) {
        const auto& pt = shape.points[q];
        auto& b = plain[q];
        b.setZero();
        for (int a = 0; a < 8; ++a) {
            const double gx = pt.gradients(a, 0), gy = pt.gradients(a, 1), gz = pt.gradients(a, 2);
            b(0, 3 * a + 0) = gx;
            b(1, 3 * a + 1) = gy;
            b(2, 3 * a + 2) = gz;
            b(3, 3 * a + 0) = gz;  // 2*eps_13
            b(3, 3 * a + 2) = gx;
            b(4, 3 * a + 0) = gy;  // 2*eps_12
            b(4, 3 * a + 1) = gx;
            b(5, 3 * a + 1) = gz;  // 2*eps_23
            b(5, 3 * a + 2) = gy;
        }
        dil_mean += (pt.weight * pt.det_jacobian) * (b.row(0) + b.row(1) + b.row(2));
    }
    dil_mean /= shape.volume;
    for (std::size_t q = 0; q < nq; ++q) {
        auto& b = plain[q];
        const Eigen::Matrix<double, 1, 24> correction =
            (dil_mean - (b.row(0) + b.row(1) + b.row(2))) / 3.0;
        for (int r = 0; r < 3; ++r) b.row(r) += correction;
    }
    return plain;
}

/// Shape data and strain operators of one element; for the uniform box
/// meshes built here all elements are congruent, so one instance is shared.
struct ElementGeometry {
    ShapeEval shape;
    std::vector<Eigen::Matrix<double, 6, 24>> b_bar;       // per qp
    std::vector<Eigen::Matrix<double, 3, 8>> grad_theta;   // per qp, B_theta
};

inline ElementGeometry element_geometry(const QuadratureRule& rule, const std::array<Vec3, 8>& corners) {
    ElementGeometry g;
    g.shape = shape_eval(rule, corners);
    g.b_bar = bbar_strain_operator(g.shape);
    g.grad_theta.resize(g.shape.points.size());
    for (std::size_t q = 0; q < g.shape.points.size(); ++q)
        g.grad_theta[q] = g.shape.points[q].gradients.transpose();
    return g;
}

struct ElementMatrices {
    Eigen::Matrix<double, 24, 24> k_uu;
    Eigen::Matrix<double, 24, 8> k_ut;
    Eigen::Matrix<double, 8, 24> k_tu;
    Eigen::Matrix<double, 8, 8> k_tt;
    Eigen::Matrix<double, 24, 1> f_u;  // nonlinear residual F (R = -F)
    Eigen::Matrix<double, 8, 1> f_t;
};

/// The four coupled element blocks and the element residual at the current
/// state. Material parameters are evaluated at the quadrature-point
/// temperature of the current iterate; strain and temperature rates are
/// backward-Euler differences against the previous time step.
inline ElementMatrices element_blocks(Index elem, const State& state, const Mesh& mesh,
                                      const MaterialTable& mat, const ElementGeometry& geom) {
    if (!(state.dt > 0.0)) throw std::invalid_argument("element_blocks: dt must be positive");
    const auto nodes = mesh.element_nodes(elem);

    Eigen::Matrix<double, 24, 1> ue, ue_prev;
    Eigen::Matrix<double, 8, 1> te, te_prev;
    for (int a = 0; a < 8; ++a) {
        for (int c = 0; c < 3; ++c) {
            ue(3 * a + c) = state.d[DofMap::dof(nodes[static_cast<std::size_t>(a)], c)];
            ue_prev(3 * a + c) = state.d_prev[DofMap::dof(nodes[static_cast<std::size_t>(a)], c)];
        }
        te(a) = state.d[DofMap::dof(nodes[static_cast<std::size_t>(a)], kThetaComp)];
        te_prev(a) = state.d_prev[DofMap::dof(nodes[static_cast<std::size_t>(a)], kThetaComp)];
    }

    ElementMatrices out;
    out.k_uu.setZero();
    out.k_ut.setZero();
    out.k_tu.setZero();
    out.k_tt.setZero();
    out.f_u.setZero();
    out.f_t.setZero();

    const Voigt one = voigt_identity();
    const double inv_dt = 1.0 / state.dt;

    for (std::size_t q = 0; q < geom.shape.points.size(); ++q) {
        const auto& pt = geom.shape.points[q];
        const auto& bu = geom.b_bar[q];
        const auto& bt = geom.grad_theta[q];
        const double w = pt.weight * pt.det_jacobian;

        const double theta = pt.values.dot(te);
        const double theta_prev = pt.values.dot(te_prev);
        const double youngs = mat.youngs_modulus(theta);
        const double poisson = mat.poisson_ratio(theta);
        const double kappa = bulk_modulus(youngs, poisson);
        const double gamma = stress_temp_modulus(mat.expansion_coeff(theta), kappa);
        const Tangent tangent = elastic_tangent(youngs, poisson);
        const double cond = mat.conductivity_mm(theta);
        const double heat_cap = mat.volumetric_heat_capacity_mm(theta);

        const Voigt strain = bu * ue;
        const Voigt strain_prev = bu * ue_prev;
        const double tr_strain_rate = inv_dt * ((strain - strain_prev).head<3>().sum());
        const double theta_rate = inv_dt * (theta - theta_prev);
        const Eigen::Vector3d grad_theta = bt * te;

        const Eigen::Matrix<double, 24, 1> but_one = bu.transpose() * one;
        const Eigen::Matrix<double, 1, 24> one_bu = one.transpose() * bu;

        out.k_uu.noalias() += w * bu.transpose() * tangent * bu;
        out.k_ut.noalias() -= (w * gamma) * but_one * pt.values.transpose();
        out.k_tu.noalias() -= (w * inv_dt * gamma * theta) * pt.values * one_bu;
        out.k_tt.noalias() -= w * (bt.transpose() * (cond * bt)) +
                              (w * (gamma * tr_strain_rate + heat_cap * inv_dt)) *
                                  (pt.values * pt.values.transpose());

        const Voigt stress = tangent * strain - gamma * (theta - state.theta_ref) * one;
        out.f_u.noalias() += w * bu.transpose() * stress;
        out.f_t.noalias() -= w * (bt.transpose() * (cond * grad_theta) +
                                  (gamma * tr_strain_rate * theta + heat_cap * theta_rate) * pt.values);
    }
    return out;
}

/// Repeated-assembly engine: the sparsity pattern and per-element scatter
/// slots are computed once, every assemble() call only refills values.
class Assembler {
  public:
    Assembler(const Mesh& mesh, const DofMap& dofmap, QuadratureRule rule = gauss_2x2x2())
        : mesh_(mesh), dofmap_(dofmap), rule_(std::move(rule)) {
        geometry_ = element_geometry(rule_, mesh_.element_corners(0));
        build_pattern();
        build_slots();
    }

    const ElementGeometry& geometry() const { return geometry_; }
    const Mesh& mesh() const { return mesh_; }
    const DofMap& dof_map() const { return dofmap_; }

    /// Assemble the monolithic tangent and right-hand side R = -F with
    /// Dirichlet elimination; the RHS at constrained rows carries the
    /// constraint increment (scheduled value minus current value).
    std::pair<BlockMatrix, Eigen::VectorXd> assemble(const State& state, const MaterialTable& mat,
                                                     const ConstraintSet& constraints) const {
        const Index n = dofmap_.dof_count();
        if (state.d.size() != n || state.d_prev.size() != n)
            throw std::invalid_argument("assemble: state size does not match dof map");
        if (constraints.dof_count() != 0 && constraints.dof_count() != n)
            throw std::invalid_argument("assemble: constraint set size does not match dof map");

        BlockMatrix K;
        K.matrix = pattern_;
        double* values = K.matrix.valuePtr();
        std::fill(values, values + K.matrix.nonZeros(), 0.0);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

        for (Index e = 0; e < mesh_.element_count(); ++e) {
            const ElementMatrices em = element_blocks(e, state, mesh_, mat, geometry_);
            const auto nodes = mesh_.element_nodes(e);
            std::array<Index, 32> dofs;
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < kDofsPerNode; ++c)
                    dofs[static_cast<std::size_t>(kDofsPerNode * a + c)] =
                        DofMap::dof(nodes[static_cast<std::size_t>(a)], c);

            const std::int32_t* slots = &slots_[static_cast<std::size_t>(e) * 32 * 32];
            for (int r = 0; r < 32; ++r) {
                const int ra = r / 4, rc = r % 4;
                for (int c = 0; c < 32; ++c) {
                    const int ca = c / 4, cc = c % 4;
                    double v;
                    if (rc < 3)
                        v = cc < 3 ? em.k_uu(3 * ra + rc, 3 * ca + cc) : em.k_ut(3 * ra + rc, ca);
                    else
                        v = cc < 3 ? em.k_tu(ra, 3 * ca + cc) : em.k_tt(ra, ca);
                    values[slots[r * 32 + c]] += v;
                }
                const double f = rc < 3 ? em.f_u(3 * ra + rc) : em.f_t(ra);
                rhs[dofs[static_cast<std::size_t>(r)]] -= f;  // R = -F
            }
        }

        eliminate(K, rhs, state, constraints);
        K.stamp = next_matrix_stamp();
        return {std::move(K), std::move(rhs)};
    }

  private:
    void eliminate(BlockMatrix& K, Eigen::VectorXd& rhs, const State& state,
                   const ConstraintSet& constraints) const {
        const Index n = dofmap_.dof_count();
        K.constrained.assign(static_cast<std::size_t>(n), 0);
        Eigen::VectorXd increment = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            const Index dof = constraints.dofs()[i];
            K.constrained[static_cast<std::size_t>(dof)] = 1;
            increment[dof] = constraints.values()[i] - state.d[dof];
        }
        if (constraints.size() == 0) return;

        double* values = K.matrix.valuePtr();
        const int* cols = K.matrix.innerIndexPtr();
        const int* rowptr = K.matrix.outerIndexPtr();
        for (Index r = 0; r < n; ++r) {
            if (K.constrained[static_cast<std::size_t>(r)]) {
                for (int s = rowptr[r]; s < rowptr[r + 1]; ++s)
                    values[s] = cols[s] == r ? 1.0 : 0.0;
                rhs[r] = increment[r];
            } else {
                for (int s = rowptr[r]; s < rowptr[r + 1]; ++s) {
                    if (K.constrained[static_cast<std::size_t>(cols[s])]) {
                        rhs[r] -= values[s] * increment[cols[s]];
                        values[s] = 0.0;
                    }
                }
            }
        }
    }

    void build_pattern() {
        const Index n = dofmap_.dof_count();
        const int nx = mesh_.cells[0], ny = mesh_.cells[1], nz = mesh_.cells[2];
        auto neighbors_of = [&](Index node, auto&& emit) {
            const auto ijk = mesh_.node_coords_ijk(node);
            for (int dk = -1; dk <= 1; ++dk)
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const int i = ijk[0] + di, j = ijk[1] + dj, k = ijk[2] + dk;
                        if (i < 0 || j < 0 || k < 0 || i > nx || j > ny || k > nz) continue;
                        emit(mesh_.node_index(i, j, k));
                    }
        };
        pattern_ = SparseRow(n, n);
        std::vector<int> row_sizes(static_cast<std::size_t>(n), 0);
        for (Index node = 0; node < dofmap_.node_count(); ++node) {
            int deg = 0;
            neighbors_of(node, [&](Index) { ++deg; });
            for (int c = 0; c < kDofsPerNode; ++c)
                row_sizes[static_cast<std::size_t>(DofMap::dof(node, c))] = deg * kDofsPerNode;
        }
        pattern_.reserve(row_sizes);
        for (Index node = 0; node < dofmap_.node_count(); ++node) {
            for (int c = 0; c < kDofsPerNode; ++c) {
                const Index row = DofMap::dof(node, c);
                neighbors_of(node, [&](Index m) {
                    for (int e = 0; e < kDofsPerNode; ++e)
                        pattern_.insert(row, DofMap::dof(m, e)) = 0.0;
                });
            }
        }
        pattern_.makeCompressed();
    }

    void build_slots() {
        slots_.resize(static_cast<std::size_t>(mesh_.element_count()) * 32 * 32);
        const int* cols = pattern_.innerIndexPtr();
        const int* rowptr = pattern_.outerIndexPtr();
        for (Index e = 0; e < mesh_.element_count(); ++e) {
            const auto nodes = mesh_.element_nodes(e);
            std::array<Index, 32> dofs;
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < kDofsPerNode; ++c)
                    dofs[static_cast<std::size_t>(kDofsPerNode * a + c)] =
                        DofMap::dof(nodes[static_cast<std::size_t>(a)], c);
            std::int32_t* out = &slots_[static_cast<std::size_t>(e) * 32 * 32];
            for (int r = 0; r < 32; ++r) {
                const Index row = dofs[static_cast<std::size_t>(r)];
                for (int c = 0; c < 32; ++c) {
                    const Index col = dofs[static_cast<std::size_t>(c)];
                    const int* lo = cols + rowptr[row];
                    const int* hi = cols + rowptr[row + 1];
                    const int* it = std::lower_bound(lo, hi, static_cast<int>(col));
                    out[r * 32 + c] = static_cast<std::int32_t>(it - cols);
                }
            }
        }
    }

    const Mesh& mesh_;
    const DofMap& dofmap_;
    QuadratureRule rule_;
    ElementGeometry geometry_;
    SparseRow pattern_;
    std::vector<std::int32_t> slots_;
};

/// One-off convenience wrapper around Assembler.
inline std::pair<BlockMatrix, Eigen::VectorXd> assemble(const State& state, const Mesh& mesh,
                                                        const DofMap& dofmap, const MaterialTable& mat,
                                                        const ConstraintSet& constraints) {
    return Assembler(mesh, dofmap).assemble(state, mat, constraints);
}

} // namespace lbws
