// Test-only oracles: straightforward independent implementations (dense,
// quadrature-loop, no sparsity) used to verify the production path. These
// deliberately re-derive shapes, strain operators, and the preconditioner
// formula instead of calling the library versions.
#pragma once

#include "lbws/assembly.hpp"
#include "lbws/dof_map.hpp"
#include "lbws/materials.hpp"
#include "lbws/mesh.hpp"
#include "lbws/schwarz.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace oracle {

using lbws::Index;

// ---------------------------------------------------------------------------
// trilinear shapes, written out directly
// ---------------------------------------------------------------------------

inline void shapes_at(double xi, double eta, double zeta, double n[8], double dn[8][3]) {
    const double sx[8] = {-1, 1, -1, 1, -1, 1, -1, 1};
    const double sy[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
    const double sz[8] = {-1, -1, -1, -1, 1, 1, 1, 1};
    for (int l = 0; l < 8; ++l) {
        n[l] = (1 + sx[l] * xi) * (1 + sy[l] * eta) * (1 + sz[l] * zeta) / 8.0;
        dn[l][0] = sx[l] * (1 + sy[l] * eta) * (1 + sz[l] * zeta) / 8.0;
        dn[l][1] = (1 + sx[l] * xi) * sy[l] * (1 + sz[l] * zeta) / 8.0;
        dn[l][2] = (1 + sx[l] * xi) * (1 + sy[l] * eta) * sz[l] / 8.0;
    }
}

struct QuadPoint {
    double xi, eta, zeta, weight;
};

inline std::vector<QuadPoint> gauss8() {
    const double g = 1.0 / std::sqrt(3.0);
    std::vector<QuadPoint> pts;
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i)
                pts.push_back({(2 * i - 1) * g, (2 * j - 1) * g, (2 * k - 1) * g, 1.0});
    return pts;
}

// physical shape data of one element at one quadrature point
struct PointData {
    double n[8];
    double grad[8][3];  // physical
    double detj;
};

inline PointData physical_point(const std::array<lbws::Vec3, 8>& corners, const QuadPoint& qp) {
    PointData out{};
    double dn[8][3];
    shapes_at(qp.xi, qp.eta, qp.zeta, out.n, dn);
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
    for (int l = 0; l < 8; ++l)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) jac(a, b) += corners[static_cast<std::size_t>(l)][a] * dn[l][b];
    out.detj = jac.determinant();
    const Eigen::Matrix3d inv = jac.inverse();
    for (int l = 0; l < 8; ++l)
        for (int a = 0; a < 3; ++a) {
            out.grad[l][a] = 0.0;
            for (int b = 0; b < 3; ++b) out.grad[l][a] += inv(b, a) * dn[l][b];
        }
    return out;
}

// 6x24 strain operator in the [11,22,33,13,12,23] engineering-shear ordering
inline Eigen::MatrixXd strain_matrix(const PointData& pd) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 24);
    for (int a = 0; a < 8; ++a) {
        const double gx = pd.grad[a][0], gy = pd.grad[a][1], gz = pd.grad[a][2];
        b(0, 3 * a + 0) = gx;
        b(1, 3 * a + 1) = gy;
        b(2, 3 * a + 2) = gz;
        b(3, 3 * a + 0) = gz;
        b(3, 3 * a + 2) = gx;
        b(4, 3 * a + 0) = gy;
        b(4, 3 * a + 1) = gx;
        b(5, 3 * a + 1) = gz;
        b(5, 3 * a + 2) = gy;
    }
    return b;
}

// mean-dilatation modification, independent implementation
inline std::vector<Eigen::MatrixXd> bbar_matrices(const std::array<lbws::Vec3, 8>& corners) {
    const auto pts = gauss8();
    std::vector<Eigen::MatrixXd> bs;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(24);
    double volume = 0.0;
    for (const auto& qp : pts) {
        const PointData pd = physical_point(corners, qp);
        Eigen::MatrixXd b = strain_matrix(pd);
        mean += qp.weight * pd.detj * (b.row(0) + b.row(1) + b.row(2));
        volume += qp.weight * pd.detj;
        bs.push_back(std::move(b));
    }
    mean /= volume;
    for (auto& b : bs) {
        const Eigen::RowVectorXd corr = (mean - (b.row(0) + b.row(1) + b.row(2))) / 3.0;
        for (int r = 0; r < 3; ++r) b.row(r) += corr;
    }
    return bs;
}

inline Eigen::MatrixXd hooke(double youngs, double poisson) {
    const double lame = youngs * poisson / ((1 + poisson) * (1 - 2 * poisson));
    const double mu = youngs / (2 * (1 + poisson));
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) c(a, b) = lame;
        c(a, a) += 2 * mu;
        c(a + 3, a + 3) = mu;
    }
    return c;
}

// ---------------------------------------------------------------------------
// dense element blocks + residual
// ---------------------------------------------------------------------------

struct DenseElement {
    Eigen::MatrixXd kuu{24, 24}, kut{24, 8}, ktu{8, 24}, ktt{8, 8};
    Eigen::VectorXd fu{24}, ft{8};
};

inline DenseElement dense_element(const std::array<lbws::Vec3, 8>& corners, const Eigen::VectorXd& ue,
                                  const Eigen::VectorXd& ue_prev, const Eigen::VectorXd& te,
                                  const Eigen::VectorXd& te_prev, double dt, double theta_ref,
                                  const lbws::MaterialTable& mat) {
    DenseElement out;
    out.kuu.setZero();
    out.kut.setZero();
    out.ktu.setZero();
    out.ktt.setZero();
    out.fu.setZero();
    out.ft.setZero();
    const auto pts = gauss8();
    const auto bbars = bbar_matrices(corners);
    Eigen::VectorXd one(6);
    one << 1, 1, 1, 0, 0, 0;

    for (std::size_t q = 0; q < pts.size(); ++q) {
        const PointData pd = physical_point(corners, pts[q]);
        const Eigen::MatrixXd& bu = bbars[q];
        Eigen::MatrixXd btheta = Eigen::MatrixXd::Zero(3, 8);
        for (int a = 0; a < 8; ++a)
            for (int c = 0; c < 3; ++c) btheta(c, a) = pd.grad[a][c];
        Eigen::VectorXd nvec(8);
        for (int a = 0; a < 8; ++a) nvec(a) = pd.n[a];
        const double w = pts[q].weight * pd.detj;

        const double theta = nvec.dot(te);
        const double theta_prev = nvec.dot(te_prev);
        const double youngs = mat.youngs_modulus(theta);
        const double poisson = mat.poisson_ratio(theta);
        const double kappa = youngs / (3 * (1 - 2 * poisson));
        const double gamma = 3 * mat.expansion_coeff(theta) * kappa;
        const double cond = mat.conductivity_mm(theta);
        const double rhoc = mat.volumetric_heat_capacity_mm(theta);
        const Eigen::MatrixXd c = hooke(youngs, poisson);

        const Eigen::VectorXd strain = bu * ue;
        const Eigen::VectorXd strain_prev = bu * ue_prev;
        const double tr_rate = (strain.head(3).sum() - strain_prev.head(3).sum()) / dt;
        const double theta_rate = (theta - theta_prev) / dt;

        out.kuu += w * bu.transpose() * c * bu;
        out.kut -= w * gamma * (bu.transpose() * one) * nvec.transpose();
        out.ktu -= (w / dt) * theta * gamma * nvec * (one.transpose() * bu);
        out.ktt -= w * (btheta.transpose() * cond * btheta +
                        (gamma * tr_rate + rhoc / dt) * nvec * nvec.transpose());

        const Eigen::VectorXd stress = c * strain - gamma * (theta - theta_ref) * one;
        out.fu += w * bu.transpose() * stress;
        out.ft -= w * (btheta.transpose() * cond * (btheta * te) +
                       (gamma * tr_rate * theta + rhoc * theta_rate) * nvec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// dense global assembly (quadrature loop, no sparsity) with elimination
// ---------------------------------------------------------------------------

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> dense_assemble(const lbws::Mesh& mesh,
                                                                  const lbws::State& state,
                                                                  const lbws::MaterialTable& mat,
                                                                  const lbws::ConstraintSet& constraints) {
    const Index n = mesh.node_count() * lbws::kDofsPerNode;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    for (Index e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        Eigen::VectorXd ue(24), up(24), te(8), tp(8);
        for (int a = 0; a < 8; ++a) {
            for (int c = 0; c < 3; ++c) {
                ue(3 * a + c) = state.d[lbws::DofMap::dof(nodes[static_cast<std::size_t>(a)], c)];
                up(3 * a + c) = state.d_prev[lbws::DofMap::dof(nodes[static_cast<std::size_t>(a)], c)];
            }
            te(a) = state.d[lbws::DofMap::dof(nodes[static_cast<std::size_t>(a)], 3)];
            tp(a) = state.d_prev[lbws::DofMap::dof(nodes[static_cast<std::size_t>(a)], 3)];
        }
        const DenseElement em =
            dense_element(mesh.element_corners(e), ue, up, te, tp, state.dt, state.theta_ref, mat);
        for (int ra = 0; ra < 8; ++ra)
            for (int rc = 0; rc < 4; ++rc) {
                const Index row = lbws::DofMap::dof(nodes[static_cast<std::size_t>(ra)], rc);
                rhs[row] -= rc < 3 ? em.fu(3 * ra + rc) : em.ft(ra);
                for (int ca = 0; ca < 8; ++ca)
                    for (int cc = 0; cc < 4; ++cc) {
                        const Index col = lbws::DofMap::dof(nodes[static_cast<std::size_t>(ca)], cc);
                        double v;
                        if (rc < 3)
                            v = cc < 3 ? em.kuu(3 * ra + rc, 3 * ca + cc) : em.kut(3 * ra + rc, ca);
                        else
                            v = cc < 3 ? em.ktu(ra, 3 * ca + cc) : em.ktt(ra, ca);
                        K(row, col) += v;
                    }
            }
    }

    if (constraints.size() > 0) {
        Eigen::VectorXd inc = Eigen::VectorXd::Zero(n);
        std::vector<bool> fixed(static_cast<std::size_t>(n), false);
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            fixed[static_cast<std::size_t>(constraints.dofs()[i])] = true;
            inc[constraints.dofs()[i]] = constraints.values()[i] - state.d[constraints.dofs()[i]];
        }
        for (Index r = 0; r < n; ++r) {
            if (fixed[static_cast<std::size_t>(r)]) {
                K.row(r).setZero();
                K(r, r) = 1.0;
                rhs[r] = inc[r];
            } else {
                for (Index c = 0; c < n; ++c)
                    if (fixed[static_cast<std::size_t>(c)]) {
                        rhs[r] -= K(r, c) * inc[c];
                        K(r, c) = 0.0;
                    }
            }
        }
    }
    return {K, rhs};
}

// ---------------------------------------------------------------------------
// brute-force interface classification by node-set enumeration
// ---------------------------------------------------------------------------

struct BruteClasses {
    std::map<std::vector<int>, std::vector<Index>> classes;  // subdomain set -> nodes
    int faces = 0, edges = 0, vertices = 0;
};

inline BruteClasses brute_classify(const lbws::Mesh& mesh, std::array<int, 3> grid) {
    const int sx = mesh.cells[0] / grid[0], sy = mesh.cells[1] / grid[1], sz = mesh.cells[2] / grid[2];
    std::map<std::vector<int>, std::vector<Index>> groups;
    for (Index node = 0; node < mesh.node_count(); ++node) {
        const auto ijk = mesh.node_coords_ijk(node);
        std::vector<int> subs;
        for (int dz = -1; dz <= 0; ++dz)
            for (int dy = -1; dy <= 0; ++dy)
                for (int dx = -1; dx <= 0; ++dx) {
                    const int ei = ijk[0] + dx, ej = ijk[1] + dy, ek = ijk[2] + dz;
                    if (ei < 0 || ej < 0 || ek < 0 || ei >= mesh.cells[0] || ej >= mesh.cells[1] ||
                        ek >= mesh.cells[2])
                        continue;
                    const int s = (ei / sx) + grid[0] * ((ej / sy) + grid[1] * (ek / sz));
                    if (std::find(subs.begin(), subs.end(), s) == subs.end()) subs.push_back(s);
                }
        std::sort(subs.begin(), subs.end());
        if (subs.size() >= 2) groups[subs].push_back(node);
    }
    BruteClasses out;
    out.classes = std::move(groups);
    for (const auto& [subs, nodes] : out.classes) {
        if (subs.size() == 2) ++out.faces;
        else if (nodes.size() == 1) ++out.vertices;
        else ++out.edges;
    }
    return out;
}

// ---------------------------------------------------------------------------
// dense two-level Schwarz operator assembled term by term from the formula
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd dense_schwarz_operator(const lbws::BlockMatrix& K, const lbws::Partition& part,
                                              const Eigen::MatrixXd& phi, bool two_level,
                                              bool restricted) {
    const Index n = K.rows();
    const Eigen::MatrixXd kd = Eigen::MatrixXd(K.matrix);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);

    if (two_level && phi.cols() > 0) {
        const Eigen::MatrixXd k0 = phi.transpose() * kd * phi;
        b += phi * k0.inverse() * phi.transpose();
    }
    for (std::size_t s = 0; s < part.overlap_nodes.size(); ++s) {
        std::vector<Index> dofs;
        for (Index node : part.overlap_nodes[s])
            for (int c = 0; c < lbws::kDofsPerNode; ++c) dofs.push_back(lbws::DofMap::dof(node, c));
        const Index m = static_cast<Index>(dofs.size());
        Eigen::MatrixXd ki(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
                ki(i, j) = kd(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd inv = ki.inverse();
        for (Index i = 0; i < m; ++i) {
            const Index gi = dofs[static_cast<std::size_t>(i)];
            if (restricted &&
                part.node_owner[static_cast<std::size_t>(lbws::DofMap::node_of_dof(gi))] !=
                    static_cast<int>(s))
                continue;
            for (Index j = 0; j < m; ++j) b(gi, dofs[static_cast<std::size_t>(j)]) += inv(i, j);
        }
    }
    return b;
}

// nodal rigid-body vector over the whole mesh (translations k=0..2,
// rotations k=3..5 about the given center)
inline Eigen::VectorXd rigid_mode(const lbws::Mesh& mesh, int k, const lbws::Vec3& center) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.node_count() * lbws::kDofsPerNode);
    for (Index node = 0; node < mesh.node_count(); ++node) {
        const lbws::Vec3 rel = mesh.node_position(node) - center;
        lbws::Vec3 u = lbws::Vec3::Zero();
        if (k < 3)
            u[k] = 1.0;
        else if (k == 3)
            u = {rel.y(), -rel.x(), 0};
        else if (k == 4)
            u = {-rel.z(), 0, rel.x()};
        else
            u = {0, rel.z(), -rel.y()};
        for (int c = 0; c < 3; ++c) v[lbws::DofMap::dof(node, c)] = u[c];
    }
    return v;
}

} // namespace oracle
