#pragma once

#include "lbws/assembly.hpp"
#include "lbws/common.hpp"
#include "lbws/decomposition.hpp"
#include "lbws/interface_split.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <optional>
#include <ostream>

namespace lbws {

struct CoarseConfig {
    CoarseVariant displacement = CoarseVariant::gdsw_star;
    CoarseVariant temperature = CoarseVariant::rgdsw;
    bool rotations = true;
    /// Rotation center, default the domain origin (a box corner). A center on
    /// an interface axis of a symmetric decomposition would zero out whole
    /// rotation columns and shrink the coarse space; a generic center only
    /// changes conditioning, since center shifts stay inside the span of the
    /// component's translations.
    std::optional<std::array<double, 3>> rotation_center;
    double truncation_tol = 1e-4;

    Vec3 center(const Mesh& mesh) const {
        (void)mesh;
        if (rotation_center) return {(*rotation_center)[0], (*rotation_center)[1], (*rotation_center)[2]};
        return Vec3::Zero();
    }
};

enum class CoarseMode { translation_x, translation_y, translation_z, rotation_1, rotation_2, rotation_3, constant };

inline const char* to_string(CoarseMode m) {
    switch (m) {
        case CoarseMode::translation_x: return "t_x";
        case CoarseMode::translation_y: return "t_y";
        case CoarseMode::translation_z: return "t_z";
        case CoarseMode::rotation_1: return "r_1";
        case CoarseMode::rotation_2: return "r_2";
        case CoarseMode::rotation_3: return "r_3";
        case CoarseMode::constant: return "const";
    }
    return "?";
}

struct ColumnMeta {
    FieldKind field = FieldKind::displacement;
    int component = 0;  // index into the field's ComponentSet
    CoarseMode mode = CoarseMode::translation_x;
};

/// The coarse basis: sparse columns over the full DOF space (constrained rows
/// stay zero), one column per component and null-space mode.
struct CoarseBasis {
    SparseCol phi;
    std::vector<ColumnMeta> columns;
    Index n_displacement = 0;
    Index n_temperature = 0;

    Index size() const { return static_cast<Index>(columns.size()); }

    void dump_metadata_json(std::ostream& os) const {
        os << "[";
        for (Index j = 0; j < size(); ++j) {
            const auto& meta = columns[static_cast<std::size_t>(j)];
            os << (j ? ",\n " : "\n ") << "{\"column\":" << j << ",\"field\":\""
               << (meta.field == FieldKind::displacement ? "u" : "theta") << "\",\"component\":"
               << meta.component << ",\"mode\":\"" << to_string(meta.mode) << "\",\"nonzeros\":"
               << phi.col(j).nonZeros() << "}";
        }
        os << "\n]\n";
    }
};

/// All free DOFs living on interface nodes, per the current elimination mask.
inline std::vector<Index> interface_free_dofs(const Partition& part, const BlockMatrix& K) {
    std::vector<Index> dofs;
    for (Index node : part.interface_nodes)
        for (int c = 0; c < kDofsPerNode; ++c) {
            const Index d = DofMap::dof(node, c);
            if (!K.is_constrained(d)) dofs.push_back(d);
        }
    return dofs;
}

/// Interior grouping by owning subdomain (interior nodes belong to exactly one).
inline std::vector<int> interior_owner_groups(const Partition& part, Index dof_count) {
    std::vector<int> group(static_cast<std::size_t>(dof_count), -1);
    for (Index d = 0; d < dof_count; ++d) {
        const Index node = DofMap::node_of_dof(d);
        const auto& subs = part.node_subdomains[static_cast<std::size_t>(node)];
        if (subs.size() == 1) group[static_cast<std::size_t>(d)] = subs.front();
    }
    // interface/constrained roles are decided by split_interface; give shared
    // nodes their owner so every dof has a defined group if needed
    for (Index d = 0; d < dof_count; ++d)
        if (group[static_cast<std::size_t>(d)] < 0)
            group[static_cast<std::size_t>(d)] =
                part.node_owner[static_cast<std::size_t>(DofMap::node_of_dof(d))];
    return group;
}

inline InterfaceSplit build_interface_split(const BlockMatrix& K, const Partition& part) {
    // pad the grouping to the full subdomain count even if trailing subdomains
    // have no interior dofs
    std::vector<int> group = interior_owner_groups(part, K.rows());
    auto split = split_interface(K, interface_free_dofs(part, K), group);
    split.interior_dofs.resize(static_cast<std::size_t>(part.subdomain_count()));
    return split;
}

namespace detail {

/// Nodal 4-vector of one coarse mode at a node position relative to the center.
inline Eigen::Vector4d mode_values(CoarseMode mode, const Vec3& rel) {
    switch (mode) {
        case CoarseMode::translation_x: return {1, 0, 0, 0};
        case CoarseMode::translation_y: return {0, 1, 0, 0};
        case CoarseMode::translation_z: return {0, 0, 1, 0};
        case CoarseMode::rotation_1: return {rel.y(), -rel.x(), 0, 0};
        case CoarseMode::rotation_2: return {-rel.z(), 0, rel.x(), 0};
        case CoarseMode::rotation_3: return {0, rel.z(), -rel.y(), 0};
        case CoarseMode::constant: return {0, 0, 0, 1};
    }
    return Eigen::Vector4d::Zero();
}

} // namespace detail

/// Interface values of the coarse basis columns: null-space modes filled on
/// the component nodes, scaled by the component weights, zero elsewhere.
/// Columns whose values are fully eliminated by Dirichlet constraints are
/// dropped. Returned columns are interface-only; extension fills interiors.
inline CoarseBasis interface_values(const ComponentSet& comp_u, const ComponentSet& comp_theta,
                                    const CoarseConfig& config, const Mesh& mesh, const BlockMatrix& K) {
    CoarseBasis basis;
    const Vec3 center = config.center(mesh);
    std::vector<Eigen::Triplet<double>> trips;
    Index col = 0;

    auto emit = [&](const Component& comp, int comp_id, FieldKind field, CoarseMode mode) {
        bool any = false;
        for (const auto& [node, weight] : comp.nodes) {
            const Eigen::Vector4d v = detail::mode_values(mode, mesh.node_position(node) - center);
            for (int c = 0; c < kDofsPerNode; ++c) {
                if (v[c] == 0.0) continue;
                const bool theta_dof = c == kThetaComp;
                if ((field == FieldKind::temperature) != theta_dof) continue;
                const Index dof = DofMap::dof(node, c);
                if (K.is_constrained(dof)) continue;
                trips.emplace_back(static_cast<int>(dof), static_cast<int>(col), weight * v[c]);
                any = true;
            }
        }
        if (any) {
            basis.columns.push_back({field, comp_id, mode});
            ++col;
        } else {
            // fully eliminated by Dirichlet constraints: drop, rewind triplets
            while (!trips.empty() && trips.back().col() == static_cast<int>(col)) trips.pop_back();
        }
    };

    std::vector<CoarseMode> u_modes = {CoarseMode::translation_x, CoarseMode::translation_y,
                                       CoarseMode::translation_z};
    if (config.rotations) {
        u_modes.push_back(CoarseMode::rotation_1);
        u_modes.push_back(CoarseMode::rotation_2);
        u_modes.push_back(CoarseMode::rotation_3);
    }
    for (std::size_t i = 0; i < comp_u.components.size(); ++i)
        for (CoarseMode mode : u_modes)
            emit(comp_u.components[i], static_cast<int>(i), FieldKind::displacement, mode);
    basis.n_displacement = col;
    for (std::size_t i = 0; i < comp_theta.components.size(); ++i)
        emit(comp_theta.components[i], static_cast<int>(i), FieldKind::temperature, CoarseMode::constant);
    basis.n_temperature = col - basis.n_displacement;

    basis.phi = SparseCol(K.rows(), col);
    basis.phi.setFromTriplets(trips.begin(), trips.end());
    return basis;
}

/// Factorized interior blocks of the operator, one per subdomain.
struct InteriorFactorization {
    std::vector<std::unique_ptr<Eigen::SparseLU<SparseCol>>> blocks;
    const InterfaceSplit* split = nullptr;
};

inline InteriorFactorization factor_interiors(const BlockMatrix& K, const InterfaceSplit& split,
                                              int threads = 1) {
    InteriorFactorization fact;
    fact.split = &split;
    const std::size_t n_groups = split.interior_dofs.size();
    fact.blocks.resize(n_groups);
    std::vector<std::string> errors(n_groups);
    detail::parallel_for(static_cast<Index>(n_groups), threads, [&](Index g) {
        const auto& dofs = split.interior_dofs[static_cast<std::size_t>(g)];
        if (dofs.empty()) return;
        SparseCol block = extract_block(K.matrix, dofs, dofs);
        auto lu = std::make_unique<Eigen::SparseLU<SparseCol>>();
        lu->compute(block);
        if (lu->info() != Eigen::Success) {
            errors[static_cast<std::size_t>(g)] =
                "factor_interiors: singular interior block of subdomain " + std::to_string(g);
            return;
        }
        fact.blocks[static_cast<std::size_t>(g)] = std::move(lu);
    });
    for (const auto& err : errors)
        if (!err.empty()) throw factorization_error(err);
    return fact;
}

/// Solve the block-triangular extension problem for every column: interior
/// values complement the given interface values so that the interior residual
/// vanishes; only subdomains adjacent to a column's component are touched.
/// Afterwards the cross-field blocks are removed (set remove_cross_field =
/// false to inspect the raw monolithic extension).
inline void extend(const BlockMatrix& K, const InterfaceSplit& split, const InteriorFactorization& fact,
                   const ComponentSet& comp_u, const ComponentSet& comp_theta, CoarseBasis& basis,
                   bool remove_cross_field = true, int threads = 1) {
    const Index n = K.rows();
    const Index ncols = basis.size();
    std::vector<std::vector<Eigen::Triplet<double>>> extra(static_cast<std::size_t>(ncols));

    detail::parallel_for(ncols, threads, [&](Index j) {
        const auto& meta = basis.columns[static_cast<std::size_t>(j)];
        const Component& comp = meta.field == FieldKind::displacement
                                    ? comp_u.components[static_cast<std::size_t>(meta.component)]
                                    : comp_theta.components[static_cast<std::size_t>(meta.component)];
        Eigen::VectorXd scatter = Eigen::VectorXd::Zero(n);
        for (SparseCol::InnerIterator it(basis.phi, j); it; ++it) scatter[it.row()] = it.value();

        for (int g : comp.subdomains) {
            const auto& dofs = split.interior_dofs[static_cast<std::size_t>(g)];
            if (dofs.empty() || !fact.blocks[static_cast<std::size_t>(g)]) continue;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(dofs.size()));
            bool any = false;
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                double acc = 0.0;
                for (SparseRow::InnerIterator it(K.matrix, dofs[i]); it; ++it)
                    acc += it.value() * scatter[it.col()];
                if (acc != 0.0) any = true;
                rhs[static_cast<Index>(i)] = acc;
            }
            if (!any) continue;
            const Eigen::VectorXd interior = -fact.blocks[static_cast<std::size_t>(g)]->solve(rhs);
            const bool want_theta = meta.field == FieldKind::temperature;
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                if (interior[static_cast<Index>(i)] == 0.0) continue;
                if (remove_cross_field &&
                    (DofMap::component_of_dof(dofs[i]) == kThetaComp) != want_theta)
                    continue;
                extra[static_cast<std::size_t>(j)].emplace_back(static_cast<int>(dofs[i]),
                                                                static_cast<int>(j),
                                                                interior[static_cast<Index>(i)]);
            }
        }
    });

    std::vector<Eigen::Triplet<double>> trips;
    for (Index j = 0; j < ncols; ++j)
        for (SparseCol::InnerIterator it(basis.phi, j); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
    for (auto& per_col : extra)
        trips.insert(trips.end(), per_col.begin(), per_col.end());
    basis.phi = SparseCol(n, ncols);
    basis.phi.setFromTriplets(trips.begin(), trips.end());
}

/// Zero all entries of magnitude below tol (absolute threshold).
inline void truncate(CoarseBasis& basis, double tol) {
    if (tol < 0.0) throw std::invalid_argument("truncate: tolerance must be >= 0");
    if (tol == 0.0) return;
    basis.phi.prune([tol](Index, Index, double v) { return std::abs(v) >= tol; });
}

/// Galerkin coarse operator.
inline SparseCol galerkin(const BlockMatrix& K, const CoarseBasis& basis) {
    SparseCol k_phi = K.matrix * basis.phi;
    SparseCol k0 = basis.phi.transpose() * k_phi;
    k0.makeCompressed();
    return k0;
}

/// Full pipeline: interface values, extension, cross-field removal,
/// truncation. The Galerkin product is applied separately by the caller.
inline CoarseBasis build_coarse_basis(const BlockMatrix& K, const Partition& part,
                                      const InterfaceSplit& split, const ComponentSet& comp_u,
                                      const ComponentSet& comp_theta, const CoarseConfig& config,
                                      const Mesh& mesh, int threads = 1) {
    (void)part;
    CoarseBasis basis = interface_values(comp_u, comp_theta, config, mesh, K);
    const InteriorFactorization fact = factor_interiors(K, split, threads);
    extend(K, split, fact, comp_u, comp_theta, basis, /*remove_cross_field=*/true, threads);
    truncate(basis, config.truncation_tol);
    return basis;
}

} // namespace lbws
