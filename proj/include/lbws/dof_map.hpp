#pragma once

#include "lbws/common.hpp"
#include "lbws/mesh.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace lbws {

inline constexpr int kDofsPerNode = 4;  // u_x, u_y, u_z, theta
inline constexpr int kThetaComp = 3;

enum class FieldKind { displacement, temperature };

inline FieldKind field_of_dof(Index dof) {
    return dof % kDofsPerNode == kThetaComp ? FieldKind::temperature : FieldKind::displacement;
}

/// Value schedules for statically declared Dirichlet constraints. Per-step
/// laser constraints are not part of the DofMap; they are merged into the
/// ConstraintSet by the driver each time step.
enum class BcSchedule { zero, load };

struct StaticBc {
    Index node = 0;
    int component = 0;  // 0..2 displacement axis, 3 temperature
    BcSchedule schedule = BcSchedule::zero;
};

/// Boundary-condition description for build_dof_map. The default pattern is
/// the welding setup: u_y = 0 on the face y = 0, u_x = 0 on the line
/// y = 0 ^ x = 0, u_z = 0 on the line y = 0 ^ z = 0, and the u_y load
/// schedule on the face y = l_y. Extra constraints can be added explicitly.
struct BoundarySpec {
    bool clamp_base = false;
    bool load_face = false;
    std::vector<StaticBc> extra;

    static BoundarySpec none() { return {}; }
    static BoundarySpec welding() { return {true, true, {}}; }
};

/// Monolithic DOF map: node-interleaved (u_x,u_y,u_z,theta) per node, plus
/// the static Dirichlet sets. Immutable after construction.
class DofMap {
  public:
    DofMap(Index node_count, std::vector<StaticBc> displacement_bcs, std::vector<StaticBc> temperature_bcs)
        : node_count_(node_count),
          displacement_bcs_(std::move(displacement_bcs)),
          temperature_bcs_(std::move(temperature_bcs)) {
        std::set<std::pair<Index, int>> seen;
        auto check = [&](const StaticBc& bc) {
            if (bc.node < 0 || bc.node >= node_count_)
                throw std::invalid_argument("DofMap: constraint on non-existent node " + std::to_string(bc.node));
            if (bc.component < 0 || bc.component >= kDofsPerNode)
                throw std::invalid_argument("DofMap: invalid constraint component");
            if (!seen.insert({bc.node, bc.component}).second)
                throw std::invalid_argument("DofMap: (node, component) constrained twice: node " +
                                            std::to_string(bc.node));
        };
        for (const auto& bc : displacement_bcs_) check(bc);
        for (const auto& bc : temperature_bcs_) check(bc);
    }

    Index node_count() const { return node_count_; }
    Index dof_count() const { return node_count_ * kDofsPerNode; }
    static Index dof(Index node, int component) { return node * kDofsPerNode + component; }
    static Index node_of_dof(Index d) { return d / kDofsPerNode; }
    static int component_of_dof(Index d) { return static_cast<int>(d % kDofsPerNode); }

    const std::vector<StaticBc>& displacement_bcs() const { return displacement_bcs_; }
    const std::vector<StaticBc>& temperature_bcs() const { return temperature_bcs_; }

  private:
    Index node_count_;
    std::vector<StaticBc> displacement_bcs_;
    std::vector<StaticBc> temperature_bcs_;
};

inline DofMap build_dof_map(const Mesh& mesh, const BoundarySpec& spec = BoundarySpec::none()) {
    std::vector<StaticBc> ubc, tbc;
    const int nx = mesh.cells[0], ny = mesh.cells[1], nz = mesh.cells[2];
    if (spec.clamp_base) {
        for (int k = 0; k <= nz; ++k)
            for (int i = 0; i <= nx; ++i) {
                const Index node = mesh.node_index(i, 0, k);
                ubc.push_back({node, 1, BcSchedule::zero});
                if (i == 0) ubc.push_back({node, 0, BcSchedule::zero});
                if (k == 0) ubc.push_back({node, 2, BcSchedule::zero});
            }
    }
    if (spec.load_face) {
        for (int k = 0; k <= nz; ++k)
            for (int i = 0; i <= nx; ++i)
                ubc.push_back({mesh.node_index(i, ny, k), 1, BcSchedule::load});
    }
    for (const auto& bc : spec.extra)
        (bc.component == kThetaComp ? tbc : ubc).push_back(bc);
    return DofMap(mesh.node_count(), std::move(ubc), std::move(tbc));
}

/// Concrete Dirichlet data for one time step: constrained DOFs with their
/// scheduled target values (static schedules evaluated at the step time plus
/// the laser set). Built fresh by the driver each step.
class ConstraintSet {
  public:
    ConstraintSet() = default;
    explicit ConstraintSet(Index dof_count) : mask_(static_cast<std::size_t>(dof_count), 0) {}

    void add(Index dof, double value) {
        if (dof < 0 || dof >= static_cast<Index>(mask_.size()))
            throw std::invalid_argument("ConstraintSet: dof out of range");
        if (mask_[static_cast<std::size_t>(dof)])
            throw std::invalid_argument("ConstraintSet: dof constrained twice: " + std::to_string(dof));
        mask_[static_cast<std::size_t>(dof)] = 1;
        dofs_.push_back(dof);
        values_.push_back(value);
    }

    bool constrained(Index dof) const { return mask_.empty() ? false : mask_[static_cast<std::size_t>(dof)] != 0; }
    Index dof_count() const { return static_cast<Index>(mask_.size()); }
    std::size_t size() const { return dofs_.size(); }
    const std::vector<Index>& dofs() const { return dofs_; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<Index> dofs_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

} // namespace lbws
