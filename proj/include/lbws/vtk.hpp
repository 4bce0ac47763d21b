#pragma once

#include "lbws/assembly.hpp"
#include "lbws/common.hpp"
#include "lbws/mesh.hpp"

#include <ostream>

namespace lbws {

/// Legacy-VTK unstructured-grid dump: node temperature, displacement norm,
/// and per-element strain component eps_22 (element average).
inline void write_vtk_fields(std::ostream& os, const Mesh& mesh, const State& state,
                             const ElementGeometry& geometry) {
    os << "# vtk DataFile Version 3.0\n";
    os << "thermo-elastic fields\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.node_count() << " double\n";
    for (Index n = 0; n < mesh.node_count(); ++n) {
        const Vec3 p = mesh.node_position(n);
        os << p.x() << " " << p.y() << " " << p.z() << "\n";
    }
    // VTK hexahedron corner ordering differs from the lexicographic local one
    static constexpr int kVtkOrder[8] = {0, 1, 3, 2, 4, 5, 7, 6};
    os << "CELLS " << mesh.element_count() << " " << mesh.element_count() * 9 << "\n";
    for (Index e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        os << 8;
        for (int l : kVtkOrder) os << " " << nodes[static_cast<std::size_t>(l)];
        os << "\n";
    }
    os << "CELL_TYPES " << mesh.element_count() << "\n";
    for (Index e = 0; e < mesh.element_count(); ++e) os << 12 << "\n";

    os << "POINT_DATA " << mesh.node_count() << "\n";
    os << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (Index n = 0; n < mesh.node_count(); ++n) os << state.d[DofMap::dof(n, kThetaComp)] << "\n";
    os << "SCALARS displacement_norm double 1\nLOOKUP_TABLE default\n";
    for (Index n = 0; n < mesh.node_count(); ++n) {
        const double ux = state.d[DofMap::dof(n, 0)];
        const double uy = state.d[DofMap::dof(n, 1)];
        const double uz = state.d[DofMap::dof(n, 2)];
        os << std::sqrt(ux * ux + uy * uy + uz * uz) << "\n";
    }

    os << "CELL_DATA " << mesh.element_count() << "\n";
    os << "SCALARS eps_22 double 1\nLOOKUP_TABLE default\n";
    for (Index e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        Eigen::Matrix<double, 24, 1> ue;
        for (int a = 0; a < 8; ++a)
            for (int c = 0; c < 3; ++c)
                ue(3 * a + c) = state.d[DofMap::dof(nodes[static_cast<std::size_t>(a)], c)];
        double eps22 = 0.0, volume = 0.0;
        for (std::size_t q = 0; q < geometry.shape.points.size(); ++q) {
            const double w = geometry.shape.points[q].weight * geometry.shape.points[q].det_jacobian;
            eps22 += w * (geometry.b_bar[q].row(1) * ue)(0);
            volume += w;
        }
        os << eps22 / volume << "\n";
    }
}

} // namespace lbws
