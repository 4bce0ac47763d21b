#pragma once

#include "lbws/common.hpp"

#include <stdexcept>

namespace lbws {

/// Structured hexahedral mesh of a box [0,l_x] x [0,l_y] x [0,l_z].
///
/// Nodes are ordered lexicographically with x fastest; every element is an
/// axis-aligned box with 8 nodes, local node l = di + 2*dj + 4*dk.
struct Mesh {
    std::array<double, 3> extent{};  // mm
    std::array<int, 3> cells{};

    int nodes_per_axis(int axis) const { return cells[static_cast<std::size_t>(axis)] + 1; }
    Index node_count() const {
        return static_cast<Index>(cells[0] + 1) * (cells[1] + 1) * (cells[2] + 1);
    }
    Index element_count() const {
        return static_cast<Index>(cells[0]) * cells[1] * cells[2];
    }
    double spacing(int axis) const {
        return extent[static_cast<std::size_t>(axis)] / cells[static_cast<std::size_t>(axis)];
    }

    Index node_index(int i, int j, int k) const {
        return static_cast<Index>(i) +
               static_cast<Index>(cells[0] + 1) * (static_cast<Index>(j) + static_cast<Index>(cells[1] + 1) * k);
    }
    std::array<int, 3> node_coords_ijk(Index node) const {
        const Index nx = cells[0] + 1, ny = cells[1] + 1;
        return {static_cast<int>(node % nx), static_cast<int>((node / nx) % ny),
                static_cast<int>(node / (nx * ny))};
    }
    Vec3 node_position(Index node) const {
        const auto ijk = node_coords_ijk(node);
        return {ijk[0] * spacing(0), ijk[1] * spacing(1), ijk[2] * spacing(2)};
    }

    Index element_index(int i, int j, int k) const {
        return static_cast<Index>(i) +
               static_cast<Index>(cells[0]) * (static_cast<Index>(j) + static_cast<Index>(cells[1]) * k);
    }
    std::array<int, 3> element_coords_ijk(Index elem) const {
        const Index ex = cells[0], ey = cells[1];
        return {static_cast<int>(elem % ex), static_cast<int>((elem / ex) % ey),
                static_cast<int>(elem / (ex * ey))};
    }

    /// The 8 node indices of an element, local ordering l = di + 2*dj + 4*dk.
    std::array<Index, 8> element_nodes(Index elem) const {
        const auto e = element_coords_ijk(elem);
        std::array<Index, 8> out{};
        for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di)
                    out[static_cast<std::size_t>(di + 2 * dj + 4 * dk)] =
                        node_index(e[0] + di, e[1] + dj, e[2] + dk);
        return out;
    }

    std::array<Vec3, 8> element_corners(Index elem) const {
        const auto nodes = element_nodes(elem);
        std::array<Vec3, 8> out;
        for (std::size_t l = 0; l < 8; ++l) out[l] = node_position(nodes[l]);
        return out;
    }

    /// True if two nodes share at least one element (structured 26-neighborhood).
    bool nodes_adjacent(Index a, Index b) const {
        if (a == b) return false;
        const auto pa = node_coords_ijk(a), pb = node_coords_ijk(b);
        return std::abs(pa[0] - pb[0]) <= 1 && std::abs(pa[1] - pb[1]) <= 1 &&
               std::abs(pa[2] - pb[2]) <= 1;
    }

    Vec3 centroid() const { return {extent[0] / 2, extent[1] / 2, extent[2] / 2}; }
};

inline Mesh build_box_mesh(std::array<double, 3> extent, std::array<int, 3> cells) {
    for (int a = 0; a < 3; ++a) {
        if (!(extent[static_cast<std::size_t>(a)] > 0.0))
            throw std::invalid_argument("build_box_mesh: extent must be positive on axis " + std::to_string(a));
        if (cells[static_cast<std::size_t>(a)] < 1)
            throw std::invalid_argument("build_box_mesh: cell count must be >= 1 on axis " + std::to_string(a));
    }
    return Mesh{extent, cells};
}

} // namespace lbws
