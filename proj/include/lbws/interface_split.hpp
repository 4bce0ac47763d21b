#pragma once

#include "lbws/assembly.hpp"
#include "lbws/common.hpp"

#include <algorithm>
#include <stdexcept>

namespace lbws {

/// Interior/interface permutation of the free DOFs. Interior DOFs are grouped
/// (by owning subdomain when built from a partition), so the interior block
/// of the operator is block-diagonal with one block per group.
struct InterfaceSplit {
    static constexpr int kConstrained = -3;
    static constexpr int kInterface = -2;

    std::vector<Index> interface_dofs;              // sorted ascending
    std::vector<std::vector<Index>> interior_dofs;  // per group, sorted ascending
    std::vector<int> role;                          // group id, kInterface, or kConstrained
};

inline InterfaceSplit split_interface(const BlockMatrix& K, const std::vector<Index>& interface_dofs,
                                      const std::vector<int>& interior_group = {}) {
    const Index n = K.rows();
    if (!interior_group.empty() && static_cast<Index>(interior_group.size()) != n)
        throw std::invalid_argument("split_interface: interior grouping size mismatch");

    InterfaceSplit split;
    split.role.assign(static_cast<std::size_t>(n), 0);
    for (Index d = 0; d < n; ++d)
        if (K.is_constrained(d)) split.role[static_cast<std::size_t>(d)] = InterfaceSplit::kConstrained;

    for (Index d : interface_dofs) {
        if (d < 0 || d >= n) throw std::invalid_argument("split_interface: interface dof out of range");
        if (K.is_constrained(d))
            throw std::invalid_argument("split_interface: interface set contains Dirichlet dof " +
                                        std::to_string(d));
        if (split.role[static_cast<std::size_t>(d)] == InterfaceSplit::kInterface)
            throw std::invalid_argument("split_interface: duplicate interface dof " + std::to_string(d));
        split.role[static_cast<std::size_t>(d)] = InterfaceSplit::kInterface;
    }

    split.interface_dofs = interface_dofs;
    std::sort(split.interface_dofs.begin(), split.interface_dofs.end());

    int groups = 1;
    if (!interior_group.empty())
        for (Index d = 0; d < n; ++d)
            if (split.role[static_cast<std::size_t>(d)] == 0)
                groups = std::max(groups, interior_group[static_cast<std::size_t>(d)] + 1);
    split.interior_dofs.resize(static_cast<std::size_t>(groups));
    for (Index d = 0; d < n; ++d) {
        if (split.role[static_cast<std::size_t>(d)] != 0) continue;
        const int g = interior_group.empty() ? 0 : interior_group[static_cast<std::size_t>(d)];
        if (g < 0) throw std::invalid_argument("split_interface: free interior dof without group");
        split.role[static_cast<std::size_t>(d)] = g;
        split.interior_dofs[static_cast<std::size_t>(g)].push_back(d);
    }
    return split;
}

/// Gather K[rows, cols] into a column-major sparse block.
inline SparseCol extract_block(const SparseRow& K, const std::vector<Index>& rows,
                               const std::vector<Index>& cols) {
    std::vector<int> col_pos(static_cast<std::size_t>(K.cols()), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[static_cast<std::size_t>(cols[j])] = static_cast<int>(j);

    std::vector<Eigen::Triplet<double>> trips;
    const double* values = K.valuePtr();
    const int* inner = K.innerIndexPtr();
    const int* outer = K.outerIndexPtr();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        for (int s = outer[r]; s < outer[r + 1]; ++s) {
            const int j = col_pos[static_cast<std::size_t>(inner[s])];
            if (j >= 0 && values[s] != 0.0)
                trips.emplace_back(static_cast<int>(i), j, values[s]);
        }
    }
    SparseCol block(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    block.setFromTriplets(trips.begin(), trips.end());
    return block;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Index>& idx) {
    Eigen::VectorXd out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
    return out;
}

/// The four interface-split blocks in one permuted view (interior groups
/// concatenated in order, then the interface).
struct InterfaceBlocks {
    SparseCol interior_interior;    // block-diagonal by group
    SparseCol interior_interface;
    SparseCol interface_interior;
    SparseCol interface_interface;
    std::vector<Index> interior_all;
};

inline InterfaceBlocks interface_blocks(const BlockMatrix& K, const InterfaceSplit& split) {
    InterfaceBlocks b;
    for (const auto& group : split.interior_dofs)
        b.interior_all.insert(b.interior_all.end(), group.begin(), group.end());
    b.interior_interior = extract_block(K.matrix, b.interior_all, b.interior_all);
    b.interior_interface = extract_block(K.matrix, b.interior_all, split.interface_dofs);
    b.interface_interior = extract_block(K.matrix, split.interface_dofs, b.interior_all);
    b.interface_interface = extract_block(K.matrix, split.interface_dofs, split.interface_dofs);
    return b;
}

} // namespace lbws
