#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lbws {

using Vec3 = Eigen::Vector3d;
using Index = std::int64_t;

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Thrown when an element maps with non-positive Jacobian determinant.
struct degenerate_element_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a local or coarse factorization fails; the message names the block.
struct factorization_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown for inconsistent solver configuration (e.g. empty coarse space in two-level mode).
struct configuration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a preconditioner is applied to an operator it was not built for
/// without a recycle policy declaring that intent.
struct stale_preconditioner_error : std::logic_error {
    using std::logic_error::logic_error;
};

namespace detail {

/// Static partition of [0,n) into contiguous chunks, one worker per chunk.
/// Results must be written to disjoint slots; then the outcome is independent
/// of the thread count.
inline void parallel_for(Index n, int threads, const std::function<void(Index)>& body) {
    if (threads <= 1 || n < 2) {
        for (Index i = 0; i < n; ++i) body(i);
        return;
    }
    const int workers = static_cast<int>(std::min<Index>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const Index lo = n * w / workers;
        const Index hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (Index i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

} // namespace lbws
