#pragma once

#include "lbws/assembly.hpp"
#include "lbws/coarse_space.hpp"
#include "lbws/common.hpp"
#include "lbws/decomposition.hpp"

#include <Eigen/SparseLU>

#include <chrono>
#include <memory>

namespace lbws {

enum class FirstLevelKind { additive, restricted };
enum class RecyclePolicy { rebuild_all, reuse_phi, reuse_all };

inline const char* to_string(RecyclePolicy p) {
    switch (p) {
        case RecyclePolicy::rebuild_all: return "rebuild-all";
        case RecyclePolicy::reuse_phi: return "reuse-phi";
        case RecyclePolicy::reuse_all: return "reuse-all";
    }
    return "?";
}

struct SchwarzOptions {
    bool two_level = true;
    FirstLevelKind first_level = FirstLevelKind::restricted;
    CoarseConfig coarse;
    int threads = 1;
};

/// Static decomposition data shared by all preconditioner builds of a run:
/// the grown partition and the interface components per field.
struct SchwarzContext {
    Mesh mesh;
    Partition partition;
    std::vector<InterfaceClass> classes;
    ComponentSet components_u;
    ComponentSet components_theta;
};

inline SchwarzContext make_schwarz_context(const Mesh& mesh, const DofMap& dofmap,
                                           std::array<int, 3> grid, int overlap,
                                           CoarseVariant variant_u, CoarseVariant variant_theta) {
    SchwarzContext ctx;
    ctx.mesh = mesh;
    ctx.partition = partition_structured(mesh, grid);
    grow_overlap(ctx.partition, mesh, overlap);
    ctx.classes = classify_interface(ctx.partition, dofmap);
    ctx.components_u = build_components(ctx.classes, variant_u, mesh);
    ctx.components_theta = build_components(ctx.classes, variant_theta, mesh);
    return ctx;
}

/// Monolithic two-level overlapping Schwarz preconditioner: exact local
/// solves on the overlapping subdomains (additive or restricted prolongation)
/// plus an additive GDSW-family coarse level.
class SchwarzPreconditioner {
  public:
    static SchwarzPreconditioner build(const BlockMatrix& K, std::shared_ptr<const SchwarzContext> ctx,
                                       const SchwarzOptions& options) {
        SchwarzPreconditioner p;
        p.ctx_ = std::move(ctx);
        p.options_ = options;
        p.build_index_sets();
        p.build_local_solvers(K);
        if (options.two_level) p.build_coarse(K);
        p.local_stamp_ = p.coarse_stamp_ = K.stamp;
        p.recycle_declared_ = false;
        return p;
    }

    /// Refresh for a new operator. Local factorizations are always rebuilt;
    /// the coarse parts follow the policy: rebuild-all reconstructs basis and
    /// coarse operator, reuse-phi keeps the basis and re-forms/refactors the
    /// coarse operator, reuse-all keeps basis, operator, and factorization.
    void update(const BlockMatrix& K_new, RecyclePolicy policy) {
        if (K_new.rows() != dof_count_)
            throw std::invalid_argument("SchwarzPreconditioner::update: operator dimension changed");
        build_local_solvers(K_new);
        local_stamp_ = K_new.stamp;
        if (!options_.two_level) {
            coarse_stamp_ = K_new.stamp;
            return;
        }
        switch (policy) {
            case RecyclePolicy::rebuild_all:
                build_coarse(K_new);
                coarse_stamp_ = K_new.stamp;
                recycle_declared_ = false;
                break;
            case RecyclePolicy::reuse_phi: {
                coarse_operator_ = galerkin(K_new, basis_);
                factor_coarse();
                coarse_stamp_ = K_new.stamp;
                recycle_declared_ = false;
                break;
            }
            case RecyclePolicy::reuse_all:
                recycle_declared_ = true;
                break;
        }
    }

    /// z = Phi K0^-1 Phi^T r + sum_i Rtilde_i^T K_i^-1 R_i r. The coarse term
    /// is omitted in one-level mode; the restricted prolongation scatters
    /// only owned DOFs.
    Eigen::VectorXd apply(const Eigen::VectorXd& r) const {
        if (r.size() != dof_count_)
            throw std::invalid_argument("SchwarzPreconditioner::apply: residual dimension mismatch");
        Eigen::VectorXd z = Eigen::VectorXd::Zero(dof_count_);

        if (options_.two_level) {
            const auto t0 = std::chrono::steady_clock::now();
            const Eigen::VectorXd coarse_rhs = basis_.phi.transpose() * r;
            const Eigen::VectorXd coarse_sol = coarse_lu_->solve(coarse_rhs);
            z.noalias() += basis_.phi * coarse_sol;
            coarse_apply_seconds_ +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }

        const std::size_t nsub = subdomain_dofs_.size();
        std::vector<Eigen::VectorXd> local(nsub);
        detail::parallel_for(static_cast<Index>(nsub), options_.threads, [&](Index s) {
            const auto& dofs = subdomain_dofs_[static_cast<std::size_t>(s)];
            local[static_cast<std::size_t>(s)] =
                local_lu_[static_cast<std::size_t>(s)]->solve(gather(r, dofs));
        });
        for (std::size_t s = 0; s < nsub; ++s) {
            const auto& dofs = subdomain_dofs_[s];
            if (options_.first_level == FirstLevelKind::additive) {
                for (std::size_t i = 0; i < dofs.size(); ++i) z[dofs[i]] += local[s][static_cast<Index>(i)];
            } else {
                for (Index i : owned_local_[s]) z[dofs[static_cast<std::size_t>(i)]] += local[s][i];
            }
        }
        ++apply_count_;
        return z;
    }

    /// Guard for the recycling contract: applying a preconditioner built for
    /// another operator without a declared recycle policy is a misuse.
    void check_operator(const BlockMatrix& K) const {
        if (local_stamp_ != K.stamp)
            throw stale_preconditioner_error(
                "SchwarzPreconditioner: local solvers are stale for this operator; call update()");
        if (options_.two_level && coarse_stamp_ != K.stamp && !recycle_declared_)
            throw stale_preconditioner_error(
                "SchwarzPreconditioner: coarse level is stale and no recycle policy was declared");
    }

    bool two_level() const { return options_.two_level; }
    Index coarse_dimension() const { return options_.two_level ? basis_.size() : 0; }
    const CoarseBasis& coarse_basis() const { return basis_; }
    const SparseCol& coarse_operator() const { return coarse_operator_; }
    const std::vector<std::vector<Index>>& subdomain_dofs() const { return subdomain_dofs_; }
    const std::vector<std::vector<Index>>& owned_local_indices() const { return owned_local_; }
    std::uint64_t local_stamp() const { return local_stamp_; }
    std::uint64_t coarse_stamp() const { return coarse_stamp_; }
    double coarse_apply_seconds() const { return coarse_apply_seconds_; }
    long apply_count() const { return apply_count_; }

  private:
    void build_index_sets() {
        const Partition& part = ctx_->partition;
        if (part.overlap_layers < 0)
            throw configuration_error("SchwarzPreconditioner: partition overlap has not been grown");
        dof_count_ = ctx_->mesh.node_count() * kDofsPerNode;
        const std::size_t nsub = part.overlap_nodes.size();
        subdomain_dofs_.resize(nsub);
        owned_local_.resize(nsub);
        for (std::size_t s = 0; s < nsub; ++s) {
            auto& dofs = subdomain_dofs_[s];
            dofs.clear();
            for (Index node : part.overlap_nodes[s])
                for (int c = 0; c < kDofsPerNode; ++c) dofs.push_back(DofMap::dof(node, c));
            auto& owned = owned_local_[s];
            owned.clear();
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                const Index node = DofMap::node_of_dof(dofs[i]);
                if (part.node_owner[static_cast<std::size_t>(node)] == static_cast<int>(s))
                    owned.push_back(static_cast<Index>(i));
            }
        }
    }

    void build_local_solvers(const BlockMatrix& K) {
        const std::size_t nsub = subdomain_dofs_.size();
        local_lu_.resize(nsub);
        std::vector<std::string> errors(nsub);
        detail::parallel_for(static_cast<Index>(nsub), options_.threads, [&](Index s) {
            const auto& dofs = subdomain_dofs_[static_cast<std::size_t>(s)];
            SparseCol block = extract_block(K.matrix, dofs, dofs);
            auto lu = std::make_unique<Eigen::SparseLU<SparseCol>>();
            lu->compute(block);
            if (lu->info() != Eigen::Success) {
                errors[static_cast<std::size_t>(s)] =
                    "SchwarzPreconditioner: singular local matrix of subdomain " + std::to_string(s);
                return;
            }
            local_lu_[static_cast<std::size_t>(s)] = std::move(lu);
        });
        for (const auto& err : errors)
            if (!err.empty()) throw factorization_error(err);
    }

    void build_coarse(const BlockMatrix& K) {
        split_ = build_interface_split(K, ctx_->partition);
        basis_ = build_coarse_basis(K, ctx_->partition, split_, ctx_->components_u, ctx_->components_theta,
                                    options_.coarse, ctx_->mesh, options_.threads);
        if (basis_.size() == 0)
            throw configuration_error("SchwarzPreconditioner: empty coarse space in two-level mode");
        if (basis_.phi.nonZeros() == 0)
            throw configuration_error(
                "SchwarzPreconditioner: coarse basis is entirely zero (truncation too aggressive)");
        coarse_operator_ = galerkin(K, basis_);
        factor_coarse();
    }

    void factor_coarse() {
        coarse_lu_ = std::make_unique<Eigen::SparseLU<SparseCol>>();
        coarse_lu_->compute(coarse_operator_);
        if (coarse_lu_->info() != Eigen::Success)
            throw factorization_error("SchwarzPreconditioner: singular coarse operator");
    }

    std::shared_ptr<const SchwarzContext> ctx_;
    SchwarzOptions options_;
    Index dof_count_ = 0;
    std::vector<std::vector<Index>> subdomain_dofs_;
    std::vector<std::vector<Index>> owned_local_;
    std::vector<std::unique_ptr<Eigen::SparseLU<SparseCol>>> local_lu_;
    InterfaceSplit split_;
    CoarseBasis basis_;
    SparseCol coarse_operator_;
    std::unique_ptr<Eigen::SparseLU<SparseCol>> coarse_lu_;
    std::uint64_t local_stamp_ = 0;
    std::uint64_t coarse_stamp_ = 0;
    bool recycle_declared_ = false;
    mutable double coarse_apply_seconds_ = 0.0;
    mutable long apply_count_ = 0;
};

} // namespace lbws
