#include "photonhier/hierarchy.hpp"

#include "photonhier/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace photonhier {

namespace {

// Columns of all levels 0..top side by side.
Eigen::MatrixXd stacked_bases(const std::vector<Eigen::MatrixXd>& bases, std::size_t top) {
    Eigen::Index cols = 0;
    for (std::size_t j = 0; j <= top; ++j) cols += bases[j].cols();
    Eigen::MatrixXd q(bases.front().rows(), cols);
    Eigen::Index c = 0;
    for (std::size_t j = 0; j <= top; ++j) {
        q.middleCols(c, bases[j].cols()) = bases[j];
        c += bases[j].cols();
    }
    return q;
}

// Two passes of classical Gram-Schmidt against q.
void project_out(const Eigen::MatrixXd& q, Eigen::MatrixXd& y) {
    for (int pass = 0; pass < 2; ++pass) {
        y.noalias() -= q * (q.transpose() * y);
    }
}

}  // namespace

Eigen::Index OperatorBlock::rows() const noexcept {
    return stacked.rows();
}

std::vector<Eigen::Index> Hierarchy::dims() const {
    std::vector<Eigen::Index> out;
    for (const auto& b : bases_) out.push_back(b.cols());
    return out;
}

Eigen::Index Hierarchy::total_dim(int max_level) const {
    Eigen::Index total = 0;
    for (int j = 0; j <= max_level && j < levels(); ++j) total += dim(j);
    return total;
}

const OperatorBlock* Hierarchy::block(int j, int k) const {
    for (const auto& b : blocks_) {
        if (b.row_level == j && b.col_level == k) return &b;
    }
    return nullptr;
}

Eigen::MatrixXd Hierarchy::mode_block(Eigen::Index mode, int j, int k) const {
    const auto* b = block(j, k);
    if (b == nullptr) {
        throw ConfigError("operator block (" + std::to_string(j) + "," + std::to_string(k) +
                          ") not projected");
    }
    return b->mode_block(mode, dim(j));
}

Level0 build_level0(const Model& model, double rank_tol) {
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
        throw ConfigError("rank_tol must lie in (0, 1)");
    }
    const Eigen::MatrixXd& G = model.G();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();

    Level0 out;
    out.singular_values.assign(s.data(), s.data() + s.size());
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > rank_tol * s(0)) ++rank;
    out.full_rank = rank == G.rows();
    if (!out.full_rank) {
        std::cerr << "warning: coupling matrix has numerical rank " << rank << " < " << G.rows()
                  << " modes; dual profiles solve G e_i = delta_i in the least-squares sense\n";
    }
    out.basis = svd.matrixV().leftCols(rank);
    // pseudoinverse restricted to the retained singular triplets
    const Eigen::VectorXd inv = s.head(rank).cwiseInverse();
    out.duals = out.basis * inv.asDiagonal() * svd.matrixU().leftCols(rank).transpose();
    return out;
}

Hierarchy start_hierarchy(const Model& model, double rank_tol) {
    Level0 l0 = build_level0(model, rank_tol);
    Hierarchy h;
    h.rank_tol_ = rank_tol;
    h.full_rank_ = l0.full_rank;
    h.duals_ = std::move(l0.duals);
    h.bases_.push_back(std::move(l0.basis));
    h.closed_ = h.bases_.front().cols() == 0;
    return h;
}

Eigen::MatrixXd extend_level(const Model& model, Hierarchy& hierarchy, int j) {
    if (j < 0 || j + 1 != hierarchy.levels()) {
        throw ConfigError("extend_level: level " + std::to_string(j) + " is not the top level");
    }
    const Eigen::MatrixXd& top = hierarchy.basis(j);
    const Eigen::Index nm = model.num_groups();
    const Eigen::Index nc = model.num_modes();
    if (hierarchy.closed() || top.cols() == 0) {
        hierarchy.closed_ = true;
        return Eigen::MatrixXd(nm, 0);
    }

    const Eigen::MatrixXd a = model.coupling_diagonals();
    Eigen::MatrixXd y(nm, nc * top.cols());
    for (Eigen::Index i = 0; i < nc; ++i) {
        y.middleCols(i * top.cols(), top.cols()) = a.row(i).transpose().asDiagonal() * top;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> ref(y);
    const double scale = ref.singularValues().size() > 0 ? ref.singularValues()(0) : 0.0;

    const Eigen::MatrixXd q = stacked_bases(hierarchy.bases_, std::size_t(j));
    project_out(q, y);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index rank = 0;
    // the new level may not exceed the remaining room in R^{N_m}
    const Eigen::Index room = nm - q.cols();
    while (rank < s.size() && rank < room && s(rank) > hierarchy.rank_tol_ * scale) ++rank;
    if (rank == 0) {
        hierarchy.closed_ = true;
        return Eigen::MatrixXd(nm, 0);
    }

    // Directions close to the cutoff carry O(eps/tol) components along the
    // older levels; remove them and re-orthonormalise.
    Eigen::MatrixXd next = svd.matrixU().leftCols(rank);
    project_out(q, next);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(next);
    next = qr.householderQ() * Eigen::MatrixXd::Identity(nm, rank);
    project_out(q, next);
    // one more normalisation pass keeps |B^T B - I| at round-off
    Eigen::HouseholderQR<Eigen::MatrixXd> qr2(next);
    next = qr2.householderQ() * Eigen::MatrixXd::Identity(nm, rank);

    hierarchy.bases_.push_back(next);
    if (q.cols() + rank >= nm) hierarchy.closed_ = true;
    return next;
}

void project_operators(const Model& model, Hierarchy& h, int max_level) {
    if (max_level < 0 || max_level >= h.levels()) {
        throw ConfigError("project_operators: level " + std::to_string(max_level) +
                          " not built (have " + std::to_string(h.levels()) + ")");
    }
    const Eigen::MatrixXd a = model.coupling_diagonals();
    const Eigen::Index nc = model.num_modes();

    h.blocks_.clear();
    for (int j = 0; j <= max_level; ++j) {
        for (int k = std::max(0, j - 1); k <= std::min(max_level, j + 1); ++k) {
            const Eigen::MatrixXd& bj = h.basis(j);
            const Eigen::MatrixXd& bk = h.basis(k);
            OperatorBlock blk;
            blk.row_level = j;
            blk.col_level = k;
            blk.stacked.resize(nc * bj.cols(), bk.cols());
            for (Eigen::Index i = 0; i < nc; ++i) {
                blk.stacked.middleRows(i * bj.cols(), bj.cols()).noalias() =
                    bj.transpose() * (a.row(i).transpose().asDiagonal() * bk);
            }
            h.blocks_.push_back(std::move(blk));
        }
    }
    h.g_reduced_ = model.G() * h.basis(0);
    h.pump_unit_.clear();
    h.stim_rows_.clear();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.num_groups());
    for (int j = 0; j <= max_level; ++j) {
        h.pump_unit_.push_back(h.basis(j).transpose() * ones);
        h.stim_rows_.push_back(h.basis(j).transpose() * model.g().transpose());
    }
    h.projected_levels_ = max_level + 1;
}

Hierarchy build_hierarchy(const Model& model, int max_level, double rank_tol) {
    if (max_level < 0) throw ConfigError("hierarchy.max_level must be non-negative");
    Hierarchy h = start_hierarchy(model, rank_tol);
    while (h.levels() <= max_level && !h.closed()) {
        extend_level(model, h, h.levels() - 1);
    }
    project_operators(model, h, std::min(max_level, h.levels() - 1));
    return h;
}

Hierarchy build_closed_hierarchy(const Model& model, double rank_tol) {
    Hierarchy h = start_hierarchy(model, rank_tol);
    while (!h.closed()) {
        extend_level(model, h, h.levels() - 1);
    }
    project_operators(model, h, h.levels() - 1);
    return h;
}

HierarchyReport verify_hierarchy(const Model& model, const Hierarchy& h) {
    HierarchyReport r;
    r.dims = h.dims();
    r.closed = h.closed();
    const Eigen::MatrixXd a = model.coupling_diagonals();
    const int levels = h.levels();
    for (int j = 0; j < levels; ++j) {
        const auto& bj = h.basis(j);
        const Eigen::MatrixXd gram = bj.transpose() * bj;
        r.orthonormality_residual =
            std::max(r.orthonormality_residual,
                     (gram - Eigen::MatrixXd::Identity(bj.cols(), bj.cols())).cwiseAbs().maxCoeff());
        for (int k = 0; k < levels; ++k) {
            if (k == j || h.dim(j) == 0 || h.dim(k) == 0) continue;
            const auto& bk = h.basis(k);
            r.cross_level_residual =
                std::max(r.cross_level_residual, (bj.transpose() * bk).cwiseAbs().maxCoeff());
            if (std::abs(j - k) < 2) continue;
            for (Eigen::Index i = 0; i < model.num_modes(); ++i) {
                const double norm = a.row(i).cwiseAbs().maxCoeff();
                const Eigen::MatrixXd t = bj.transpose() * (a.row(i).transpose().asDiagonal() * bk);
                r.tridiagonal_residual = std::max(r.tridiagonal_residual, t.cwiseAbs().maxCoeff() / norm);
            }
        }
    }
    const Eigen::MatrixXd& G = model.G();
    const Eigen::MatrixXd ge = G * h.duals();
    if (ge.rows() == ge.cols()) {
        r.dual_residual = (ge - Eigen::MatrixXd::Identity(ge.rows(), ge.cols())).cwiseAbs().maxCoeff();
    }
    const auto& b0 = h.basis(0);
    r.s0_leakage = (G - (G * b0) * b0.transpose()).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff();
    return r;
}

ProfileTable emit_profiles_1d(const Model& model, int count, double rank_tol) {
    if (model.dimensions() != 1) {
        throw ConfigError("profiles require a 1D model (model.dimensions = 1)");
    }
    if (count <= 0 || count > model.num_modes()) {
        throw ConfigError("profile count must lie in [1, N_c]");
    }
    const Level0 l0 = build_level0(model, rank_tol);
    ProfileTable t;
    const auto nm = model.num_groups();
    t.x.resize(std::size_t(nm));
    for (Eigen::Index p = 0; p < nm; ++p) t.x[std::size_t(p)] = model.grid().positions(p, 0);
    t.profiles = l0.duals.leftCols(count);
    t.intensities = model.g().topRows(count).transpose();
    for (int i = 0; i < count; ++i) {
        t.labels.push_back("[" + std::to_string(model.modes()[std::size_t(i)].mx) + "]");
    }
    return t;
}

}  // namespace photonhier
