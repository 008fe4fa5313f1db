#include "photonhier/dynamics.hpp"

#include "photonhier/errors.hpp"

#include <algorithm>
#include <cmath>

namespace photonhier {

ExactSystem::ExactSystem(const Model& model)
    : model_(&model),
      nc_(model.num_modes()),
      nm_(model.num_groups()),
      ea_(model.emission() + model.absorption()),
      ratio_(model.emission_ratio()),
      gf_(nc_),
      coef_(nc_, 2),
      comb_(nm_, 2) {}

Eigen::VectorXd ExactSystem::pack(const FullState& s) const {
    if (s.n.size() != nc_ || s.f.size() != nm_) {
        throw ConfigError("state dimensions do not match the model");
    }
    Eigen::VectorXd y(size());
    y << s.n, s.f;
    return y;
}

FullState ExactSystem::unpack(const Eigen::VectorXd& y) const {
    return {y.head(nc_), y.tail(nm_)};
}

Eigen::VectorXd ExactSystem::cold_state(double seed) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
    y.head(nc_).setConstant(seed);
    return y;
}

void ExactSystem::rhs(const Eigen::VectorXd& y, double pump, Eigen::VectorXd& dy) const {
    const Model& m = *model_;
    const auto n = y.head(nc_);
    const auto f = y.tail(nm_);
    dy.resize(size());

    gf_.noalias() = m.G() * f;
    dy.head(nc_) = (n.cwiseProduct(ea_) + m.emission()).cwiseProduct(gf_) - m.gamma().cwiseProduct(n);

    // w = sum_i (n_i - r_i) a_i with a_i = -(E_i + A_i) g_i, and the
    // stimulated-absorption source sum_i A_i n_i g_i, in one pass over g.
    coef_.col(0) = -(n - ratio_).cwiseProduct(ea_);
    coef_.col(1) = m.absorption().cwiseProduct(n);
    comb_.noalias() = m.g().transpose() * coef_;
    dy.tail(nm_) = (comb_.col(0).array() - (m.gamma_down() + pump)) * f.array() + pump +
                   comb_.col(1).array();
}

Eigen::VectorXd ExactSystem::solve_shifted(double sigma, const Eigen::VectorXd& y, double pump,
                                           const Eigen::VectorXd& r) const {
    const Model& m = *model_;
    const auto n = y.head(nc_);
    const auto f = y.tail(nm_);

    const Eigen::VectorXd gf = m.G() * f;
    const Eigen::VectorXd w = m.g().transpose() * (-(n - ratio_).cwiseProduct(ea_));
    // sigma - J_ff
    const Eigen::ArrayXd dff = sigma - (w.array() - (m.gamma_down() + pump));
    if ((dff.abs() < 1e-300).any()) {
        throw NumericalError("singular molecular block in shifted Jacobian");
    }
    const Eigen::VectorXd stim = n.cwiseProduct(ea_) + m.emission();  // J_nf = diag(stim) G
    // J_fn column i = g_i (A_i - (E_i + A_i) f)
    Eigen::MatrixXd jfn(nm_, nc_);
    for (Eigen::Index i = 0; i < nc_; ++i) {
        jfn.col(i) = m.g().row(i).transpose().cwiseProduct(
            (m.absorption()(i) - ea_(i) * f.array()).matrix());
    }
    const Eigen::MatrixXd scaled = (dff.inverse().matrix().asDiagonal() * jfn);  // D^-1 J_fn
    Eigen::MatrixXd schur = -(stim.asDiagonal() * (m.G() * scaled));
    schur.diagonal().array() += sigma - (ea_.cwiseProduct(gf) - m.gamma()).array();

    const auto rn = r.head(nc_);
    const Eigen::ArrayXd rf_scaled = r.tail(nm_).array() / dff;
    const Eigen::VectorXd rhs_n = rn + stim.cwiseProduct(m.G() * rf_scaled.matrix());
    const Eigen::VectorXd dn = schur.partialPivLu().solve(rhs_n);

    Eigen::VectorXd out(size());
    out.head(nc_) = dn;
    out.tail(nm_) = rf_scaled.matrix() + scaled * dn;
    return out;
}

ReducedSystem::ReducedSystem(const Model& model, const Hierarchy& hierarchy, int max_level)
    : model_(&model),
      h_(&hierarchy),
      levels_(max_level + 1),
      nc_(model.num_modes()),
      total_(0),
      ea_(model.emission() + model.absorption()),
      ratio_(model.emission_ratio()) {
    if (max_level < 0 || max_level >= hierarchy.projected_levels()) {
        throw ConfigError("truncation level " + std::to_string(max_level) +
                          " exceeds the projected hierarchy (" +
                          std::to_string(hierarchy.projected_levels()) + " levels)");
    }
    for (int j = 0; j < levels_; ++j) {
        offsets_.push_back(nc_ + total_);
        total_ += hierarchy.dim(j);
    }
    Eigen::Index widest = 0;
    for (int j = 0; j < levels_; ++j) {
        const int lo = std::max(0, j - 1);
        const int hi = std::min(levels_ - 1, j + 1);
        Eigen::Index width = 0;
        for (int k = lo; k <= hi; ++k) width += hierarchy.dim(k);
        RowBlock row{offsets_[std::size_t(lo)], Eigen::MatrixXd(nc_ * hierarchy.dim(j), width)};
        Eigen::Index col = 0;
        for (int k = lo; k <= hi; ++k) {
            const auto* b = hierarchy.block(j, k);
            if (b == nullptr) throw ConfigError("missing projected operator block");
            row.stacked.middleCols(col, hierarchy.dim(k)) = b->stacked;
            col += hierarchy.dim(k);
        }
        widest = std::max(widest, row.stacked.rows());
        rows_.push_back(std::move(row));
    }
    tmp_.resize(widest);
    beta_.resize(nc_);
    stim_.resize(nc_);
}

Eigen::VectorXd ReducedSystem::pack(const ReducedState& s) const {
    if (s.n.size() != nc_ || int(s.c.size()) != levels_) {
        throw ConfigError("reduced state dimensions do not match the truncation");
    }
    Eigen::VectorXd y(size());
    y.head(nc_) = s.n;
    for (int j = 0; j < levels_; ++j) {
        if (s.c[std::size_t(j)].size() != h_->dim(j)) throw ConfigError("level coefficient size mismatch");
        y.segment(offsets_[std::size_t(j)], h_->dim(j)) = s.c[std::size_t(j)];
    }
    return y;
}

ReducedState ReducedSystem::unpack(const Eigen::VectorXd& y) const {
    ReducedState s;
    s.n = y.head(nc_);
    for (int j = 0; j < levels_; ++j) s.c.push_back(y.segment(offsets_[std::size_t(j)], h_->dim(j)));
    return s;
}

Eigen::VectorXd ReducedSystem::from_full(const Eigen::VectorXd& full) const {
    const Eigen::Index nm = model_->num_groups();
    if (full.size() != nc_ + nm) throw ConfigError("full state size mismatch");
    Eigen::VectorXd y(size());
    y.head(nc_) = full.head(nc_);
    for (int j = 0; j < levels_; ++j) {
        y.segment(offsets_[std::size_t(j)], h_->dim(j)) = h_->basis(j).transpose() * full.tail(nm);
    }
    return y;
}

Eigen::VectorXd ReducedSystem::molecular_excitation(const Eigen::VectorXd& y) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(model_->num_groups());
    for (int j = 0; j < levels_; ++j) {
        f.noalias() += h_->basis(j) * y.segment(offsets_[std::size_t(j)], h_->dim(j));
    }
    return f;
}

Eigen::VectorXd ReducedSystem::cold_state(double seed) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
    y.head(nc_).setConstant(seed);
    return y;
}

void ReducedSystem::rhs(const Eigen::VectorXd& y, double pump, Eigen::VectorXd& dy) const {
    const Model& m = *model_;
    const auto n = y.head(nc_);
    dy.resize(size());

    const auto c0 = y.segment(offsets_[0], h_->dim(0));
    dy.head(nc_) = (n.cwiseProduct(ea_) + m.emission()).cwiseProduct(h_->g_reduced() * c0) -
                   m.gamma().cwiseProduct(n);

    beta_ = n - ratio_;
    stim_ = m.absorption().cwiseProduct(n);
    const double loss = m.gamma_down() + pump;
    for (int j = 0; j < levels_; ++j) {
        const Eigen::Index off = offsets_[std::size_t(j)];
        const Eigen::Index dj = h_->dim(j);
        dy.segment(off, dj) = -loss * y.segment(off, dj) + pump * h_->pump_unit(j);
        dy.segment(off, dj).noalias() += h_->stim_rows(j) * stim_;
    }
    // dc_j += sum_i beta_i T^(i)_{j,k} c_k, evaluated as one product with the
    // stacked blocks followed by a contraction over modes.
    for (int j = 0; j < levels_; ++j) {
        const RowBlock& row = rows_[std::size_t(j)];
        const Eigen::Index dj = h_->dim(j);
        auto t = tmp_.head(row.stacked.rows());
        t.noalias() = row.stacked * y.segment(row.col_offset, row.stacked.cols());
        dy.segment(offsets_[std::size_t(j)], dj).noalias() +=
            Eigen::Map<const Eigen::MatrixXd>(t.data(), dj, nc_) * beta_;
    }
}

Eigen::VectorXd ReducedSystem::solve_shifted(double sigma, const Eigen::VectorXd& y, double pump,
                                             const Eigen::VectorXd& r) const {
    const Model& m = *model_;
    const Eigen::Index dim = size();
    const auto n = y.head(nc_);
    const Eigen::VectorXd beta = n - ratio_;
    const Eigen::Index d0 = h_->dim(0);
    const auto c0 = y.segment(offsets_[0], d0);

    // Build J, then form sigma I - J.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::VectorXd gc = h_->g_reduced() * c0;
    jac.topLeftCorner(nc_, nc_).diagonal() = ea_.cwiseProduct(gc) - m.gamma();
    jac.block(0, offsets_[0], nc_, d0) = (n.cwiseProduct(ea_) + m.emission()).asDiagonal() * h_->g_reduced();

    const double loss = m.gamma_down() + pump;
    for (int j = 0; j < levels_; ++j) {
        const Eigen::Index off = offsets_[std::size_t(j)];
        const Eigen::Index dj = h_->dim(j);
        jac.block(off, off, dj, dj).diagonal().array() -= loss;
        jac.block(off, 0, dj, nc_) = h_->stim_rows(j) * m.absorption().asDiagonal();
    }
    for (int j = 0; j < levels_; ++j) {
        const RowBlock& row = rows_[std::size_t(j)];
        const Eigen::Index dj = h_->dim(j);
        const Eigen::Index oj = offsets_[std::size_t(j)];
        const Eigen::Index width = row.stacked.cols();
        const auto cs = y.segment(row.col_offset, width);
        for (Eigen::Index i = 0; i < nc_; ++i) {
            const auto t = row.stacked.middleRows(i * dj, dj);
            jac.block(oj, row.col_offset, dj, width) += beta(i) * t;
            jac.block(oj, i, dj, 1) += t * cs;
        }
    }
    Eigen::MatrixXd a = -jac;
    a.diagonal().array() += sigma;
    return a.partialPivLu().solve(r);
}

std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& f, const Hierarchy& hierarchy, int max_level) {
    if (max_level >= hierarchy.levels()) throw ConfigError("lift: level not built");
    std::vector<Eigen::VectorXd> c;
    for (int j = 0; j <= max_level; ++j) {
        if (f.size() != hierarchy.basis(j).rows()) throw ConfigError("lift: size mismatch");
        c.push_back(hierarchy.basis(j).transpose() * f);
    }
    return c;
}

Eigen::VectorXd reconstruct(const std::vector<Eigen::VectorXd>& c, const Hierarchy& hierarchy) {
    if (c.empty()) throw ConfigError("reconstruct: no levels");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(hierarchy.basis(0).rows());
    for (std::size_t j = 0; j < c.size(); ++j) {
        f.noalias() += hierarchy.basis(int(j)) * c[j];
    }
    return f;
}

FullState rhs_exact(double t, const FullState& state, const Model& model, const PumpSchedule& pump) {
    const ExactSystem sys(model);
    const Eigen::VectorXd y = sys.pack(state);
    if (!y.allFinite()) throw IntegrationError("non-finite state passed to rhs_exact");
    Eigen::VectorXd dy;
    sys.rhs(y, pump(t), dy);
    return sys.unpack(dy);
}

ReducedState rhs_reduced(double t, const ReducedState& state, const Model& model,
                         const Hierarchy& hierarchy, int max_level, const PumpSchedule& pump) {
    const ReducedSystem sys(model, hierarchy, max_level);
    const Eigen::VectorXd y = sys.pack(state);
    if (!y.allFinite()) throw IntegrationError("non-finite state passed to rhs_reduced");
    Eigen::VectorXd dy;
    sys.rhs(y, pump(t), dy);
    return sys.unpack(dy);
}

}  // namespace photonhier
