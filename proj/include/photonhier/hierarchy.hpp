// Hierarchy of mutually orthogonal molecular-excitation subspaces S_0, S_1, ...
//
// S_0 is the row space of G. S_{j+1} is spanned by the images A^(i) x of every
// basis vector x of S_j, with the components in S_0..S_j removed. Because the
// A^(i) are real diagonal, B_j^T A^(i) B_k vanishes whenever |j - k| >= 2, and
// the projected dynamics couples each level only to its neighbours.
#pragma once

#include "photonhier/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace photonhier {

inline constexpr double kDefaultRankTol = 1e-10;

struct Level0 {
    Eigen::MatrixXd basis;  // N_m x d_0, orthonormal columns
    Eigen::MatrixXd duals;  // N_m x N_c, column i is e_i
    bool full_rank{true};
    std::vector<double> singular_values;
};

class Hierarchy;

// Orthonormal basis of the row space of G (singular vectors with
// sigma > rank_tol * sigma_max) and the dual profiles e_i in S_0 with
// [G e_i]_j = delta_ij (minimum-norm pseudoinverse columns).
Level0 build_level0(const Model& model, double rank_tol = kDefaultRankTol);

// Hierarchy holding level 0 only.
Hierarchy start_hierarchy(const Model& model, double rank_tol = kDefaultRankTol);

// Builds and appends B_{j+1} from B_j, returning it. The rank cutoff is
// relative to the largest singular value of the images A^(i) B_j before
// projection. An empty result closes the hierarchy and is not appended.
// Requires j to be the current top level.
Eigen::MatrixXd extend_level(const Model& model, Hierarchy& hierarchy, int j);

// Fills T^(i)_{j,k} for |j-k| <= 1 and j,k <= max_level, G B_0, the pump
// projections B_j^T 1 and the stimulated-absorption rows B_j^T g_i.
void project_operators(const Model& model, Hierarchy& hierarchy, int max_level);

// Projected operator blocks for one pair of neighbouring levels (j, k),
// stacked over modes: rows [i*d_j, (i+1)*d_j) hold T^(i)_{j,k} = B_j^T A^(i) B_k.
struct OperatorBlock {
    int row_level{0};
    int col_level{0};
    Eigen::MatrixXd stacked;  // (N_c d_j) x d_k

    Eigen::Index rows() const noexcept;
    auto mode_block(Eigen::Index i, Eigen::Index dj) const {
        return stacked.middleRows(i * dj, dj);
    }
};

class Hierarchy {
public:
    Hierarchy() = default;

    int levels() const noexcept { return int(bases_.size()); }
    const Eigen::MatrixXd& basis(int j) const { return bases_.at(std::size_t(j)); }
    Eigen::Index dim(int j) const { return basis(j).cols(); }
    std::vector<Eigen::Index> dims() const;
    Eigen::Index total_dim(int max_level) const;
    // Set once extend_level has returned an empty level.
    bool closed() const noexcept { return closed_; }
    double rank_tol() const noexcept { return rank_tol_; }

    const Eigen::MatrixXd& duals() const noexcept { return duals_; }
    bool full_rank() const noexcept { return full_rank_; }

    // Available after project_operators.
    int projected_levels() const noexcept { return projected_levels_; }
    // T^(i)_{j,k} for |j-k| <= 1, stacked over modes; nullptr if not projected.
    const OperatorBlock* block(int j, int k) const;
    Eigen::MatrixXd mode_block(Eigen::Index mode, int j, int k) const;
    const Eigen::MatrixXd& g_reduced() const noexcept { return g_reduced_; }  // G B_0
    const Eigen::VectorXd& pump_unit(int j) const { return pump_unit_.at(std::size_t(j)); }
    // d_j x N_c, column i = B_j^T g_i
    const Eigen::MatrixXd& stim_rows(int j) const { return stim_rows_.at(std::size_t(j)); }

    friend Hierarchy start_hierarchy(const Model&, double);
    friend Eigen::MatrixXd extend_level(const Model&, Hierarchy&, int);
    friend void project_operators(const Model&, Hierarchy&, int);

private:
    std::vector<Eigen::MatrixXd> bases_;
    Eigen::MatrixXd duals_;
    bool full_rank_{true};
    bool closed_{false};
    double rank_tol_{kDefaultRankTol};

    int projected_levels_{0};
    std::vector<OperatorBlock> blocks_;
    Eigen::MatrixXd g_reduced_;
    std::vector<Eigen::VectorXd> pump_unit_;
    std::vector<Eigen::MatrixXd> stim_rows_;
};

// Start, extend to max_level (or closure) and project.
Hierarchy build_hierarchy(const Model& model, int max_level, double rank_tol = kDefaultRankTol);
// Extend until closure (bounded by N_m levels) and project everything.
Hierarchy build_closed_hierarchy(const Model& model, double rank_tol = kDefaultRankTol);

struct HierarchyReport {
    std::vector<Eigen::Index> dims;
    double orthonormality_residual{0.0};  // max_j |B_j^T B_j - I|
    double cross_level_residual{0.0};     // max_{j != k} |B_j^T B_k|
    double tridiagonal_residual{0.0};     // max_{i,|j-k|>=2} |B_j^T A^(i) B_k| / max_p |A^(i)_pp|
    double dual_residual{0.0};            // |G E - I|_max
    double s0_leakage{0.0};               // |G - G B_0 B_0^T|_max / |G|_max
    bool closed{false};
};

// Dense check of the invariants, computed from the bases directly (does not
// use the projected blocks).
HierarchyReport verify_hierarchy(const Model& model, const Hierarchy& hierarchy);

struct ProfileTable {
    std::vector<double> x;
    std::vector<std::string> labels;
    Eigen::MatrixXd profiles;     // N_m x count, e_i(x_j)
    Eigen::MatrixXd intensities;  // N_m x count, |Phi_i(x_j)|^2
};

// Requires a 1D model.
ProfileTable emit_profiles_1d(const Model& model, int count, double rank_tol = kDefaultRankTol);

}  // namespace photonhier
