// Right-hand sides of the exact rate equations (cavity occupations n and
// per-group excitation fractions f) and of the level-truncated equations in
// hierarchy coordinates (n and per-level coefficients c_j).
//
// Both systems work on a packed state vector: [n; f] or [n; c_0; ...; c_J].
// A system object owns scratch buffers, so use one instance per thread.
#pragma once

#include "photonhier/hierarchy.hpp"
#include "photonhier/model.hpp"
#include "photonhier/pump.hpp"

#include <Eigen/Dense>

#include <vector>

namespace photonhier {

struct FullState {
    Eigen::VectorXd n;
    Eigen::VectorXd f;
};

struct ReducedState {
    Eigen::VectorXd n;
    std::vector<Eigen::VectorXd> c;  // c_j, j = 0..J
};

class ExactSystem {
public:
    explicit ExactSystem(const Model& model);

    Eigen::Index size() const noexcept { return nc_ + nm_; }
    Eigen::Index num_modes() const noexcept { return nc_; }
    const Model& model() const noexcept { return *model_; }

    Eigen::VectorXd pack(const FullState& s) const;
    FullState unpack(const Eigen::VectorXd& y) const;
    // n = seed, f = 0
    Eigen::VectorXd cold_state(double seed = 1e-9) const;

    void rhs(const Eigen::VectorXd& y, double pump, Eigen::VectorXd& dy) const;
    // Solves (sigma I - J(y)) x = r via the Schur complement on the photon block.
    // The f-f block of the Jacobian is diagonal, so this costs O(N_c^2 N_m).
    Eigen::VectorXd solve_shifted(double sigma, const Eigen::VectorXd& y, double pump,
                                  const Eigen::VectorXd& r) const;

private:
    const Model* model_;
    Eigen::Index nc_;
    Eigen::Index nm_;
    Eigen::VectorXd ea_;     // E + A
    Eigen::VectorXd ratio_;  // E / (E + A)
    mutable Eigen::VectorXd gf_;
    mutable Eigen::MatrixXd coef_;
    mutable Eigen::MatrixXd comb_;
};

class ReducedSystem {
public:
    // Level-J truncation; the hierarchy must be projected up to at least J.
    ReducedSystem(const Model& model, const Hierarchy& hierarchy, int max_level);

    Eigen::Index size() const noexcept { return nc_ + total_; }
    Eigen::Index num_modes() const noexcept { return nc_; }
    int max_level() const noexcept { return levels_ - 1; }
    Eigen::Index offset(int j) const { return offsets_.at(std::size_t(j)); }
    const Hierarchy& hierarchy() const noexcept { return *h_; }

    Eigen::VectorXd pack(const ReducedState& s) const;
    ReducedState unpack(const Eigen::VectorXd& y) const;
    // Exact state -> reduced: n copied, c_j = B_j^T f.
    Eigen::VectorXd from_full(const Eigen::VectorXd& full) const;
    // f-hat = sum_j B_j c_j
    Eigen::VectorXd molecular_excitation(const Eigen::VectorXd& y) const;
    Eigen::VectorXd cold_state(double seed = 1e-9) const;

    void rhs(const Eigen::VectorXd& y, double pump, Eigen::VectorXd& dy) const;
    // Dense LU of the (N_c + D) shifted Jacobian.
    Eigen::VectorXd solve_shifted(double sigma, const Eigen::VectorXd& y, double pump,
                                  const Eigen::VectorXd& r) const;

private:
    // Row level j: [T_{j,j-1} | T_{j,j} | T_{j,j+1}] stacked over modes, so
    // that one product with the contiguous c_{j-1..j+1} covers all neighbours.
    struct RowBlock {
        Eigen::Index col_offset;  // state offset of the first coupled level
        Eigen::MatrixXd stacked;  // (N_c d_j) x (d_{j-1} + d_j + d_{j+1})
    };

    const Model* model_;
    const Hierarchy* h_;
    int levels_;
    Eigen::Index nc_;
    Eigen::Index total_;
    std::vector<Eigen::Index> offsets_;
    std::vector<RowBlock> rows_;
    Eigen::VectorXd ea_;
    Eigen::VectorXd ratio_;
    mutable Eigen::VectorXd tmp_;
    mutable Eigen::VectorXd beta_;
    mutable Eigen::VectorXd stim_;
};

// c_j = B_j^T f for j = 0..J
std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& f, const Hierarchy& hierarchy, int max_level);
// f-hat = sum_j B_j c_j
Eigen::VectorXd reconstruct(const std::vector<Eigen::VectorXd>& c, const Hierarchy& hierarchy);

// Convenience wrappers on unpacked states.
FullState rhs_exact(double t, const FullState& state, const Model& model, const PumpSchedule& pump);
ReducedState rhs_reduced(double t, const ReducedState& state, const Model& model,
                         const Hierarchy& hierarchy, int max_level, const PumpSchedule& pump);

}  // namespace photonhier
