// Physical description of a multimode dye-filled microcavity: harmonic-oscillator
// cavity modes, a lattice of molecular groups and the coupling between them.
//
// Units throughout: time in 1/kappa, length in the oscillator length l_ho,
// rates in kappa (kappa == 1).
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace photonhier {

struct CavityMode {
    int mx{0};
    int my{0};
    double absorption{0.0};  // A_i
    double emission{0.0};    // E_i

    int level() const noexcept { return mx + my; }
    std::string label() const;  // "[mx,my]"
};

struct ModeOverride {
    int mx{0};
    int my{0};
    std::optional<double> absorption;
    std::optional<double> emission;
};

// Default parameter set (dimensionless).
namespace defaults {
inline const std::vector<double> absorption_per_level{1.83e-12, 4.21e-12, 10.3e-12, 25.6e-12};
inline const std::vector<double> emission_per_level{4.81e-10, 5.69e-10, 6.97e-10, 8.31e-10};
inline constexpr int points_per_axis = 39;
inline constexpr double density_2d = 1e13;   // molecules per l_ho^2
inline constexpr double gamma_down = 0.25;   // non-radiative decay, kappa/4
// Spacing at which density * cell area gives 1e12 molecules per group.
double spacing();
double density_1d();  // keeps 1e12 molecules per group at the default spacing
}  // namespace defaults

// All (mx,my) with mx+my <= max_level, sorted by (mx+my, mx). For 1D models
// my is always zero and the mode index runs over m = 0..max_level.
std::vector<CavityMode> build_modes(int max_level, const std::vector<double>& absorption_per_level,
                                    const std::vector<double>& emission_per_level,
                                    int dimensions = 2);

// Unit-normalised 1D oscillator eigenfunction Phi_m(x), evaluated with the
// stable three-term recurrence for normalised Hermite functions.
double hermite_function(int m, double x);

// |Phi_mx(x)|^2 |Phi_my(y)|^2. For 1D modes the y factor is dropped.
double mode_intensity(const CavityMode& mode, double x, double y, int dimensions = 2);

struct GridSpec {
    int points_per_axis{defaults::points_per_axis};
    std::optional<double> spacing;  // one of spacing / extent; spacing wins if both
    std::optional<double> extent;   // half-width: points span [-extent, extent]

    double resolved_spacing() const;
};

struct MolecularGrid {
    int dimensions{2};
    int points_per_axis{0};
    double spacing{0.0};
    Eigen::MatrixXd positions;       // N_m x dimensions
    Eigen::VectorXd molecules;       // N_j per group
    double density{0.0};

    Eigen::Index size() const noexcept { return positions.rows(); }
    double cell_area() const noexcept;  // spacing^dimensions
};

struct ModelConfig {
    int dimensions{2};
    int max_level{3};
    std::vector<double> absorption_per_level{defaults::absorption_per_level};
    std::vector<double> emission_per_level{defaults::emission_per_level};
    std::vector<ModeOverride> overrides;
    GridSpec grid;
    std::optional<double> density;  // unset -> dimension-dependent default
    double gamma_down{defaults::gamma_down};

    double resolved_density() const;
};

// Immutable after construction.
class Model {
public:
    explicit Model(const ModelConfig& config);

    const std::vector<CavityMode>& modes() const noexcept { return modes_; }
    const MolecularGrid& grid() const noexcept { return grid_; }
    int dimensions() const noexcept { return grid_.dimensions; }
    Eigen::Index num_modes() const noexcept { return static_cast<Eigen::Index>(modes_.size()); }
    Eigen::Index num_groups() const noexcept { return grid_.size(); }

    // N_c x N_m single-molecule couplings g_ij = |Phi_i(x_j)|^2 (units l_ho^-d).
    const Eigen::MatrixXd& g() const noexcept { return g_; }
    // G_ij = g_ij N_j
    const Eigen::MatrixXd& G() const noexcept { return G_; }
    // gamma_i = A_i sum_j G_ij + kappa
    const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
    const Eigen::VectorXd& absorption() const noexcept { return absorption_; }
    const Eigen::VectorXd& emission() const noexcept { return emission_; }
    double kappa() const noexcept { return 1.0; }
    double gamma_down() const noexcept { return gamma_down_; }

    // Diagonal of A^(i): -(E_i + A_i) g_ip, as an N_c x N_m matrix (row i).
    Eigen::MatrixXd coupling_diagonals() const;
    // E_i / (E_i + A_i)
    Eigen::VectorXd emission_ratio() const;

    int mode_index(int mx, int my) const;  // -1 if absent

private:
    std::vector<CavityMode> modes_;
    MolecularGrid grid_;
    Eigen::MatrixXd g_;
    Eigen::MatrixXd G_;
    Eigen::VectorXd gamma_;
    Eigen::VectorXd absorption_;
    Eigen::VectorXd emission_;
    double gamma_down_{defaults::gamma_down};
};

Model build_model(const ModelConfig& config);

}  // namespace photonhier
