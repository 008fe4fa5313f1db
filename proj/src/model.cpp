#include "photonhier/model.hpp"

#include "photonhier/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace photonhier {

std::string CavityMode::label() const {
    std::ostringstream os;
    os << '[' << mx << ',' << my << ']';
    return os.str();
}

namespace defaults {
double spacing() {
    return std::sqrt(1e12 / density_2d);
}
double density_1d() {
    return 1e12 / spacing();
}
}  // namespace defaults

std::vector<CavityMode> build_modes(int max_level, const std::vector<double>& absorption_per_level,
                                    const std::vector<double>& emission_per_level,
                                    int dimensions) {
    if (max_level < 0) {
        throw ConfigError("max_level must be non-negative");
    }
    const auto expected = static_cast<std::size_t>(max_level) + 1;
    if (absorption_per_level.size() != expected || emission_per_level.size() != expected) {
        std::ostringstream os;
        os << "A_per_level/E_per_level need " << expected << " entries (got "
           << absorption_per_level.size() << " and " << emission_per_level.size() << ")";
        throw ConfigError(os.str());
    }
    if (dimensions != 1 && dimensions != 2) {
        throw ConfigError("dimensions must be 1 or 2");
    }
    for (std::size_t l = 0; l < expected; ++l) {
        if (!(absorption_per_level[l] > 0.0) || !(emission_per_level[l] > 0.0)) {
            throw ConfigError("absorption and emission rates must be positive");
        }
    }

    std::vector<CavityMode> modes;
    for (int level = 0; level <= max_level; ++level) {
        const auto l = static_cast<std::size_t>(level);
        if (dimensions == 1) {
            modes.push_back({level, 0, absorption_per_level[l], emission_per_level[l]});
            continue;
        }
        for (int mx = 0; mx <= level; ++mx) {
            modes.push_back({mx, level - mx, absorption_per_level[l], emission_per_level[l]});
        }
    }
    return modes;
}

double hermite_function(int m, double x) {
    // psi_0 = pi^{-1/4} e^{-x^2/2}
    // psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    for (int k = 0; k < m; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double mode_intensity(const CavityMode& mode, double x, double y, int dimensions) {
    const double px = hermite_function(mode.mx, x);
    if (dimensions == 1) {
        return px * px;
    }
    const double py = hermite_function(mode.my, y);
    return px * px * py * py;
}

double GridSpec::resolved_spacing() const {
    if (spacing) {
        return *spacing;
    }
    if (extent) {
        if (points_per_axis < 2) {
            throw ConfigError("grid.extent needs at least two points per axis");
        }
        return 2.0 * *extent / (points_per_axis - 1);
    }
    return defaults::spacing();
}

double MolecularGrid::cell_area() const noexcept {
    return dimensions == 1 ? spacing : spacing * spacing;
}

double ModelConfig::resolved_density() const {
    if (density) {
        return *density;
    }
    return dimensions == 1 ? defaults::density_1d() : defaults::density_2d;
}

namespace {

MolecularGrid make_grid(const ModelConfig& config) {
    MolecularGrid grid;
    grid.dimensions = config.dimensions;
    grid.points_per_axis = config.grid.points_per_axis;
    if (grid.points_per_axis <= 0) {
        throw ConfigError("grid.points_per_axis must be positive");
    }
    grid.spacing = config.grid.resolved_spacing();
    if (!(grid.spacing > 0.0) || !std::isfinite(grid.spacing)) {
        throw ConfigError("grid spacing must be positive");
    }
    grid.density = config.resolved_density();
    if (!(grid.density > 0.0)) {
        throw ConfigError("density must be positive");
    }

    const int n = grid.points_per_axis;
    const double centre = 0.5 * (n - 1);
    const Eigen::Index total = config.dimensions == 1 ? n : Eigen::Index(n) * n;
    grid.positions.resize(total, config.dimensions);
    Eigen::Index p = 0;
    if (config.dimensions == 1) {
        for (int a = 0; a < n; ++a) {
            grid.positions(p++, 0) = (a - centre) * grid.spacing;
        }
    } else {
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                grid.positions(p, 0) = (a - centre) * grid.spacing;
                grid.positions(p, 1) = (b - centre) * grid.spacing;
                ++p;
            }
        }
    }
    grid.molecules = Eigen::VectorXd::Constant(total, grid.density * grid.cell_area());
    return grid;
}

}  // namespace

Model::Model(const ModelConfig& config) : gamma_down_(config.gamma_down) {
    if (!(config.gamma_down >= 0.0)) {
        throw ConfigError("Gamma_down must be non-negative");
    }
    modes_ = build_modes(config.max_level, config.absorption_per_level, config.emission_per_level,
                         config.dimensions);
    for (const auto& ov : config.overrides) {
        const int idx = [&] {
            for (std::size_t i = 0; i < modes_.size(); ++i) {
                if (modes_[i].mx == ov.mx && modes_[i].my == ov.my) return int(i);
            }
            return -1;
        }();
        if (idx < 0) {
            throw ConfigError("mode override refers to unknown mode [" + std::to_string(ov.mx) + "," +
                              std::to_string(ov.my) + "]");
        }
        // A_i = 0 is permitted here (it removes absorption from that mode).
        if (ov.absorption) modes_[std::size_t(idx)].absorption = *ov.absorption;
        if (ov.emission) modes_[std::size_t(idx)].emission = *ov.emission;
        if (modes_[std::size_t(idx)].absorption < 0.0 || modes_[std::size_t(idx)].emission <= 0.0) {
            throw ConfigError("mode override rates out of range");
        }
    }
    grid_ = make_grid(config);

    const auto nc = num_modes();
    const auto nm = num_groups();
    g_.resize(nc, nm);
    absorption_.resize(nc);
    emission_.resize(nc);
    for (Eigen::Index i = 0; i < nc; ++i) {
        const auto& mode = modes_[std::size_t(i)];
        absorption_(i) = mode.absorption;
        emission_(i) = mode.emission;
        for (Eigen::Index j = 0; j < nm; ++j) {
            const double x = grid_.positions(j, 0);
            const double y = grid_.dimensions == 2 ? grid_.positions(j, 1) : 0.0;
            g_(i, j) = mode_intensity(mode, x, y, grid_.dimensions);
        }
    }
    G_ = g_ * grid_.molecules.asDiagonal();
    gamma_ = absorption_.cwiseProduct(G_.rowwise().sum()).array() + kappa();
}

Eigen::MatrixXd Model::coupling_diagonals() const {
    return (-(emission_ + absorption_)).asDiagonal() * g_;
}

Eigen::VectorXd Model::emission_ratio() const {
    return emission_.cwiseQuotient(emission_ + absorption_);
}

int Model::mode_index(int mx, int my) const {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].mx == mx && modes_[i].my == my) return int(i);
    }
    return -1;
}

Model build_model(const ModelConfig& config) {
    return Model(config);
}

}  // namespace photonhier
