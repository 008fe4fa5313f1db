// Plain CSV output: header row, '.' decimal point, shortest round-trip
// scientific notation for floating-point values.
#pragma once

#include "photonhier/experiments.hpp"
#include "photonhier/hierarchy.hpp"
#include "photonhier/integrator.hpp"
#include "photonhier/model.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace photonhier {

std::string format_double(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t columns_;
    std::string path_;
};

// "n_mx_my" (2D) or "n_m" (1D), in model mode order.
std::vector<std::string> occupation_columns(const Model& model);

// t, n_..., P
void write_trajectory_csv(const std::string& path, const Model& model, const Trajectory& tr);
// t, f_0 .. f_{N_m-1}; rows given as full molecular vectors per sample
void write_excitation_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<Eigen::VectorXd>& f);
// t, epsilon, worst_mode (label)
void write_epsilon_csv(const std::string& path, const Model& model, const ErrorSeries& eps);
// bin_lo, bin_hi, then one count column per reduced method; under/overflow rows last
void write_histogram_csv(const std::string& path, const BenchmarkSummary& summary);
// x, e_<label>..., intensity_<label>...
void write_profiles_csv(const std::string& path, const ProfileTable& table);

}  // namespace photonhier
