#include "photonhier/csv.hpp"

#include "photonhier/errors.hpp"

#include <charconv>

namespace photonhier {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()), path_(path) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ConfigError("CSV row width mismatch in '" + path_ + "'");
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out_ << ',';
        out_ << cells[k];
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

std::vector<std::string> occupation_columns(const Model& model) {
    std::vector<std::string> cols;
    for (const auto& m : model.modes()) {
        cols.push_back(model.dimensions() == 1 ? "n_" + std::to_string(m.mx)
                                               : "n_" + std::to_string(m.mx) + "_" + std::to_string(m.my));
    }
    return cols;
}

void write_trajectory_csv(const std::string& path, const Model& model, const Trajectory& tr) {
    std::vector<std::string> header{"t"};
    for (auto& c : occupation_columns(model)) header.push_back(c);
    header.push_back("P");
    CsvWriter w(path, header);
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        row[0] = tr.times[k];
        for (Eigen::Index i = 0; i < tr.n[k].size(); ++i) row[std::size_t(i) + 1] = tr.n[k](i);
        row.back() = tr.pump[k];
        w.row(row);
    }
}

void write_excitation_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<Eigen::VectorXd>& f) {
    if (times.size() != f.size() || f.empty()) throw ConfigError("excitation snapshots do not match sample times");
    std::vector<std::string> header{"t"};
    for (Eigen::Index p = 0; p < f.front().size(); ++p) header.push_back("f_" + std::to_string(p));
    CsvWriter w(path, header);
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        row[0] = times[k];
        for (Eigen::Index p = 0; p < f[k].size(); ++p) row[std::size_t(p) + 1] = f[k](p);
        w.row(row);
    }
}

void write_epsilon_csv(const std::string& path, const Model& model, const ErrorSeries& eps) {
    CsvWriter w(path, {"t", "epsilon", "worst_mode"});
    for (std::size_t k = 0; k < eps.times.size(); ++k) {
        const auto& mode = model.modes()[std::size_t(eps.worst_mode[k])];
        w.row(std::vector<std::string>{format_double(eps.times[k]), format_double(eps.epsilon[k]),
                                       "\"" + mode.label() + "\""});
    }
}

void write_histogram_csv(const std::string& path, const BenchmarkSummary& summary) {
    std::vector<std::string> header{"bin_lo", "bin_hi"};
    std::vector<const MethodSummary*> reduced;
    for (const auto& m : summary.methods) {
        if (m.method == "exact") continue;
        header.push_back(m.method);
        reduced.push_back(&m);
    }
    CsvWriter w(path, header);
    const std::size_t bins = summary.edges.size() - 1;
    for (std::size_t b = 0; b < bins; ++b) {
        std::vector<std::string> row{format_double(summary.edges[b]), format_double(summary.edges[b + 1])};
        for (const auto* m : reduced) row.push_back(std::to_string(m->counts[b]));
        w.row(row);
    }
    std::vector<std::string> under{format_double(0.0), format_double(summary.edges.front())};
    std::vector<std::string> over{format_double(summary.edges.back()), "inf"};
    for (const auto* m : reduced) {
        under.push_back(std::to_string(m->underflow));
        over.push_back(std::to_string(m->overflow));
    }
    w.row(under);
    w.row(over);
}

void write_profiles_csv(const std::string& path, const ProfileTable& table) {
    std::vector<std::string> header{"x"};
    for (const auto& l : table.labels) header.push_back("e_" + l.substr(1, l.size() - 2));
    for (const auto& l : table.labels) header.push_back("intensity_" + l.substr(1, l.size() - 2));
    CsvWriter w(path, header);
    const Eigen::Index count = table.profiles.cols();
    std::vector<double> row(header.size());
    for (std::size_t p = 0; p < table.x.size(); ++p) {
        row[0] = table.x[p];
        for (Eigen::Index i = 0; i < count; ++i) {
            row[std::size_t(i) + 1] = table.profiles(Eigen::Index(p), i);
            row[std::size_t(i + count) + 1] = table.intensities(Eigen::Index(p), i);
        }
        w.row(row);
    }
}

}  // namespace photonhier
