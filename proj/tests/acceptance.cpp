// Acceptance checks, one per criterion. Prints one PASS/FAIL line each.
//
//   acceptance            all criteria
//   acceptance 3 5        selected criteria
//   acceptance 6 --full   benchmark over the full 33-power grid
//
// Exit status is 0 only if every selected criterion passes.

#include "fixtures.hpp"
#include "photonhier/dynamics.hpp"
#include "photonhier/experiments.hpp"
#include "photonhier/hierarchy.hpp"
#include "photonhier/integrator.hpp"
#include "photonhier/model.hpp"
#include "photonhier/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace photonhier;

namespace {

// Tolerances, pinned.
constexpr double kDualTol = 1e-10;
constexpr double kTridiagTol = 1e-9;
constexpr double kClosureTol = 1e-6;
constexpr double kEps2Max = 0.01;
constexpr double kEps1Lo = 0.1;
constexpr double kEps1Hi = 0.6;
constexpr double kEps1Median = 0.1;
constexpr double kT1WorstRatio = 0.1;
constexpr double kT0MedianRatio = 0.05;
constexpr double kDegeneracyTol = 0.01;

const std::vector<Eigen::Index> kExpectedDims{10, 37, 79, 110};
const std::vector<double> kRankTols{1e-8, 1e-9, 1e-10, 1e-11, 1e-12};
const std::vector<int> kBenchmarkSubset{0, 4, 8, 12, 16};

struct Outcome {
    bool pass{false};
    std::string detail;
};

template <class T>
std::string list(const std::vector<T>& v) {
    std::ostringstream s;
    s.precision(8);
    s << '[';
    for (std::size_t k = 0; k < v.size(); ++k) s << (k ? ", " : "") << v[k];
    s << ']';
    return s.str();
}

std::string num(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}

ModelConfig three_mode_1d() {
    ModelConfig c;
    c.dimensions = 1;
    c.max_level = 2;
    c.absorption_per_level = {1.83e-12, 4.21e-12, 10.3e-12};
    c.emission_per_level = {4.81e-10, 5.69e-10, 6.97e-10};
    return c;
}

// --- 1: subspace dimensions -------------------------------------------------

Outcome subspace_dimensions() {
    const Model m{ModelConfig{}};
    Outcome o{true, {}};
    for (double tol : kRankTols) {
        const Hierarchy h = build_hierarchy(m, 3, tol);
        const auto dims = h.dims();
        if (dims != kExpectedDims) o.pass = false;
        o.detail += "tol " + num(tol) + " -> " + list(dims) + "; ";
    }
    o.detail += "expected " + list(kExpectedDims) + " at every tolerance";
    return o;
}

// --- 2: tri-diagonality ----------------------------------------------------

Outcome tridiagonality() {
    const Model m{ModelConfig{}};
    const Hierarchy h = build_hierarchy(m, 3);
    const Eigen::MatrixXd a = m.coupling_diagonals();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double scale = a.row(i).cwiseAbs().maxCoeff();
        for (int j = 0; j < h.levels(); ++j) {
            for (int k = j + 2; k < h.levels(); ++k) {
                const Eigen::MatrixXd t = h.basis(j).transpose() * a.row(i).transpose().asDiagonal() * h.basis(k);
                worst = std::max(worst, t.cwiseAbs().maxCoeff() / scale);
            }
        }
    }
    return {worst < kTridiagTol, "max |B_j^T A B_k| / |A|_max over |j-k|>=2 = " + num(worst) + " (limit " +
                                     num(kTridiagTol) + ")"};
}

// --- 3: dual basis and 1D profiles -----------------------------------------

Outcome dual_basis() {
    const Model m{ModelConfig{}};
    const Level0 l0 = build_level0(m);
    const Eigen::MatrixXd ge = m.G() * l0.duals;
    const double res = (ge - Eigen::MatrixXd::Identity(ge.rows(), ge.cols())).cwiseAbs().maxCoeff();

    const Model m1{three_mode_1d()};
    const ProfileTable t = emit_profiles_1d(m1, 3);
    const auto n = Eigen::Index(t.x.size());
    Eigen::Index centre = 0;
    for (Eigen::Index p = 1; p < n; ++p) {
        if (std::abs(t.x[std::size_t(p)]) < std::abs(t.x[std::size_t(centre)])) centre = p;
    }
    const double e1_centre = t.profiles(centre, 1);
    const double e0_left = t.profiles(0, 0);
    const double e0_right = t.profiles(n - 1, 0);
    const bool pass = res < kDualTol && e1_centre < 0.0 && e0_left < 0.0 && e0_right < 0.0;
    return {pass, "|G E - I|_max = " + num(res) + "; e_1(0) = " + num(e1_centre) + "; e_0 at tails = " +
                      num(e0_left) + ", " + num(e0_right)};
}

// --- 4: closure equivalence ------------------------------------------------

Outcome closure_equivalence() {
    const Model m{fixtures::toy_1d()};
    const Hierarchy h = build_closed_hierarchy(m);
    const int J = h.levels() - 1;
    IntegratorSettings is;
    is.rel_tol = 1e-10;
    is.abs_tol = 1e-14;
    is.sample_interval = 0.5;
    const auto pump = PumpSchedule::quench(6.58e-6, 2e-5);
    const Eigen::VectorXd y0 = steady_state_exact(m, 6.58e-6).state;
    const Trajectory ex = simulate(m, &h, Method{-1}, y0, 0.0, 200.0, pump, is);
    const Trajectory rd = simulate(m, &h, Method{J}, to_method_state(m, &h, Method{J}, y0), 0.0, 200.0, pump, is);
    if (ex.times.size() != rd.times.size()) return {false, "sample counts differ"};
    double worst = 0.0;
    for (std::size_t k = 0; k < ex.times.size(); ++k) {
        worst = std::max(worst, ((ex.n[k] - rd.n[k]).array().abs() / ex.n[k].array().abs()).maxCoeff());
    }
    return {worst < kClosureTol, "N_c = " + std::to_string(m.num_modes()) + ", N_m = " +
                                     std::to_string(m.num_groups()) + ", closure at level " + std::to_string(J) +
                                     " (dims " + list(h.dims()) + "); max relative deviation of n_i = " +
                                     num(worst) + " (limit " + num(kClosureTol) + ")"};
}

// --- 5: quench accuracy ----------------------------------------------------

// Peak index, and whether it is sharp: the series drops to <= 90% of the
// peak within `window` samples on both sides.
struct Peak {
    std::size_t index{0};
    double value{0.0};
    bool interior{false};
    bool sharp{false};
};

Peak find_peak(const std::vector<double>& v, std::size_t window) {
    Peak p;
    p.index = std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
    p.value = v[p.index];
    p.interior = p.index > 0 && p.index + 1 < v.size();
    if (!p.interior) return p;
    bool left = false, right = false;
    for (std::size_t k = 1; k <= window; ++k) {
        if (p.index >= k && v[p.index - k] <= 0.9 * p.value) left = true;
        if (p.index + k < v.size() && v[p.index + k] <= 0.9 * p.value) right = true;
    }
    p.sharp = left && right;
    return p;
}

Outcome quench_accuracy() {
    const Model m{ModelConfig{}};
    const Hierarchy h = build_hierarchy(m, 2);
    QuenchSpec spec;  // 6.58e-6 -> 2e-5, t_final 200
    spec.levels = {1, 2};
    IntegratorSettings is;
    is.sample_interval = 0.5;
    const QuenchResult r = run_quench(spec, m, h, is);
    const ErrorSeries& e1 = r.epsilon.at(1);
    const ErrorSeries& e2 = r.epsilon.at(2);

    const Trajectory& ex = r.runs.front().trajectory;
    const Eigen::Index i02 = m.mode_index(0, 2);
    const Eigen::Index i11 = m.mode_index(1, 1);
    std::vector<double> n02, n11;
    for (const auto& n : ex.n) {
        n02.push_back(n(i02));
        n11.push_back(n(i11));
    }
    // 10 samples = 5 / kappa
    const Peak p02 = find_peak(n02, 10);
    const Peak p11 = find_peak(n11, 10);
    const bool condenses = p02.interior && p02.value >= 1.0 && p02.value >= 10.0 * n02.front();
    const bool decondenses = condenses && n02.back() <= 0.1 * p02.value;
    const bool cusp = p11.interior && p11.sharp;

    const bool quantitative =
        e2.max() < kEps2Max && e1.max() >= kEps1Lo && e1.max() <= kEps1Hi && e1.median() < kEps1Median;
    std::ostringstream d;
    d << "max eps_2 = " << num(e2.max()) << " (< " << kEps2Max << "); max eps_1 = " << num(e1.max()) << " (in ["
      << kEps1Lo << ", " << kEps1Hi << "]); median eps_1 = " << num(e1.median()) << " (< " << kEps1Median
      << "); [0,2]: n(0) = " << num(n02.front()) << ", peak " << num(p02.value) << " at t = "
      << ex.times[p02.index] << ", n(end) = " << num(n02.back()) << (decondenses ? " condenses+decondenses" : " no condense/decondense")
      << "; [1,1]: peak " << num(p11.value) << " at t = " << ex.times[p11.index] << (cusp ? " cusp" : " no cusp")
      << "; [0,0]: n(end) = " << num(ex.n.back()(0));
    return {quantitative && decondenses && cusp, d.str()};
}

// --- 6: speedup ordering ---------------------------------------------------

Outcome speedup_ordering(bool full) {
    const Model m{ModelConfig{}};
    const Hierarchy h = build_hierarchy(m, 3);
    BenchmarkSpec spec;
    if (!full) spec.subset = kBenchmarkSubset;
    spec.levels = {0, 1, 2, 3};
    spec.threads = int(std::max(1u, std::thread::hardware_concurrency()));
    IntegratorSettings is;
    const BenchmarkResult res = run_benchmark(spec, m, h, is);
    const BenchmarkSummary s = summarize(res);

    std::map<std::string, const MethodSummary*> by;
    for (const auto& ms : s.methods) by[ms.method] = &ms;
    const double t0 = by.at("level_0")->median_cpu, t1 = by.at("level_1")->median_cpu;
    const double t2 = by.at("level_2")->median_cpu, t3 = by.at("level_3")->median_cpu;
    const double te = by.at("exact")->median_cpu;
    const bool ordered = t0 < t1 && t1 < t2 && t2 < t3 && t3 < te;
    const double worst1 = by.at("level_1")->max;
    const double med0 = by.at("level_0")->median;
    const bool pass = s.failures.empty() && ordered && worst1 <= kT1WorstRatio && med0 <= kT0MedianRatio;

    std::ostringstream d;
    d << res.powers.size() << " powers " << list(res.powers) << ", " << res.pairs.size()
      << " pairs; median CPU s: t_0 = " << num(t0) << ", t_1 = " << num(t1) << ", t_2 = " << num(t2)
      << ", t_3 = " << num(t3) << ", t_exact = " << num(te) << (ordered ? " (ordered)" : " (NOT ordered)")
      << "; worst t_1/t_exact = " << num(worst1) << " (<= " << kT1WorstRatio << "); median t_0/t_exact = "
      << num(med0) << " (<= " << kT0MedianRatio << "); median t_2/t_exact = " << num(by.at("level_2")->median)
      << ", t_3/t_exact = " << num(by.at("level_3")->median) << "; failures " << s.failures.size();
    for (const auto& f : s.failures) d << "; " << f;
    return {pass, d.str()};
}

// --- 7: pulsed degeneracy --------------------------------------------------

Outcome pulsed_degeneracy() {
    const Model m{ModelConfig{}};
    const PulsedSpec spec;  // d = 0.01, T = 40, P_avg = 10^-3.2
    const PulsedResult r = run_pulsed(spec, m, nullptr, Method{-1}, IntegratorSettings{});
    const double a = r.average(m.mode_index(1, 1));
    const double b = r.average(m.mode_index(0, 2));
    const double rel = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
    return {rel < kDegeneracyTol, "<n_[1,1]> = " + num(a) + ", <n_[0,2]> = " + num(b) + ", relative difference " +
                                      num(rel) + " (limit " + num(kDegeneracyTol) + "); drift between periods " +
                                      num(r.drift)};
}

// --- 8: properties ---------------------------------------------------------

Outcome properties() {
    const Model m{ModelConfig{}};
    const Hierarchy h = build_hierarchy(m, 3);
    std::vector<std::string> failed;
    std::ostringstream d;
    const Eigen::Index nc = m.num_modes();

    {  // fixed points are preserved by the integrator
        IntegratorSettings is;
        is.sample_interval = 0.0;
        const double P = 1e-3;
        const Eigen::VectorXd y = steady_state_exact(m, P).state;
        const Trajectory tr = simulate(m, &h, Method{-1}, y, 0.0, 100.0, PumpSchedule::constant(P), is);
        const double drift =
            ((tr.final_state.head(nc) - y.head(nc)).array().abs() / y.head(nc).array().abs()).maxCoeff();
        d << "fixed point drift " << num(drift);
        if (!(drift < 10 * is.rel_tol)) failed.push_back("fixed point");
    }
    {  // Pythagoras for the level projection
        std::srand(17);
        double worst = 0.0;
        bool contract = true;
        for (int k = 0; k < 5; ++k) {
            const Eigen::VectorXd f = (Eigen::VectorXd::Random(m.num_groups()).array() + 1.0) * 0.5;
            const auto c = lift(f, h, 3);
            const Eigen::VectorXd fh = reconstruct(c, h);
            double csq = 0.0;
            for (const auto& cj : c) csq += cj.squaredNorm();
            worst = std::max(worst, std::abs(f.squaredNorm() - csq - (f - fh).squaredNorm()) / f.squaredNorm());
            contract = contract && fh.norm() <= f.norm() * (1 + 1e-14);
        }
        d << "; Pythagoras defect " << num(worst);
        if (!(worst < 1e-10) || !contract) failed.push_back("Pythagoras");
    }
    {  // pulse energy, positivity, determinism on one pulsed run
        const PulsedSpec spec;
        const auto pump = PumpSchedule::pulsed(spec.average, spec.duty, spec.period);
        const double t_end = 3 * spec.period;
        IntegratorSettings is;
        is.record_states = true;
        is.sample_interval = 1.0;
        double energy = 0.0;
        const StepObserver sum = [&](const DenseStep& ds) {
            energy += ds.pump * ds.h();
            return false;
        };
        const Eigen::VectorXd y0 = steady_state_exact(m, spec.average).state;
        const Trajectory a = simulate(m, &h, Method{-1}, y0, 0.0, t_end, pump, is, sum);
        const double expected = spec.average * t_end;
        const double energy_err = std::abs(energy - expected) / expected;
        const double analytic_err = std::abs(pump.integral(0.0, t_end) - expected) / expected;
        d << "; pulse energy error " << num(energy_err) << " (schedule " << num(analytic_err) << ")";
        if (!(energy_err < 1e-12 && analytic_err < 1e-12)) failed.push_back("pulse energy");

        // exact dynamics: n >= -10 abs_tol, f in [-10 abs_tol, 1 + 10 abs_tol]
        const double slack = 10 * is.abs_tol;
        double nmin = a.min_population, fmin = 1.0, fmax = 0.0;
        for (const auto& st : a.states) {
            nmin = std::min(nmin, st.head(nc).minCoeff());
            fmin = std::min(fmin, st.tail(m.num_groups()).minCoeff());
            fmax = std::max(fmax, st.tail(m.num_groups()).maxCoeff());
        }
        d << "; min n " << num(nmin) << ", f in [" << num(fmin) << ", " << num(fmax) << "]";
        if (nmin < -slack || fmin < -slack || fmax > 1.0 + slack) failed.push_back("positivity");

        const Trajectory b = simulate(m, &h, Method{-1}, y0, 0.0, t_end, pump, is);
        bool same = a.final_state == b.final_state && a.n.size() == b.n.size();
        for (std::size_t k = 0; same && k < a.n.size(); ++k) same = a.n[k] == b.n[k];
        d << "; determinism " << (same ? "bitwise" : "DIFFERS");
        if (!same) failed.push_back("determinism");
    }
    {  // ground-mode share grows as the duty cycle shrinks
        std::vector<double> share;
        for (double duty : {1.0, 0.1, 0.01}) {
            PulsedSpec spec;
            spec.duty = duty;
            spec.warmup_periods = 3;
            spec.averaging_periods = 3;
            const PulsedResult r = run_pulsed(spec, m, nullptr, Method{-1}, IntegratorSettings{});
            share.push_back(r.average(0) / r.average.sum());
        }
        d << "; ground share at d = 1, 0.1, 0.01: " << list(share);
        if (!(share[0] < share[1] && share[1] < share[2])) failed.push_back("duty-cycle trend");
    }
    if (!failed.empty()) d << "; failed: " << list(failed);
    return {failed.empty(), d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    bool full = false;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "--full") {
            full = true;
        } else {
            const int c = std::atoi(a.c_str());
            if (c < 1 || c > 8) {
                std::cerr << "usage: acceptance [1..8 ...] [--full]\n";
                return 2;
            }
            selected.insert(c);
        }
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

    bool all = true;
    for (int c : selected) {
        Outcome o;
        const double t0 = thread_cpu_seconds();
        try {
            switch (c) {
                case 1: o = subspace_dimensions(); break;
                case 2: o = tridiagonality(); break;
                case 3: o = dual_basis(); break;
                case 4: o = closure_equivalence(); break;
                case 5: o = quench_accuracy(); break;
                case 6: o = speedup_ordering(full); break;
                case 7: o = pulsed_degeneracy(); break;
                case 8: o = properties(); break;
            }
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = thread_cpu_seconds() - t0;
        std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
                  << num(dt) << " s]" << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
