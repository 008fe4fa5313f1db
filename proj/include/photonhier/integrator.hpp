// Adaptive Dormand-Prince 5(4) integrator with continuous output.
//
// The pump schedule is piecewise constant: the integration interval is cut at
// every pump discontinuity and each piece is integrated as a fresh initial
// value problem, so no step straddles an edge.
#pragma once

#include "photonhier/errors.hpp"
#include "photonhier/pump.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace photonhier {

struct IntegratorSettings {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    double max_step{std::numeric_limits<double>::infinity()};
    double initial_step{0.0};     // 0: automatic
    double sample_interval{0.5};  // 0: no intermediate samples
    bool record_states{false};    // keep the whole state vector at every sample
    long long max_steps{2'000'000'000LL};

    void validate() const;
};

struct IntegrationStats {
    long long steps{0};
    long long rejected{0};
    long long rhs_evals{0};
    double cpu_seconds{0.0};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> n;       // photon occupations per sample
    std::vector<Eigen::VectorXd> states;  // full state per sample (if recorded)
    std::vector<double> pump;             // P(t) per sample
    std::vector<double> segment_starts;   // restart times (t0 and every pump edge)
    IntegrationStats stats;
    Eigen::VectorXd final_state;
    double final_time{0.0};
    bool stopped_early{false};

    // positivity monitors over accepted steps
    double min_population{std::numeric_limits<double>::infinity()};
};

// One accepted step with its continuous extension.
class DenseStep {
public:
    double t0{0.0};
    double t1{0.0};
    double pump{0.0};
    const Eigen::VectorXd* y0{nullptr};
    const Eigen::VectorXd* y1{nullptr};

    double h() const noexcept { return t1 - t0; }
    Eigen::VectorXd at(double t) const;  // 4th-order interpolant
    Eigen::VectorXd integral() const;    // exact integral of the interpolant over [t0, t1]

private:
    template <class System>
    friend class DormandPrince;
    void prepare() const;

    const Eigen::VectorXd* k1_{nullptr};
    const Eigen::VectorXd* k3_{nullptr};
    const Eigen::VectorXd* k4_{nullptr};
    const Eigen::VectorXd* k5_{nullptr};
    const Eigen::VectorXd* k6_{nullptr};
    const Eigen::VectorXd* k7_{nullptr};
    mutable bool ready_{false};
    mutable Eigen::VectorXd r3_, r4_, r5_;
};

// Return true to stop the integration after this step.
using StepObserver = std::function<bool(const DenseStep&)>;

double thread_cpu_seconds();

template <class System>
class DormandPrince {
public:
    DormandPrince(const System& system, IntegratorSettings settings)
        : sys_(system), s_(std::move(settings)) {
        s_.validate();
    }

    Trajectory run(const Eigen::VectorXd& y0, double t0, double t1, const PumpSchedule& pump,
                   const StepObserver& observer = {});

private:
    double initial_step(double t, const Eigen::VectorXd& y, double pump, const Eigen::VectorXd& f0);
    void sample(Trajectory& tr, double t, const Eigen::VectorXd& y, double pump) const;

    const System& sys_;
    IntegratorSettings s_;
    Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
    long long evals_{0};
};

template <class System>
Trajectory integrate(const System& system, const Eigen::VectorXd& y0, double t0, double t1,
                     const PumpSchedule& pump, const IntegratorSettings& settings,
                     const StepObserver& observer = {}) {
    DormandPrince<System> dp(system, settings);
    return dp.run(y0, t0, t1, pump, observer);
}

// ---------------------------------------------------------------------------

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp5

template <class System>
double DormandPrince<System>::initial_step(double t, const Eigen::VectorXd& y, double pump,
                                           const Eigen::VectorXd& f0) {
    (void)t;
    if (s_.initial_step > 0.0) return s_.initial_step;
    const Eigen::ArrayXd sc = s_.abs_tol + s_.rel_tol * y.array().abs();
    const double d0 = std::sqrt((y.array() / sc).square().mean());
    const double d1 = std::sqrt((f0.array() / sc).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, s_.max_step);
    ytmp_ = y + h0 * f0;
    sys_.rhs(ytmp_, pump, k2_);
    ++evals_;
    const double d2 = std::sqrt(((k2_ - f0).array() / sc).square().mean()) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, s_.max_step});
}

template <class System>
void DormandPrince<System>::sample(Trajectory& tr, double t, const Eigen::VectorXd& y, double pump) const {
    tr.times.push_back(t);
    tr.n.push_back(y.head(sys_.num_modes()));
    tr.pump.push_back(pump);
    if (s_.record_states) tr.states.push_back(y);
}

template <class System>
Trajectory DormandPrince<System>::run(const Eigen::VectorXd& y0, double t0, double t1,
                                      const PumpSchedule& pump, const StepObserver& observer) {
    using namespace dp5;
    if (y0.size() != sys_.size()) throw ConfigError("initial state has the wrong size");
    if (!y0.allFinite()) throw IntegrationError("non-finite initial state");
    if (!(t1 >= t0)) throw ConfigError("integration interval must be ordered");

    const double cpu_start = thread_cpu_seconds();
    const Eigen::Index nc = sys_.num_modes();
    Trajectory tr;
    evals_ = 0;

    std::vector<double> edges{t0};
    for (double b : pump.breakpoints(t0, t1)) edges.push_back(b);
    edges.push_back(t1);

    Eigen::VectorXd y = y0;
    double t = t0;
    sample(tr, t, y, pump(t0));
    const double dt_sample = s_.sample_interval;
    long long next_sample = 1;
    auto sample_time = [&](long long k) { return t0 + double(k) * dt_sample; };

    bool stop = false;
    for (std::size_t seg = 0; seg + 1 < edges.size() && !stop; ++seg) {
        const double ts = edges[seg];
        const double te = edges[seg + 1];
        if (te <= ts) continue;
        tr.segment_starts.push_back(ts);
        const double p = pump(0.5 * (ts + te));
        t = ts;

        sys_.rhs(y, p, k1_);
        ++evals_;
        double h = std::min(initial_step(t, y, p, k1_), te - ts);
        double err_old = 1e-4;
        bool last_rejected = false;

        while (t < te) {
            if (tr.stats.steps >= s_.max_steps) {
                throw IntegrationError("maximum number of steps exceeded at t = " + std::to_string(t));
            }
            bool last = false;
            if (t + h >= te || te - (t + h) < 1e-12 * std::max(1.0, std::abs(te))) {
                h = te - t;
                last = true;
            }
            const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (h < hmin) {
                throw StiffnessError("step size underflow at t = " + std::to_string(t) +
                                         " (h = " + std::to_string(h) + "); the problem is too stiff for "
                                         "explicit integration or the state became non-finite",
                                     t, h);
            }

            ytmp_ = y + h * a21 * k1_;
            sys_.rhs(ytmp_, p, k2_);
            ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
            sys_.rhs(ytmp_, p, k3_);
            ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
            sys_.rhs(ytmp_, p, k4_);
            ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
            sys_.rhs(ytmp_, p, k5_);
            ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
            sys_.rhs(ytmp_, p, k6_);
            ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
            sys_.rhs(ynew_, p, k7_);
            evals_ += 6;

            err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
            const double err =
                (err_.array().abs() /
                 (s_.abs_tol + s_.rel_tol * y.array().abs().max(ynew_.array().abs())))
                    .maxCoeff();

            if (!std::isfinite(err) || !ynew_.allFinite()) {
                h *= 0.1;
                ++tr.stats.rejected;
                last_rejected = true;
                continue;
            }
            if (err > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                ++tr.stats.rejected;
                last_rejected = true;
                continue;
            }

            // accepted
            ++tr.stats.steps;
            const double tnew = last ? te : t + h;
            DenseStep ds;
            ds.t0 = t;
            ds.t1 = tnew;
            ds.pump = p;
            ds.y0 = &y;
            ds.y1 = &ynew_;
            ds.k1_ = &k1_;
            ds.k3_ = &k3_;
            ds.k4_ = &k4_;
            ds.k5_ = &k5_;
            ds.k6_ = &k6_;
            ds.k7_ = &k7_;

            tr.min_population = std::min(tr.min_population, ynew_.head(nc).minCoeff());
            if (dt_sample > 0.0) {
                while (next_sample * dt_sample + t0 <= tnew * (1.0 + 1e-14) && sample_time(next_sample) <= t1) {
                    const double ts_k = sample_time(next_sample);
                    if (std::abs(ts_k - tnew) <= 1e-12 * std::max(1.0, std::abs(tnew))) {
                        sample(tr, ts_k, ynew_, p);
                    } else {
                        sample(tr, ts_k, ds.at(ts_k), p);
                    }
                    ++next_sample;
                }
            }
            if (observer && observer(ds)) stop = true;

            const double beta = 0.04;
            double fac = 0.9 * std::pow(err, -(0.2 - 0.75 * beta)) * std::pow(err_old, beta);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            err_old = std::max(err, 1e-4);
            last_rejected = false;

            y.swap(ynew_);
            k1_.swap(k7_);  // FSAL
            t = tnew;
            h = std::min(h * fac, s_.max_step);
            if (stop) break;
        }
    }
    if (dt_sample <= 0.0 || tr.times.back() < t) {
        sample(tr, t, y, pump(std::max(t0, std::nextafter(t, t0))));
    }
    tr.final_state = y;
    tr.final_time = t;
    tr.stopped_early = stop;
    tr.stats.rhs_evals = evals_;
    tr.stats.cpu_seconds = thread_cpu_seconds() - cpu_start;
    return tr;
}

}  // namespace photonhier
