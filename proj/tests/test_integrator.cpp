#include "fixtures.hpp"
#include "photonhier/dynamics.hpp"
#include "photonhier/integrator.hpp"
#include "photonhier/steady_state.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace photonhier;

namespace {

// y' = -y + P on every component; closed-form solution for checks.
struct Relaxation {
    Eigen::Index dim{3};
    Eigen::Index size() const { return dim; }
    Eigen::Index num_modes() const { return dim; }
    void rhs(const Eigen::VectorXd& y, double p, Eigen::VectorXd& dy) const { dy = (-y).array() + p; }
};

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return ((a - b).array().abs() / b.array().abs().max(1e-300)).maxCoeff();
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("analytic relaxation: end point, samples and dense output") {
    const Relaxation sys;
    IntegratorSettings s;
    s.rel_tol = 1e-10;
    s.abs_tol = 1e-14;
    s.sample_interval = 0.25;
    const Eigen::VectorXd y0 = Eigen::Vector3d(1.0, 2.0, 0.5);
    double integral = 0.0;
    double worst_at = 0.0;
    const Trajectory tr = integrate(sys, y0, 0.0, 5.0, PumpSchedule::constant(0.0), s, [&](const DenseStep& d) {
        integral += d.integral()(0);
        const double tm = 0.5 * (d.t0 + d.t1);
        worst_at = std::max(worst_at, std::abs(d.at(tm)(0) - std::exp(-tm)));
        return false;
    });
    CHECK(tr.final_time == 5.0);
    CHECK(max_rel(tr.final_state, y0 * std::exp(-5.0)) < 1e-8);
    REQUIRE(tr.times.size() == 21);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(tr.times[k] == doctest::Approx(0.25 * double(k)).epsilon(1e-14));
        CHECK(std::abs(tr.n[k](1) - 2.0 * std::exp(-tr.times[k])) < 1e-8);
    }
    CHECK(integral == doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-8));
    CHECK(worst_at < 1e-8);
    CHECK(tr.stats.rhs_evals > 0);
    CHECK(tr.stats.steps > 0);
}

TEST_CASE("pump edges restart the integration") {
    const Relaxation sys;
    IntegratorSettings s;
    s.sample_interval = 0.0;
    const auto pump = PumpSchedule::pulsed(0.5, 0.25, 4.0);
    const Trajectory tr = integrate(sys, Eigen::VectorXd::Zero(3), 0.0, 10.0, pump, s);
    const std::vector<double> expected{0.0, 1.0, 4.0, 5.0, 8.0, 9.0};
    CHECK(tr.segment_starts == expected);
    // piecewise closed form: the pump is 2 on [0,1) and 0 on [1,4) per period
    double y = 0.0;
    double t = 0.0;
    for (double e : {1.0, 4.0, 5.0, 8.0, 9.0, 10.0}) {
        const double p = pump(0.5 * (t + e));
        y = p + (y - p) * std::exp(-(e - t));
        t = e;
    }
    CHECK(tr.final_state(0) == doctest::Approx(y).epsilon(1e-7));
}

TEST_CASE("steady state stays put") {
    const Model m{fixtures::coarse_2d()};
    const ExactSystem sys(m);
    const SteadyStateResult ss = steady_state_exact(m, 2e-5);
    IntegratorSettings s;
    s.sample_interval = 0.0;
    const Trajectory tr = integrate(sys, ss.state, 0.0, 100.0, PumpSchedule::constant(2e-5), s);
    CHECK(max_rel(tr.final_state.head(m.num_modes()), ss.state.head(m.num_modes())) < 10 * s.rel_tol);
}

TEST_CASE("self-convergence under tolerance refinement") {
    const Model m{fixtures::coarse_2d()};
    const ExactSystem sys(m);
    const Eigen::VectorXd y0 = steady_state_exact(m, 6.58e-6).state;
    const auto pump = PumpSchedule::quench(6.58e-6, 2e-5);
    IntegratorSettings coarse;
    coarse.sample_interval = 0.0;
    IntegratorSettings fine = coarse;
    fine.rel_tol = coarse.rel_tol / 2;
    IntegratorSettings finest = coarse;
    finest.rel_tol = 1e-11;
    finest.abs_tol = 1e-15;
    const auto a = integrate(sys, y0, 0.0, 50.0, pump, coarse).final_state.head(m.num_modes()).eval();
    const auto b = integrate(sys, y0, 0.0, 50.0, pump, fine).final_state.head(m.num_modes()).eval();
    const auto ref = integrate(sys, y0, 0.0, 50.0, pump, finest).final_state.head(m.num_modes()).eval();
    CHECK(max_rel(a, ref) < 1e-5);
    CHECK(max_rel(b, ref) < 1e-5);
    CHECK(max_rel(b, ref) <= max_rel(a, ref) * 1.5);
}

TEST_CASE("runs are bit-for-bit reproducible") {
    const Model m{fixtures::coarse_2d()};
    const ExactSystem sys(m);
    const auto pump = PumpSchedule::pulsed(1e-3, 0.1, 20.0);
    const Eigen::VectorXd y0 = sys.cold_state();
    IntegratorSettings s;
    const auto a = integrate(sys, y0, 0.0, 40.0, pump, s);
    const auto b = integrate(sys, y0, 0.0, 40.0, pump, s);
    CHECK(a.final_state == b.final_state);
    CHECK(a.stats.steps == b.stats.steps);
    REQUIRE(a.n.size() == b.n.size());
    for (std::size_t k = 0; k < a.n.size(); ++k) CHECK(a.n[k] == b.n[k]);
}

TEST_CASE("populations stay non-negative and excitations in [0, 1]") {
    const Model m{fixtures::coarse_2d()};
    const ExactSystem sys(m);
    IntegratorSettings s;
    s.record_states = true;
    s.sample_interval = 1.0;
    const auto tr = integrate(sys, sys.cold_state(), 0.0, 60.0, PumpSchedule::pulsed(1e-3, 0.05, 20.0), s);
    CHECK(tr.min_population >= -1e-12);
    for (const auto& st : tr.states) {
        const auto f = st.tail(m.num_groups());
        CHECK(f.minCoeff() >= -1e-12);
        CHECK(f.maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("observer can stop early; limits and bad input") {
    const Relaxation sys;
    IntegratorSettings s;
    const auto tr = integrate(sys, Eigen::VectorXd::Ones(3), 0.0, 100.0, PumpSchedule::constant(0.0), s,
                              [](const DenseStep& d) { return d.t1 > 1.0; });
    CHECK(tr.stopped_early);
    CHECK(tr.final_time < 100.0);
    CHECK(tr.final_time > 1.0);

    IntegratorSettings few = s;
    few.max_steps = 3;
    CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Ones(3), 0.0, 100.0, PumpSchedule::constant(0.0), few),
                    IntegrationError);
    CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Ones(2), 0.0, 1.0, PumpSchedule::constant(0.0), s),
                    ConfigError);
    Eigen::VectorXd nan = Eigen::VectorXd::Ones(3);
    nan(1) = NAN;
    CHECK_THROWS_AS(integrate(sys, nan, 0.0, 1.0, PumpSchedule::constant(0.0), s), IntegrationError);
    IntegratorSettings bad = s;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}  // TEST_SUITE
