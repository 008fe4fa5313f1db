#include "fixtures.hpp"
#include "photonhier/errors.hpp"
#include "photonhier/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace photonhier;

namespace {

Trajectory fake_trajectory(const std::vector<Eigen::VectorXd>& n) {
    Trajectory t;
    for (std::size_t k = 0; k < n.size(); ++k) {
        t.times.push_back(0.5 * double(k));
        t.n.push_back(n[k]);
        t.pump.push_back(0.0);
    }
    return t;
}

RunRecord rec(const std::string& method, double cpu, const std::string& term = "converged") {
    RunRecord r;
    r.method = method;
    r.cpu_seconds = cpu;
    r.termination = term;
    return r;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("method names") {
    CHECK(Method{-1}.name() == "exact");
    CHECK(Method{2}.name() == "level_2");
    CHECK(Method::parse("level_3").level == 3);
    CHECK(Method::parse("exact").exact());
    CHECK_THROWS_AS(Method::parse("level_x"), ConfigError);
    CHECK_THROWS_AS(Method::parse("fast"), ConfigError);
}

TEST_CASE("error series of identical and scaled trajectories") {
    const Eigen::Vector3d a(1.0, 2e-3, 5.0);
    const Trajectory e = fake_trajectory({a, 2 * a});
    const ErrorSeries same = error_series(e, e);
    CHECK(same.max() == 0.0);
    const Trajectory r = fake_trajectory({10 * a, 20 * a});
    const ErrorSeries ten = error_series(e, r);
    for (double x : ten.epsilon) CHECK(x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ten.median() == doctest::Approx(1.0));

    Eigen::Vector3d b = a;
    b(2) *= 100.0;
    const ErrorSeries worst = error_series(fake_trajectory({a}), fake_trajectory({b}));
    CHECK(worst.epsilon[0] == doctest::Approx(2.0));
    CHECK(worst.worst_mode[0] == 2);
}

TEST_CASE("error series floors vanishing populations") {
    const Trajectory e = fake_trajectory({Eigen::Vector2d(0.0, 1.0)});
    const Trajectory r = fake_trajectory({Eigen::Vector2d(1e-40, 1.0)});
    CHECK(error_series(e, r, 1e-30).max() == 0.0);
    CHECK_THROWS_AS(error_series(e, r, 0.0), ConfigError);
    CHECK_THROWS_AS(error_series(e, fake_trajectory({Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)})),
                    ConfigError);
    CHECK_THROWS_AS(error_series(e, fake_trajectory({Eigen::Vector3d(1, 1, 1)})), ConfigError);
}

TEST_CASE("benchmark grid") {
    BenchmarkSpec s;
    const auto g = s.grid();
    REQUIRE(g.size() == 33);
    CHECK(g.front() == doctest::Approx(std::pow(10.0, -3.5)));
    CHECK(g.back() == doctest::Approx(10.0));
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] / g[k - 1] == doctest::Approx(g[1] / g[0]));
    s.subset = {0, 4};
    CHECK(s.powers() == std::vector<double>{g[0], g[4]});
    s.subset = {3};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.subset = {0, 33};
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("two powers give two ordered pairs") {
    const Model m{fixtures::coarse_2d()};
    const Hierarchy h = build_hierarchy(m, 1);
    BenchmarkSpec s;
    s.p_min = 1e-4;
    s.p_max = 1e-3;
    s.count = 2;
    s.levels = {0, 1};
    s.threads = 2;
    const BenchmarkResult r = run_benchmark(s, m, h, IntegratorSettings{}, "abc");
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.methods == std::vector<std::string>{"exact", "level_0", "level_1"});
    CHECK(r.pairs[0].p_from == doctest::Approx(1e-4));
    CHECK(r.pairs[0].p_to == doctest::Approx(1e-3));
    CHECK(r.pairs[1].p_from == doctest::Approx(1e-3));
    for (const auto& pr : r.pairs) {
        REQUIRE(pr.records.size() == 3);
        for (const auto& rc : pr.records) {
            CHECK(rc.termination == "converged");
            CHECK(rc.config_hash == "abc");
            CHECK(rc.steps > 0);
        }
    }
    const BenchmarkSummary sum = summarize(r);
    CHECK(sum.methods.back().method == "exact");
    CHECK(sum.failures.empty());
}

TEST_CASE("summary of equal runtimes lands in a single bin") {
    BenchmarkResult r;
    r.methods = {"exact", "level_0"};
    for (int k = 0; k < 4; ++k) {
        PairResult pr;
        pr.index = k;
        pr.records = {rec("exact", 2.0), rec("level_0", 0.2)};
        r.pairs.push_back(pr);
    }
    const BenchmarkSummary s = summarize(r, HistogramSpec{10, 1e-2, 1.0});
    REQUIRE(s.methods.size() == 2);
    const MethodSummary& l0 = s.methods[0];
    CHECK(l0.method == "level_0");
    long occupied = 0;
    for (long c : l0.counts) occupied += c > 0 ? 1 : 0;
    CHECK(occupied == 1);
    CHECK(l0.counts[5] == 4);  // 0.1 is the lower edge of bin 5 of 10 over [1e-2, 1]
    CHECK(l0.median == doctest::Approx(0.1));
    CHECK(l0.max == doctest::Approx(0.1));
    CHECK(s.edges.size() == 11);
}

TEST_CASE("summary counts overflow, underflow and failures") {
    BenchmarkResult r;
    r.methods = {"exact", "level_1"};
    PairResult a, b, c;
    a.records = {rec("exact", 1.0), rec("level_1", 5.0)};
    b.records = {rec("exact", 1.0), rec("level_1", 1e-5)};
    c.records = {rec("exact", 1.0), rec("level_1", 0.0, "error: stiff")};
    r.pairs = {a, b, c};
    const BenchmarkSummary s = summarize(r);
    CHECK(s.methods[0].overflow == 1);
    CHECK(s.methods[0].underflow == 1);
    CHECK(s.methods[0].failures == 1);
    CHECK(s.failures.size() == 1);
    CHECK_THROWS_AS(summarize(BenchmarkResult{}), ConfigError);
}

TEST_CASE("quench run: shared start, epsilon per level") {
    const Model m{fixtures::coarse_2d()};
    const Hierarchy h = build_hierarchy(m, 1);
    QuenchSpec q;
    q.t_final = 20.0;
    q.levels = {1, 0};
    IntegratorSettings is;
    is.sample_interval = 1.0;
    const QuenchResult r = run_quench(q, m, h, is, "h");
    REQUIRE(r.runs.size() == 3);
    CHECK(r.runs[0].method.exact());
    CHECK(r.runs[1].method.level == 0);
    CHECK(r.runs[2].method.level == 1);
    REQUIRE(r.epsilon.size() == 2);
    for (const auto& [level, eps] : r.epsilon) {
        CHECK(eps.times.size() == 21);
        CHECK(eps.epsilon[0] == 0.0);
    }
    for (const auto& run : r.runs) CHECK(run.record.termination == "completed");
}

TEST_CASE("quench specification errors") {
    QuenchSpec q;
    q.p_final = q.p_initial;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = QuenchSpec{};
    q.t_final = 0.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = QuenchSpec{};
    q.levels = {-1};
    CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("unit duty cycle reproduces constant pumping") {
    const Model m{fixtures::coarse_2d()};
    PulsedSpec p;
    p.duty = 1.0;
    p.average = 1e-3;
    p.warmup_periods = 1;
    p.averaging_periods = 2;
    const PulsedResult r = run_pulsed(p, m, nullptr, Method{-1}, IntegratorSettings{});
    const Eigen::VectorXd ss = steady_state_exact(m, 1e-3).state.head(m.num_modes());
    CHECK(((r.average - ss).array().abs() / ss.array()).maxCoeff() < 1e-6);
    CHECK(r.periodic);
    CHECK(r.pump_energy == doctest::Approx(1e-3 * 2 * p.period));
    CHECK(r.period_means.size() == 2);
}

TEST_CASE("pulsed specification errors") {
    PulsedSpec p;
    p.duty = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = PulsedSpec{};
    p.averaging_periods = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    const Model m{fixtures::coarse_2d()};
    CHECK_THROWS_AS(run_pulsed(PulsedSpec{}, m, nullptr, Method{0}, IntegratorSettings{}), ConfigError);
}

}  // TEST_SUITE
