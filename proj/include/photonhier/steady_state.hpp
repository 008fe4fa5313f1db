// Stationary states under constant pumping.
//
// Pseudo-transient continuation: implicit-Euler steps of growing size from a
// cold start, which turn into plain Newton iterations once the step is large.
// The explicit integrator can take 1e5+ steps to settle at high pump powers;
// this needs a few dozen linear solves.
#pragma once

#include "photonhier/dynamics.hpp"
#include "photonhier/errors.hpp"
#include "photonhier/integrator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

namespace photonhier {

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last)
        : NumericalError(what), state(std::move(last)) {}
    Eigen::VectorXd state;
};

struct SteadyStateSettings {
    double seed{1e-9};            // cold start: n = seed, f = 0
    double initial_dt{1e-2};      // first pseudo-time step (1/kappa)
    double newton_dt{1e12};       // beyond this the shift is dropped
    double step_rel_tol{1e-11};   // |dn_i| <= step_rel_tol |n_i| + step_abs_tol
    double step_abs_tol{1e-25};
    double residual_tol{1e-8};    // |rhs|_inf < residual_tol * max(|n|_inf, 1)
    int max_iterations{2000};
    // Optional confirmation by explicit integration over a window.
    bool window_check{false};
    double window{10.0};
    double window_tol{1e-7};     // about ten times the integrator rel_tol
    IntegratorSettings integrator{};
};

struct SteadyStateResult {
    Eigen::VectorXd state;
    int iterations{0};
    double residual{0.0};
    double pseudo_time{0.0};
    double window_change{0.0};  // max fractional change of n over the window (if checked)
};

template <class System>
double steady_residual(const System& sys, const Eigen::VectorXd& y, double pump) {
    Eigen::VectorXd dy;
    sys.rhs(y, pump, dy);
    const double scale = std::max(y.head(sys.num_modes()).cwiseAbs().maxCoeff(), 1.0);
    return dy.cwiseAbs().maxCoeff() / scale;
}

template <class System>
SteadyStateResult steady_state(const System& sys, double pump, const SteadyStateSettings& s = {},
                               const std::optional<Eigen::VectorXd>& initial = std::nullopt) {
    if (!(pump >= 0.0) || !std::isfinite(pump)) throw ConfigError("pump power must be non-negative");
    const Eigen::Index nc = sys.num_modes();
    Eigen::VectorXd y = initial ? *initial : sys.cold_state(s.seed);
    if (y.size() != sys.size()) throw ConfigError("initial state has the wrong size");

    Eigen::VectorXd F;
    sys.rhs(y, pump, F);
    double fnorm = F.cwiseAbs().maxCoeff();
    double dt = s.initial_dt;
    double pseudo_time = 0.0;

    SteadyStateResult res;
    for (int it = 1; it <= s.max_iterations; ++it) {
        const double sigma = dt >= s.newton_dt ? 0.0 : 1.0 / dt;
        Eigen::VectorXd delta;
        try {
            delta = sys.solve_shifted(sigma, y, pump, F);
        } catch (const NumericalError&) {
            delta.resize(0);
        }
        Eigen::VectorXd trial;
        bool ok = delta.size() == y.size() && delta.allFinite();
        if (ok) {
            trial = y + delta;
            // occupations may not go negative beyond round-off
            const double floor = -1e-14 * std::max(trial.head(nc).cwiseAbs().maxCoeff(), 1.0);
            ok = trial.head(nc).minCoeff() >= floor;
        }
        if (!ok) {
            if (sigma == 0.0) dt = s.newton_dt;
            dt /= 4.0;
            if (dt < 1e-14) {
                throw ConvergenceError("steady state: pseudo-time step underflow", y);
            }
            continue;
        }

        Eigen::VectorXd Fnew;
        sys.rhs(trial, pump, Fnew);
        const double fnew = Fnew.cwiseAbs().maxCoeff();
        // occupations component-wise, molecular coordinates normwise
        const auto tail = trial.size() - nc;
        const bool small_step =
            (delta.head(nc).array().abs() <= s.step_rel_tol * trial.head(nc).array().abs() + s.step_abs_tol)
                .all() &&
            delta.tail(tail).cwiseAbs().maxCoeff() <=
                s.step_rel_tol * std::max(trial.tail(tail).cwiseAbs().maxCoeff(), 1.0);
        y.swap(trial);
        F.swap(Fnew);
        pseudo_time += dt;
        res.iterations = it;

        const double scale = std::max(y.head(nc).cwiseAbs().maxCoeff(), 1.0);
        if (small_step && fnew / scale < s.residual_tol) break;
        if (it == s.max_iterations) {
            throw ConvergenceError("steady state: no convergence after " + std::to_string(it) +
                                       " iterations (residual " + std::to_string(fnew / scale) + ")",
                                   y);
        }
        // Switched evolution relaxation with a growth floor: the residual of
        // a physical transient rises before it falls, and plain SER would
        // then stall at small steps.
        const double ratio = fnew > 0.0 ? fnorm / fnew : 10.0;
        dt *= std::clamp(ratio, 2.0, 10.0);
        fnorm = fnew;
    }

    res.residual = steady_residual(sys, y, pump);
    res.pseudo_time = pseudo_time;
    if (s.window_check) {
        IntegratorSettings is = s.integrator;
        is.sample_interval = 0.0;
        const Trajectory tr = integrate(sys, y, 0.0, s.window, PumpSchedule::constant(pump), is);
        const Eigen::ArrayXd n0 = y.head(nc).array();
        const Eigen::ArrayXd n1 = tr.final_state.head(nc).array();
        res.window_change = ((n1 - n0).abs() / n0.abs().max(1e-300)).maxCoeff();
        if (res.window_change > s.window_tol) {
            std::ostringstream msg;
            msg << "steady state drifts by " << std::scientific << res.window_change << " over the check window";
            throw ConvergenceError(msg.str(),
                                   y);
        }
    }
    res.state = std::move(y);
    return res;
}

SteadyStateResult steady_state_exact(const Model& model, double pump, const SteadyStateSettings& s = {});
SteadyStateResult steady_state_reduced(const Model& model, const Hierarchy& hierarchy, int level,
                                       double pump, const SteadyStateSettings& s = {});

}  // namespace photonhier
