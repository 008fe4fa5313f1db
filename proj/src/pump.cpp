#include "photonhier/pump.hpp"

#include "photonhier/errors.hpp"

#include <algorithm>
#include <cmath>

namespace photonhier {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Index m of the period containing t, and the on-edge t_on = mT + dT.
struct PulsePhase {
    double start;
    double off;
};

PulsePhase phase_at(const PulsedPump& p, double t) {
    const double m = std::floor(t / p.period);
    double start = m * p.period;
    // guard against t landing a hair below a period boundary after rounding
    if (t >= start + p.period) start += p.period;
    return {start, start + p.duty * p.period};
}

}  // namespace

PumpSchedule::PumpSchedule(Variant v) : v_(std::move(v)) {
    std::visit(overloaded{
                   [](const ConstantPump& c) {
                       if (!(c.power >= 0.0)) throw ConfigError("pump power must be non-negative");
                   },
                   [](const QuenchPump& q) {
                       if (!(q.initial >= 0.0) || !(q.final_power >= 0.0)) {
                           throw ConfigError("pump powers must be non-negative");
                       }
                   },
                   [](const PulsedPump& p) {
                       if (!(p.average >= 0.0)) throw ConfigError("pump power must be non-negative");
                       if (!(p.duty > 0.0 && p.duty <= 1.0)) throw ConfigError("duty cycle must lie in (0, 1]");
                       if (!(p.period > 0.0)) throw ConfigError("pulse period must be positive");
                   },
               },
               v_);
}

double PumpSchedule::operator()(double t) const {
    return std::visit(overloaded{
                          [](const ConstantPump& c) { return c.power; },
                          [t](const QuenchPump& q) { return t < q.switch_time ? q.initial : q.final_power; },
                          [t](const PulsedPump& p) {
                              if (p.duty >= 1.0) return p.average;
                              const auto ph = phase_at(p, t);
                              return t < ph.off ? p.average / p.duty : 0.0;
                          },
                      },
                      v_);
}

double PumpSchedule::integral(double t0, double t1) const {
    if (t1 < t0) return -integral(t1, t0);
    return std::visit(
        overloaded{
            [&](const ConstantPump& c) { return c.power * (t1 - t0); },
            [&](const QuenchPump& q) {
                const double s = std::clamp(q.switch_time, t0, t1);
                return q.initial * (s - t0) + q.final_power * (t1 - s);
            },
            [&](const PulsedPump& p) {
                if (p.duty >= 1.0) return p.average * (t1 - t0);
                const double peak = p.average / p.duty;
                // F(t) = integral from 0 to t, evaluated per period
                auto cumulative = [&](double t) {
                    const double m = std::floor(t / p.period);
                    const double into = t - m * p.period;
                    return m * p.average * p.period + peak * std::min(into, p.duty * p.period);
                };
                return cumulative(t1) - cumulative(t0);
            },
        },
        v_);
}

std::vector<double> PumpSchedule::breakpoints(double t0, double t1) const {
    std::vector<double> out;
    std::visit(overloaded{
                   [](const ConstantPump&) {},
                   [&](const QuenchPump& q) {
                       if (q.switch_time > t0 && q.switch_time < t1 && q.initial != q.final_power) {
                           out.push_back(q.switch_time);
                       }
                   },
                   [&](const PulsedPump& p) {
                       if (p.duty >= 1.0) return;
                       double m = std::floor(t0 / p.period);
                       for (;; m += 1.0) {
                           const double on = m * p.period;
                           const double off = on + p.duty * p.period;
                           if (on >= t1) break;
                           if (on > t0) out.push_back(on);
                           if (off > t0 && off < t1) out.push_back(off);
                       }
                   },
               },
               v_);
    return out;
}

double PumpSchedule::peak() const {
    return std::visit(overloaded{
                          [](const ConstantPump& c) { return c.power; },
                          [](const QuenchPump& q) { return std::max(q.initial, q.final_power); },
                          [](const PulsedPump& p) { return p.average / p.duty; },
                      },
                      v_);
}

}  // namespace photonhier
