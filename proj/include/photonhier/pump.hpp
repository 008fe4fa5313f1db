#pragma once

#include <variant>
#include <vector>

namespace photonhier {

struct ConstantPump {
    double power{0.0};
};

// P_initial for t < switch_time, P_final afterwards.
struct QuenchPump {
    double initial{0.0};
    double final_power{0.0};
    double switch_time{0.0};
};

// Peak power average/duty during [mT, mT + dT), zero for the rest of each period.
struct PulsedPump {
    double average{0.0};
    double duty{1.0};
    double period{1.0};
};

// Time-dependent pump power P(t). Piecewise constant by construction, so the
// integrator restarts on every breakpoint and never straddles an edge.
class PumpSchedule {
public:
    using Variant = std::variant<ConstantPump, QuenchPump, PulsedPump>;

    PumpSchedule() = default;
    explicit PumpSchedule(Variant v);

    static PumpSchedule constant(double power) { return PumpSchedule(ConstantPump{power}); }
    static PumpSchedule quench(double initial, double final_power, double switch_time = 0.0) {
        return PumpSchedule(QuenchPump{initial, final_power, switch_time});
    }
    static PumpSchedule pulsed(double average, double duty, double period) {
        return PumpSchedule(PulsedPump{average, duty, period});
    }

    // Right-continuous: at an edge the value of the following segment is returned.
    double operator()(double t) const;
    // Exact integral of P over [t0, t1].
    double integral(double t0, double t1) const;
    // Discontinuities strictly inside (t0, t1), ascending.
    std::vector<double> breakpoints(double t0, double t1) const;
    double peak() const;

    const Variant& variant() const noexcept { return v_; }

private:
    Variant v_{ConstantPump{}};
};

}  // namespace photonhier
