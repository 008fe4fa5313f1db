#include "photonhier/integrator.hpp"

#include <ctime>

namespace photonhier {

void IntegratorSettings::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw ConfigError("integrator.max_step must be positive");
    if (initial_step < 0.0) throw ConfigError("integrator.initial_step must be non-negative");
    if (!(sample_interval >= 0.0)) throw ConfigError("sample interval must be non-negative");
    if (max_steps <= 0) throw ConfigError("integrator.max_steps must be positive");
}

void DenseStep::prepare() const {
    if (ready_) return;
    using namespace dp5;
    const double hh = h();
    const Eigen::VectorXd diff = *y1 - *y0;
    r3_ = hh * *k1_ - diff;
    r4_ = diff - hh * *k7_ - r3_;
    r5_ = hh * (d1 * *k1_ + d3 * *k3_ + d4 * *k4_ + d5 * *k5_ + d6 * *k6_ + d7 * *k7_);
    ready_ = true;
}

Eigen::VectorXd DenseStep::at(double t) const {
    prepare();
    const double th = (t - t0) / h();
    const double th1 = 1.0 - th;
    return *y0 + th * ((*y1 - *y0) + th1 * (r3_ + th * (r4_ + th1 * r5_)));
}

Eigen::VectorXd DenseStep::integral() const {
    prepare();
    return h() * (*y0 + (*y1 - *y0) / 2.0 + r3_ / 6.0 + r4_ / 12.0 + r5_ / 30.0);
}

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return double(ts.tv_sec) + 1e-9 * double(ts.tv_nsec);
}

}  // namespace photonhier
