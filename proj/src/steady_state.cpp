#include "photonhier/steady_state.hpp"

namespace photonhier {

SteadyStateResult steady_state_exact(const Model& model, double pump, const SteadyStateSettings& s) {
    const ExactSystem sys(model);
    return steady_state(sys, pump, s);
}

SteadyStateResult steady_state_reduced(const Model& model, const Hierarchy& hierarchy, int level,
                                       double pump, const SteadyStateSettings& s) {
    const ReducedSystem sys(model, hierarchy, level);
    return steady_state(sys, pump, s);
}

}  // namespace photonhier
