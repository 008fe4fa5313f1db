#pragma once

#include <stdexcept>
#include <string>

namespace photonhier {

// Invalid user input: malformed config, inconsistent sizes, out-of-range values.
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Any failure of the numerics (integration, convergence). Exit code 1.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IntegrationError : public NumericalError {
public:
    explicit IntegrationError(const std::string& what) : NumericalError(what) {}
};

// Step size fell below the resolvable limit.
class StiffnessError : public IntegrationError {
public:
    StiffnessError(const std::string& what, double t, double h)
        : IntegrationError(what), time(t), step(h) {}
    double time;
    double step;
};

}  // namespace photonhier
