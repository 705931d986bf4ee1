#ifndef KAWAHARA_ERRORS_HPP
#define KAWAHARA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace kawahara {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad construction parameters (grid sizes, domain lengths, config values).
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
};

// Bad call arguments (derivative order out of range, unknown case name, ...).
class argument_error : public error {
public:
    explicit argument_error(const std::string& what) : error(what) {}
};

// A stated precondition of an operation does not hold (membership, compatibility,
// hypothesis of an inequality check).
class precondition_error : public error {
public:
    explicit precondition_error(const std::string& what) : error(what) {}
};

// Banded factorization hit a pivot below tolerance.
class singular_matrix_error : public error {
public:
    explicit singular_matrix_error(const std::string& what) : error(what) {}
};

// A time step could not be completed; carries the step index.
class solver_breakdown_error : public error {
public:
    solver_breakdown_error(const std::string& what, int step)
        : error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
    int step_index;
};

// Inner Picard loop of the nonlinear solver failed to converge.
class nonconvergence_error : public error {
public:
    nonconvergence_error(const std::string& what, double residual, int step)
        : error(what + " (step " + std::to_string(step) + ", residual " +
                std::to_string(residual) + ")"),
          last_residual(residual), step_index(step) {}
    double last_residual;
    int step_index;
};

// A control-synthesis fixed-point loop diverged; carries the iterate history.
class divergence_error : public error {
public:
    divergence_error(const std::string& what, std::vector<double> history)
        : error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

// Scenario validation failure; carries one message per offending field.
class validation_error : public error {
public:
    explicit validation_error(std::vector<std::string> issues_)
        : error(join(issues_)), issues(std::move(issues_)) {}
    std::vector<std::string> issues;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "scenario validation failed:";
        for (const auto& m : v) { s += "\n  - "; s += m; }
        return s;
    }
};

} // namespace kawahara

#endif
