#pragma once

#include <stdexcept>
#include <string>

namespace dbmd {

/// A parameter or argument violates a documented precondition.
class invalid_parameter_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tunnel voltage outside the intermediate Simmons regime.
class out_of_regime_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operating-point solve failed (no bracket / no convergence); message carries diagnostics.
class solver_failure_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time integration failed (dt underflow); carries the last accepted state.
class integration_failure_error : public std::runtime_error {
public:
    integration_failure_error(const std::string& what, double t_last, double z_last)
        : std::runtime_error(what), t_last(t_last), z_last(z_last) {}
    double t_last; // s
    double z_last;
};

/// Config / CSV / fit-spec parse failure; carries the 1-based line number (0 = not line-specific).
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what, int line = 0)
        : std::runtime_error(what), line(line) {}
    int line;
};

/// Simulated series does not cover the dataset's time span.
class span_mismatch_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dbmd
