#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <vector>

namespace dbmd {

/// True when OpenMP is compiled in and DBMD_SERIAL is not set in the environment.
/// Read once per process.
inline bool parallel_enabled() {
#ifdef _OPENMP
    static const bool enabled = std::getenv("DBMD_SERIAL") == nullptr;
    return enabled;
#else
    return false;
#endif
}

/// Serial reference for parallel_for; identical iteration contract.
template <typename F>
void serial_for(std::size_t n, F&& f) {
    for (std::size_t k = 0; k < n; ++k)
        f(k);
}

/// Runs f(k) for k in [0, n), multi-threaded when parallel_enabled(). Each slot must be
/// written independently of the others, which makes the result bit-identical to
/// serial_for. The first exception (by index) is rethrown after the loop completes.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
#ifdef _OPENMP
    if (parallel_enabled() && n > 1) {
        std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
        for (long long k = 0; k < static_cast<long long>(n); ++k) {
            try {
                f(static_cast<std::size_t>(k));
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        }
        for (const std::exception_ptr& e : errors)
            if (e)
                std::rethrow_exception(e);
        return;
    }
#endif
    serial_for(n, f);
}

} // namespace dbmd
