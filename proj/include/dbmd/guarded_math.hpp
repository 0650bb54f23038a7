#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>

namespace dbmd {

// Shared exponent cap in natural-log units: exp/sinh arguments above it are
// saturated to the cap instead of overflowing to infinity.
inline constexpr double kExponentCap = 700.0;

/// Process-wide count of saturation events (never silently produces NaN/inf).
std::atomic<std::uint64_t>& saturation_counter();

inline std::uint64_t saturation_count() {
    return saturation_counter().load(std::memory_order_relaxed);
}

inline void reset_saturation_count() {
    saturation_counter().store(0, std::memory_order_relaxed);
}

inline void note_saturation() {
    saturation_counter().fetch_add(1, std::memory_order_relaxed);
}

/// exp(x) with the argument saturated at +kExponentCap (counted).
inline double guarded_exp(double x) {
    if (x > kExponentCap) {
        note_saturation();
        x = kExponentCap;
    }
    return std::exp(x);
}

/// expm1(x) with the argument saturated at +kExponentCap (counted).
inline double guarded_expm1(double x) {
    if (x > kExponentCap) {
        note_saturation();
        return std::exp(kExponentCap);
    }
    return std::expm1(x);
}

/// sinh(x) with |x| saturated at kExponentCap (counted).
inline double guarded_sinh(double x) {
    if (x > kExponentCap) {
        note_saturation();
        return 0.5 * std::exp(kExponentCap);
    }
    if (x < -kExponentCap) {
        note_saturation();
        return -0.5 * std::exp(kExponentCap);
    }
    return std::sinh(x);
}

} // namespace dbmd
