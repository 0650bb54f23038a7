#include "dbmd/guarded_math.hpp"

namespace dbmd {

std::atomic<std::uint64_t>& saturation_counter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

} // namespace dbmd
