#include "orblin/rng.hpp"

#include <cmath>

namespace orblin {

double Rng::gaussian() {
    // Reject u1 == 0 so log() stays finite.
    double u1 = 0.0;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    Rng mixer(master ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return mixer.next_u64();
}

}  // namespace orblin
