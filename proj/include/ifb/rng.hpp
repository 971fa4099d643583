#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ifb {

// Seedable, platform-portable random stream.
//
// Stream semantics: the raw source is std::mt19937_64 (bit-exact by the
// standard). uniform() consumes one 64-bit word and maps it to [0,1) as
// (x >> 11) * 2^-53. gaussian() consumes two uniforms per Box-Muller pair
// and hands out the pair in cos/sin order, so the draw sequence is identical
// on every platform. std::normal_distribution is deliberately not used (its
// algorithm is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n), rejection-sampled so the stream stays portable.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ifb
