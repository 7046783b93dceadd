#ifndef ADVBENCH_RNG_HPP
#define ADVBENCH_RNG_HPP

#include <cmath>
#include <cstdint>

namespace advbench {

// xorshift64* generator. State is never zero; a zero seed is remapped to a
// fixed nonzero constant. Per-purpose streams are derived by XORing the base
// seed with a stream id before construction.
class Rng {
public:
    enum Stream : std::uint64_t {
        kInit = 0x9e3779b97f4a7c15ULL,
        kShuffle = 0xbf58476d1ce4e5b9ULL,
        kDropout = 0x94d049bb133111ebULL,
        kData = 0xd6e8feb86659fd93ULL,
    };

    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

    static Rng for_stream(std::uint64_t base_seed, Stream id) {
        return Rng(base_seed ^ static_cast<std::uint64_t>(id));
    }

    std::uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dULL;
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace advbench

#endif
