#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rfsim {

// splitmix64 finalizer; used to derive independent stream seeds from
// (seed, salt, chunk) so results never depend on worker count.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt, std::uint64_t chunk);

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// fixed by the standard; the std:: distributions are not, so draws here go
// through explicit bit-to-double maps to keep streams portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1): 53 random bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Marsaglia polar method with one cached deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    double exponential(double mean) {
        double u;
        do { u = uniform01(); } while (u <= 0.0);
        return -mean * std::log(u);
    }

    // Knuth's product method below 64 expected events, normal approximation
    // above (bias < 0.1 counts there); plenty for synthesizing count data.
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0)) return 0;
        if (mean > 64.0) {
            const long long k = std::llround(mean + std::sqrt(mean) * normal());
            return k < 0 ? 0 : static_cast<std::int64_t>(k);
        }
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline constexpr std::uint64_t kSaltStream = 0x737472656d5f6f75ULL;
inline constexpr std::uint64_t kSaltBoundary = 0x626f756e64617279ULL;
inline constexpr std::uint64_t kSaltLoss = 0x6c6f73735f746872ULL;
inline constexpr std::uint64_t kSaltHom = 0x686f6d5f726f7574ULL;
inline constexpr std::uint64_t kSaltHbt = 0x6862745f73706c74ULL;
inline constexpr std::uint64_t kSaltLifetime = 0x6c6966655f657870ULL;
inline constexpr std::uint64_t kSaltNoise = 0x6e6f6973655f6164ULL;
inline constexpr std::uint64_t kSaltPort = 0x706f72745f647277ULL;

}  // namespace rfsim
