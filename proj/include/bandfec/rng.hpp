#pragma once

// Deterministic, cross-platform random number generation.
//
// Every randomized component in the library (matrix constructions, trial
// simulations, schedules) draws from Xoshiro256ss seeded through SplitMix64,
// never from std::random_device or std::uniform_int_distribution, so that a
// given seed produces identical results on every platform and toolchain.
//
// Stream splitting rule: independent trial streams are derived from a master
// seed as  trial_seed(master, index) = splitmix(master + GOLDEN * (index + 1))
// where GOLDEN is the 64-bit golden-ratio increment.  Consumers must not
// share one generator across trials; they derive one stream per trial.

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

namespace bandfec {

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

// One SplitMix64 step; also used as a 64-bit mixing function.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden64);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives the seed for one trial stream from a master seed.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    std::uint64_t s = master_seed + kGolden64 * (trial_index + 1);
    return splitmix64(s);
}

// xoshiro256** by Blackman and Vigna (public domain reference construction).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform value in [0, bound) via rejection; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

    double unit() {  // uniform in [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    bool chance(double p) { return unit() < p; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    std::vector<std::uint32_t> permutation(std::uint32_t count) {
        std::vector<std::uint32_t> order(count);
        std::iota(order.begin(), order.end(), 0u);
        shuffle(order);
        return order;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace bandfec
