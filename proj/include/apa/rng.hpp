#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace apa {

// All randomness in the library flows through this generator so that runs
// are reproducible bit-for-bit across platforms. Standard-library
// distributions are implementation-defined and must not be used.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-seed derivation: independent jobs (e.g. one per sweep
// point) each get their own stream regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> salts) {
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t v : salts)
        s = splitmix64(s ^ (v + 0x9e3779b97f4a7c15ULL));
    return s;
}

// xoshiro256** seeded via splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm = splitmix64(sm);
            word = sm;
        }
    }

    std::uint64_t next_u64() {
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

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [0,n), n > 0; rejection sampling keeps it unbiased
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % n;
        }
    }

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(next_u64() >> 56); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2)
            return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace apa
