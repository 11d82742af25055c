#pragma once

// splitmix64: the toolkit's seedable random source. Chosen over std::mt19937
// plus <random> distributions because distribution output is not specified by
// the standard; this generator and the helpers below produce the same stream
// on every platform, which the replay and bootstrap determinism contracts
// depend on.

#include <cstdint>
#include <vector>

namespace tulu {

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is negligible for the n used here
    // (sample sizes, layer counts), all far below 2^32.
    uint64_t bounded(uint64_t n) { return n ? next() % n : 0; }

    // Uniform double in [0, 1).
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace tulu
