#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace emosig::fusion {

// mt19937_64 with hand-rolled distributions. The standard distributions are
// implementation-defined, so they would break cross-toolchain reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();                 // [0, 1), 53 random bits
    double normal();                  // standard normal, Box-Muller
    std::size_t below(std::size_t n);  // uniform in [0, n)
    bool bernoulli(double p) { return uniform() < p; }

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[below(i)]);
    }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

// Independent sub-stream seed (splitmix64 mixing of seed and stream id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace emosig::fusion
