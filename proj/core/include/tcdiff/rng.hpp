#ifndef TCDIFF_RNG_HPP
#define TCDIFF_RNG_HPP

#include <cstdint>
#include <random>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Deterministic RNG. Normal variates go through our own Box-Muller instead of
// std::normal_distribution so that streams are identical across standard
// library implementations. derive() mixes (seed, stream) with splitmix64,
// giving independent substreams without the draws of one consumer shifting
// another's.
uint64_t splitmix64(uint64_t x);

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng derive(uint64_t seed, uint64_t stream) {
        return Rng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + splitmix64(stream))));
    }

    // uniform in [0, 1)
    double uniform();
    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n);
    // standard normal
    double normal();

    Tensor normal_tensor(const std::vector<int>& shape);
    void fill_normal(Tensor& t);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tcdiff

#endif
