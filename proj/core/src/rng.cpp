#include "tcdiff/rng.hpp"

#include <cmath>

namespace tcdiff {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    // 53-bit mantissa in [0,1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_int(uint64_t n) {
    // modulo is fine here: n is tiny compared to 2^64, bias < 2^-50
    return engine_() % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Tensor Rng::normal_tensor(const std::vector<int>& shape) {
    Tensor t(shape);
    fill_normal(t);
    return t;
}

void Rng::fill_normal(Tensor& t) {
    for (size_t i = 0; i < t.size(); ++i) t[i] = normal();
}

}  // namespace tcdiff
