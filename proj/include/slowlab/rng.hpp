#pragma once

#include <cstdint>
#include <random>

#include "slowlab/linalg.hpp"

namespace slowlab {

/// Seeded generator with platform-independent uniform doubles
/// (distribution implementations vary; the raw-bits mapping does not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Vec3 vec3(double lo, double hi) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    Vec4 vec4(double lo, double hi) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    VecX vecx(std::size_t n, double lo, double hi) {
        VecX v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }
    Vec3 unit_vec3() {
        // rejection from the cube, then normalize
        for (;;) {
            Vec3 v = vec3(-1.0, 1.0);
            const double n2 = dot(v, v);
            if (n2 > 1e-4 && n2 <= 1.0) return v * (1.0 / std::sqrt(n2));
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace slowlab
