#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "spinmoments/complex_matrix.hpp"

namespace spinmoments {

// SplitMix64: tiny, seedable, and uniform enough for Monte Carlo sampling.
// Every parallel task derives its own stream via mix_streams(seed, index), so
// results are identical for any thread count.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]: never 0, so safe inside log().
    double uniform() {
        return (static_cast<double>(operator()() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; pairs cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Documented stream-derivation mix: feed (seed ^ golden-ratio-scrambled index)
// through one SplitMix64 step. Distinct (seed, index) pairs give independent
// streams for all practical purposes.
inline std::uint64_t mix_streams(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed ^ (index + 0x9e3779b97f4a7c15ULL) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 30)) * 0x94d049bb133111ebULL;
    z = (z ^ (z >> 27)) * 0xbf58476d1ce4e5b9ULL;
    return z ^ (z >> 31);
}

inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix_streams(seed, index));
}

// Uniform point on the unit sphere via normalized Gaussian triple.
inline std::array<double, 3> sample_sphere(SplitMix64& rng) {
    for (;;) {
        const double x = rng.normal();
        const double y = rng.normal();
        const double z = rng.normal();
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n > 1e-12) return {x / n, y / n, z / n};
    }
}

// Haar-distributed d x d unitary: QR of a complex Ginibre matrix via modified
// Gram-Schmidt. The R diagonal is real positive by construction, which is the
// phase convention that makes Q exactly Haar.
inline ComplexMatrix sample_haar_unitary(SplitMix64& rng, std::size_t d) {
    ComplexMatrix g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = cplx(rng.normal(), rng.normal());

    for (std::size_t col = 0; col < d; ++col) {
        for (std::size_t prev = 0; prev < col; ++prev) {
            cplx proj = 0.0;
            for (std::size_t i = 0; i < d; ++i) proj += std::conj(g(i, prev)) * g(i, col);
            for (std::size_t i = 0; i < d; ++i) g(i, col) -= proj * g(i, prev);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < d; ++i) norm += std::norm(g(i, col));
        norm = std::sqrt(norm);
        if (norm < 1e-12) return sample_haar_unitary(rng, d);  // measure-zero retry
        for (std::size_t i = 0; i < d; ++i) g(i, col) /= norm;
    }
    return g;
}

inline ComplexMatrix sample_haar_su2(SplitMix64& rng) { return sample_haar_unitary(rng, 2); }

// Rotation axis u = R(U) z with R_ij = tr(sigma_i U sigma_j U^dag)/2; the
// direction a Haar U maps the z axis to. Writing M = U sigma_z U^dag = u . sigma
// gives u_x = Re M01, u_y = -Im M01, u_z = M00.
inline std::array<double, 3> rotated_z_axis(const ComplexMatrix& u) {
    const double m00 = std::norm(u(0, 0)) - std::norm(u(0, 1));
    const cplx m01 = u(0, 0) * std::conj(u(1, 0)) - u(0, 1) * std::conj(u(1, 1));
    return {m01.real(), -m01.imag(), m00};
}

}  // namespace spinmoments
