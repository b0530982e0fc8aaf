#pragma once

// Shared random-state generators for the test suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spinmoments/collective.hpp"
#include "spinmoments/rng.hpp"
#include "spinmoments/states.hpp"

namespace testgen {

using namespace spinmoments;

// (theta, phi) in the BlochVectorSet convention for a given unit vector.
inline std::array<double, 2> angles_of(const std::array<double, 3>& u) {
    return {std::acos(std::clamp(u[0], -1.0, 1.0)), std::atan2(u[2], u[1])};
}

// Random pure state supported on the symmetric (Dicke) subspace.
inline PureState random_symmetric_pure(int n, SplitMix64& rng) {
    PureState psi{std::vector<cplx>(std::size_t{1} << n, 0.0), PartyStructure{n, 2}};
    double norm2 = 0.0;
    for (int m = 0; m <= n; ++m) {
        const cplx c(rng.normal(), rng.normal());
        const PureState basis = dicke(n, m);
        for (std::size_t i = 0; i < psi.amplitudes.size(); ++i)
            psi.amplitudes[i] += c * basis.amplitudes[i];
        norm2 += std::norm(c);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : psi.amplitudes) a *= inv;
    return psi;
}

// Random mixture of two symmetric pure states.
inline DensityMatrix random_symmetric_mixed(int n, SplitMix64& rng) {
    const DensityMatrix r1 = random_symmetric_pure(n, rng).to_density();
    const DensityMatrix r2 = random_symmetric_pure(n, rng).to_density();
    const double w = rng.uniform();
    DensityMatrix out{r1.matrix * cplx(w) + r2.matrix * cplx(1.0 - w), r1.structure};
    return out;
}

inline BlochVectorSet random_bloch(int n, SplitMix64& rng) {
    BlochVectorSet set;
    for (int i = 0; i < n; ++i) set.angles.push_back(angles_of(sample_sphere(rng)));
    return set;
}

// Random mixture of at most max_terms pure qubit product states.
inline DensityMatrix random_separable(int n, int max_terms, SplitMix64& rng) {
    const int terms = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_terms));
    std::vector<double> w(static_cast<std::size_t>(terms));
    double total = 0.0;
    for (auto& x : w) {
        x = rng.uniform();
        total += x;
    }
    DensityMatrix out{ComplexMatrix(std::size_t{1} << n, std::size_t{1} << n),
                      PartyStructure{n, 2}};
    for (int t = 0; t < terms; ++t) {
        const DensityMatrix term = product_state(random_bloch(n, rng)).to_density();
        out.matrix += term.matrix * cplx(w[static_cast<std::size_t>(t)] / total);
    }
    return out;
}

// Random pure qudit as the first column of a Haar unitary.
inline std::vector<cplx> random_pure_qudit(int d, SplitMix64& rng) {
    const ComplexMatrix u = sample_haar_unitary(rng, static_cast<std::size_t>(d));
    std::vector<cplx> v(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = u(static_cast<std::size_t>(i), 0);
    return v;
}

// Product of two random pure qutrits.
inline DensityMatrix random_two_qutrit_product(SplitMix64& rng) {
    const auto a = random_pure_qudit(3, rng);
    const auto b = random_pure_qudit(3, rng);
    DensityMatrix rho{ComplexMatrix(9, 9), PartyStructure{2, 3}};
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
            rho.matrix(i, j) = a[i / 3] * b[i % 3] * std::conj(a[j / 3] * b[j % 3]);
    return rho;
}

// Random full-rank two-qutrit state from a Ginibre matrix.
inline DensityMatrix random_two_qutrit(SplitMix64& rng) {
    ComplexMatrix g(9, 9);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    ComplexMatrix rho = g * g.dagger();
    const double tr = rho.trace().real();
    rho *= cplx(1.0 / tr);
    return DensityMatrix{std::move(rho), PartyStructure{2, 3}};
}

// rho -> V^{(x)N} rho V^{(x)N dagger} for a single-qubit V.
inline DensityMatrix collective_conjugate(const DensityMatrix& rho, const ComplexMatrix& v) {
    ComplexMatrix vn = v;
    for (int q = 1; q < rho.structure.n_parties; ++q) vn = kron(vn, v);
    return DensityMatrix{vn * rho.matrix * vn.dagger(), rho.structure};
}

// SO(3) action of a single-qubit unitary: R_ij = (1/2) tr(sigma_i u sigma_j u+).
inline std::array<std::array<double, 3>, 3> so3_of(const ComplexMatrix& u) {
    const auto& sigma = pauli_matrices();
    std::array<std::array<double, 3>, 3> r{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            r[i][j] = 0.5 * (sigma[i] * u * sigma[j] * u.dagger()).trace().real();
    return r;
}

}  // namespace testgen
