#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "spinmoments/collective.hpp"
#include "spinmoments/eig.hpp"
#include "spinmoments/moments.hpp"
#include "spinmoments/states.hpp"

using namespace spinmoments;
using Catch::Approx;

namespace {

double binom(int n, int k) {
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out *= static_cast<double>(n - k + i) / i;
    return out;
}

}  // namespace

TEST_CASE("dicke states are normalized uniform superpositions") {
    const PureState d = dicke(4, 2);
    d.validate();
    const double amp = 1.0 / std::sqrt(binom(4, 2));
    for (std::size_t b = 0; b < d.amplitudes.size(); ++b) {
        const int k = detail::popcount(b);
        if (k == 2)
            REQUIRE(std::abs(d.amplitudes[b] - cplx(amp)) < 1e-12);
        else
            REQUIRE(std::abs(d.amplitudes[b]) == 0.0);
    }
    REQUIRE(is_permutationally_symmetric(d.to_density()));
    REQUIRE_THROWS_AS(dicke(3, 4), OutOfRange);
}

TEST_CASE("phased dicke state carries the advertised phases") {
    const int n = 3;
    const PureState z = phased_dicke(n);
    z.validate();
    // Particle k (1-based) excited <-> basis index 1 << (n - k), phase 2 pi k / n.
    for (int k = 1; k <= n; ++k) {
        const std::size_t idx = std::size_t{1} << (n - k);
        const double arg = 2.0 * std::numbers::pi * k / n;
        const cplx expect = cplx(std::cos(arg), std::sin(arg)) / std::sqrt(3.0);
        REQUIRE(std::abs(z.amplitudes[idx] - expect) < 1e-12);
    }
    REQUIRE(std::abs(z.amplitudes[0]) == 0.0);
    // The flipped variant excites all but one qubit.
    const PureState zt = phased_dicke(n, true);
    zt.validate();
    for (int k = 1; k <= n; ++k) {
        const std::size_t idx = (std::size_t{1} << n) - 1 - (std::size_t{1} << (n - k));
        REQUIRE(std::abs(zt.amplitudes[idx]) == Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
    }
}

TEST_CASE("ghz state has two equal amplitudes") {
    const PureState g = ghz(3);
    g.validate();
    REQUIRE(std::abs(g.amplitudes[0]) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    REQUIRE(std::abs(g.amplitudes[7]) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    for (std::size_t b = 1; b < 7; ++b) REQUIRE(std::abs(g.amplitudes[b]) == 0.0);
}

TEST_CASE("mixed family interpolates between the phased Dicke states and noise") {
    const DensityMatrix rho = mixed_family(3, 0.4, 0.4);
    rho.validate();
    REQUIRE(rho.matrix.trace().real() == Approx(1.0).margin(1e-12));
    const DensityMatrix pure = mixed_family(3, 1.0, 0.0);
    REQUIRE(max_abs_diff(pure.matrix, phased_dicke(3).to_density().matrix) < 1e-12);
    const DensityMatrix noise = mixed_family(3, 0.0, 0.0);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(noise.matrix(i, i).real() == Approx(0.125));
    REQUIRE_THROWS_AS(mixed_family(3, 0.7, 0.7), OutOfRange);
}

TEST_CASE("singlet states are zero eigenstates of every collective component") {
    for (int n : {2, 4, 6}) {
        const DensityMatrix s = singlet_state(n, n == 2 ? 1 : 3, 99);
        s.validate();
        for (int axis = 0; axis < 3; ++axis) {
            const auto j = cached_j(n, axis);
            REQUIRE(max_abs_diff(j->matrix * s.matrix, ComplexMatrix(s.dim(), s.dim())) < 1e-10);
        }
    }
    REQUIRE_THROWS_AS(singlet_state(5, 1, 0), OddN);
}

TEST_CASE("two-qubit singlet matches the textbook state") {
    const DensityMatrix s = singlet_state(2, 1, 123);
    // (|01> - |10>)/sqrt(2): check the four nonzero entries.
    REQUIRE(s.matrix(1, 1).real() == Approx(0.5).margin(1e-12));
    REQUIRE(s.matrix(2, 2).real() == Approx(0.5).margin(1e-12));
    REQUIRE(s.matrix(1, 2).real() == Approx(-0.5).margin(1e-12));
    REQUIRE(s.matrix(0, 0).real() == Approx(0.0).margin(1e-12));
}

TEST_CASE("singlet mixtures are collective-rotation invariant") {
    const DensityMatrix s = singlet_state(4, 2, 7);
    SplitMix64 rng = stream_rng(31, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rot = testgen::collective_conjugate(s, sample_haar_su2(rng));
        REQUIRE(max_abs_diff(rot.matrix, s.matrix) < 1e-10);
    }
}

TEST_CASE("depolarize endpoints") {
    const DensityMatrix rho = dicke(2, 1).to_density();
    REQUIRE(max_abs_diff(depolarize(rho, 0.0).matrix, rho.matrix) < 1e-15);
    const DensityMatrix mixed = depolarize(rho, 1.0);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(mixed.matrix(i, i).real() == Approx(0.25));
    REQUIRE_THROWS_AS(depolarize(rho, 1.5), OutOfRange);
}

TEST_CASE("product states realize the requested Bloch vectors") {
    SplitMix64 rng = stream_rng(5, 0);
    const auto& sigma = pauli_matrices();
    for (int trial = 0; trial < 10; ++trial) {
        const BlochVectorSet set = testgen::random_bloch(3, rng);
        const DensityMatrix rho = product_state(set).to_density();
        for (int q = 0; q < 3; ++q) {
            const DensityMatrix one = partial_trace(rho, {q});
            const auto v = set.vec(static_cast<std::size_t>(q));
            for (int l = 0; l < 3; ++l)
                REQUIRE(trace_product(one.matrix, sigma[static_cast<std::size_t>(l)]).real() ==
                        Approx(v[static_cast<std::size_t>(l)]).margin(1e-10));
        }
    }
}

TEST_CASE("bloch angles follow the x-polar convention") {
    BlochVectorSet set;
    set.angles.push_back({0.0, 0.3});
    const auto x = set.vec(0);
    REQUIRE(x[0] == Approx(1.0));
    set.angles.push_back({std::numbers::pi / 2.0, 0.0});
    const auto y = set.vec(1);
    REQUIRE(y[1] == Approx(1.0).margin(1e-12));
    set.angles.push_back({std::numbers::pi / 2.0, std::numbers::pi / 2.0});
    const auto z = set.vec(2);
    REQUIRE(z[2] == Approx(1.0).margin(1e-12));
}

TEST_CASE("permutational symmetry detects asymmetric states") {
    REQUIRE(is_permutationally_symmetric(ghz(3).to_density()));
    REQUIRE(is_permutationally_symmetric(dicke(4, 1).to_density()));
    DensityMatrix rho{ComplexMatrix(4, 4), PartyStructure{2, 2}};
    rho.matrix(1, 1) = 1.0;  // |01><01|
    REQUIRE_FALSE(is_permutationally_symmetric(rho));
    // The two-qubit singlet lives in the antisymmetric subspace.
    REQUIRE_FALSE(is_permutationally_symmetric(singlet_state(2, 1, 0)));
}

TEST_CASE("permutation invariance is weaker than symmetric-subspace support") {
    // White noise keeps swap invariance but escapes the symmetric subspace.
    const DensityMatrix noisy = depolarize(dicke(4, 1).to_density(), 0.5);
    REQUIRE(is_permutation_invariant(noisy));
    REQUIRE_FALSE(is_permutationally_symmetric(noisy));
    // The singlet is swap-invariant (it only gains a global phase).
    REQUIRE(is_permutation_invariant(singlet_state(2, 1, 0)));
    // |01><01| changes under the swap, failing both notions.
    DensityMatrix rho{ComplexMatrix(4, 4), PartyStructure{2, 2}};
    rho.matrix(1, 1) = 1.0;
    REQUIRE_FALSE(is_permutation_invariant(rho));
}

TEST_CASE("density validation rejects malformed inputs") {
    DensityMatrix bad{ComplexMatrix(4, 4), PartyStructure{2, 2}};
    bad.matrix(0, 1) = 1.0;  // not Hermitian
    bad.matrix(0, 0) = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), NonHermitianInput);
    DensityMatrix trace_off{ComplexMatrix(4, 4), PartyStructure{2, 2}};
    trace_off.matrix(0, 0) = 2.0;
    REQUIRE_THROWS_AS(trace_off.validate(), OutOfRange);
}
