#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "spinmoments/collective.hpp"
#include "spinmoments/eig.hpp"
#include "spinmoments/parallel.hpp"
#include "spinmoments/partial_ops.hpp"
#include "spinmoments/states.hpp"

using namespace spinmoments;
using Catch::Approx;

namespace {

int rank_of(const ComplexMatrix& m, double tol) {
    const auto eig = hermitian_eig(m);
    int r = 0;
    for (double v : eig.values)
        if (std::abs(v) > tol) ++r;
    return r;
}

}  // namespace

TEST_CASE("levi_civita") {
    REQUIRE(levi_civita(0, 1, 2) == 1);
    REQUIRE(levi_civita(1, 2, 0) == 1);
    REQUIRE(levi_civita(2, 0, 1) == 1);
    REQUIRE(levi_civita(0, 2, 1) == -1);
    REQUIRE(levi_civita(1, 0, 2) == -1);
    REQUIRE(levi_civita(2, 1, 0) == -1);
    REQUIRE(levi_civita(0, 0, 1) == 0);
}

TEST_CASE("collective spin obeys the su(2) algebra") {
    for (int n : {1, 2, 4}) {
        const auto jx = cached_j(n, 0), jy = cached_j(n, 1), jz = cached_j(n, 2);
        const ComplexMatrix comm = jx->matrix * jy->matrix - jy->matrix * jx->matrix;
        REQUIRE(max_abs_diff(comm, jz->matrix * cplx(0.0, 1.0)) < 1e-12);
    }
}

TEST_CASE("collective_j along a direction matches the component sum") {
    const std::array<double, 3> u{0.6, 0.0, 0.8};
    const CollectiveOperator ju = collective_j(3, u);
    const ComplexMatrix expect =
        cached_j(3, 0)->matrix * cplx(0.6) + cached_j(3, 2)->matrix * cplx(0.8);
    REQUIRE(max_abs_diff(ju.matrix, expect) < 1e-12);
    REQUIRE_THROWS_AS(collective_j(3, std::array<double, 3>{1.0, 1.0, 0.0}), BadDirection);
}

TEST_CASE("operator cache returns the same instance and is thread safe") {
    const auto a = cached_j(4, 2);
    const auto b = cached_j(4, 2);
    REQUIRE(a.get() == b.get());
    std::vector<std::shared_ptr<const CollectiveOperator>> got(64);
    parallel_for(got.size(), [&](std::size_t i) { got[i] = cached_j(5, static_cast<int>(i % 3)); });
    for (std::size_t i = 3; i < got.size(); ++i) REQUIRE(got[i].get() == got[i % 3].get());
}

TEST_CASE("gell_mann basis: d=2 recovers the Paulis, general d is orthonormal") {
    const auto& pauli = gell_mann(2);
    REQUIRE(pauli.size() == 3);
    for (std::size_t l = 0; l < 3; ++l)
        REQUIRE(max_abs_diff(pauli[l], pauli_matrices()[l]) < 1e-12);
    for (int d : {3, 4}) {
        const auto& basis = gell_mann(d);
        REQUIRE(basis.size() == static_cast<std::size_t>(d * d - 1));
        ComplexMatrix sum_sq(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < basis.size(); ++k) {
            REQUIRE(std::abs(basis[k].trace()) < 1e-12);
            REQUIRE(basis[k].is_hermitian(1e-12));
            sum_sq += basis[k] * basis[k];
            for (std::size_t l = 0; l < basis.size(); ++l) {
                const double expect = k == l ? static_cast<double>(d) : 0.0;
                REQUIRE(trace_product(basis[k], basis[l]).real() == Approx(expect).margin(1e-12));
            }
        }
        // Completeness: sum of squares is (d^2 - 1) I.
        for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i)
            for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j) {
                const double expect = i == j ? static_cast<double>(d * d - 1) : 0.0;
                REQUIRE(std::abs(sum_sq(i, j) - cplx(expect)) < 1e-10);
            }
    }
}

TEST_CASE("collective_lambda: qubit case reduces to collective spin") {
    for (int l = 1; l <= 3; ++l) {
        const auto lam = collective_lambda(3, 2, l);
        const auto j = cached_j(3, l - 1);
        REQUIRE(max_abs_diff(lam->matrix, j->matrix) < 1e-12);
    }
}

TEST_CASE("collective_lambda second moment on the maximally mixed qutrit pair") {
    DensityMatrix mixed{ComplexMatrix(9, 9), PartyStructure{2, 3}};
    for (std::size_t i = 0; i < 9; ++i) mixed.matrix(i, i) = 1.0 / 9.0;
    for (int l = 1; l <= 8; ++l) {
        const auto lam = collective_lambda(2, 3, l);
        const double second = trace_product(mixed.matrix * lam->matrix, lam->matrix).real();
        REQUIRE(second == Approx(2.0 / 9.0).margin(1e-12));
    }
    // N=1: Lambda_l = lambda_l / d.
    const auto one = collective_lambda(1, 3, 4);
    REQUIRE(max_abs_diff(one->matrix, gell_mann(3)[3] * cplx(1.0 / 3.0)) < 1e-12);
}

TEST_CASE("O_A spectrum at N=3 and phased Dicke eigenvector") {
    const auto oa = build_o_a(3);
    const auto eig = hermitian_eig(oa->matrix);
    const double s3 = 2.0 * std::sqrt(3.0);
    REQUIRE(eig.values[0] == Approx(-s3).margin(1e-9));
    REQUIRE(eig.values[1] == Approx(-s3).margin(1e-9));
    for (int k = 2; k < 6; ++k) REQUIRE(eig.values[static_cast<std::size_t>(k)] == Approx(0.0).margin(1e-9));
    REQUIRE(eig.values[6] == Approx(s3).margin(1e-9));
    REQUIRE(eig.values[7] == Approx(s3).margin(1e-9));
    // |zeta_3> sits at the top of the spectrum.
    const DensityMatrix z = phased_dicke(3).to_density();
    REQUIRE(trace_product(z.matrix, oa->matrix).real() == Approx(s3).margin(1e-10));
}

TEST_CASE("O_A ranks grow as 6, 24, 38") {
    REQUIRE(rank_of(build_o_a(4)->matrix, 1e-8) == 6);
    REQUIRE(rank_of(build_o_a(5)->matrix, 1e-8) == 24);
    REQUIRE(rank_of(build_o_a(6)->matrix, 1e-8) == 38);
}

TEST_CASE("O_S equals the symmetrized collective product") {
    for (int n : {3, 4}) {
        const auto os = build_o_s(n);
        const std::array<ComplexMatrix, 3> j{cached_j(n, 0)->matrix, cached_j(n, 1)->matrix,
                                             cached_j(n, 2)->matrix};
        ComplexMatrix sym(os->matrix.rows(), os->matrix.cols());
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& p : perms) sym += j[static_cast<std::size_t>(p[0])] *
                                           j[static_cast<std::size_t>(p[1])] *
                                           j[static_cast<std::size_t>(p[2])];
        REQUIRE(max_abs_diff(os->matrix, sym * cplx(8.0 / 6.0)) < 1e-10);
    }
}

TEST_CASE("O_A is rotation invariant; O_S only up to exchange symmetry") {
    SplitMix64 rng = stream_rng(21, 0);
    // The antisymmetric contraction is the unique rank-3 SO(3) invariant, so
    // only O_A survives collective conjugation; O_S is exchange-symmetric but
    // picks up direction dependence (a z-rotation by pi/2 flips its sign).
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix v = sample_haar_su2(rng);
        ComplexMatrix vn = v;
        for (int q = 1; q < 3; ++q) vn = kron(vn, v);
        const auto oa = build_o_a(3);
        REQUIRE(max_abs_diff(vn * oa->matrix * vn.dagger(), oa->matrix) < 1e-9);
    }
    const auto os = build_o_s(3);
    const PartyStructure ps{3, 2};
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const ComplexMatrix s = swap_pair(ps, a, b);
            REQUIRE(max_abs_diff(s * os->matrix * s, os->matrix) < 1e-12);
        }
}

TEST_CASE("build_w_s with the antisymmetric tensor reproduces O_A at N=3") {
    std::vector<double> w(27, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) w[static_cast<std::size_t>((i * 3 + j) * 3 + k)] = levi_civita(i, j, k);
    std::vector<ComplexMatrix> s(pauli_matrices().begin(), pauli_matrices().end());
    const CollectiveOperator ws = build_w_s(w, s);
    REQUIRE(max_abs_diff(ws.matrix, build_o_a(3)->matrix) < 1e-12);
    // Hermiticity also holds for the rescaled Gell-Mann basis.
    const auto& gm = gell_mann(3);
    std::vector<double> w3(static_cast<std::size_t>(8 * 8 * 8), 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) w3[static_cast<std::size_t>((i * 8 + j) * 8 + k)] = levi_civita(i, j, k);
    const CollectiveOperator w_qutrit = build_w_s(w3, gm);
    REQUIRE(w_qutrit.matrix.is_hermitian(1e-10));
    // Identity components in the basis are rejected.
    ComplexMatrix eye(2, 2);
    eye(0, 0) = 1.0;
    eye(1, 1) = 1.0;
    REQUIRE_THROWS_AS(build_w_s(w, std::vector<ComplexMatrix>{pauli_matrices()[0], eye,
                                                              pauli_matrices()[2]}),
                      ShapeMismatch);
}

TEST_CASE("two_ensemble_j builds sums and differences over the halves") {
    const int n = 2;
    ComplexMatrix eye4(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye4(i, i) = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const ComplexMatrix half = cached_j(n, axis)->matrix;
        const ComplexMatrix plus = kron(half, eye4) + kron(eye4, half);
        const ComplexMatrix minus = kron(half, eye4) - kron(eye4, half);
        REQUIRE(max_abs_diff(two_ensemble_j(n, axis, true)->matrix, plus) < 1e-12);
        REQUIRE(max_abs_diff(two_ensemble_j(n, axis, false)->matrix, minus) < 1e-12);
    }
}
