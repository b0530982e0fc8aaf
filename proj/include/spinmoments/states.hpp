#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/eig.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/partial_ops.hpp"
#include "spinmoments/party.hpp"
#include "spinmoments/rng.hpp"

namespace spinmoments {

struct DensityMatrix {
    ComplexMatrix matrix;
    PartyStructure structure;

    std::size_t dim() const { return structure.dim(); }

    // Hermitian within 1e-10, unit trace within 1e-10, and (when the spectrum
    // is affordable, dim <= 1024) min eigenvalue >= -1e-9.
    void validate() const {
        if (matrix.rows() != structure.dim() || !matrix.is_square())
            throw ShapeMismatch("DensityMatrix: dimension mismatch with party structure");
        if (!matrix.is_hermitian(1e-10)) throw NonHermitianInput("DensityMatrix");
        if (std::abs(matrix.trace() - cplx(1.0)) > 1e-10)
            throw OutOfRange("DensityMatrix: trace != 1");
        if (matrix.rows() <= 1024 && min_eigenvalue(matrix) < -1e-9)
            throw OutOfRange("DensityMatrix: negative eigenvalue");
    }
};

struct PureState {
    std::vector<cplx> amplitudes;
    PartyStructure structure;

    std::size_t dim() const { return structure.dim(); }

    void validate() const {
        if (amplitudes.size() != structure.dim())
            throw ShapeMismatch("PureState: dimension mismatch with party structure");
        double n2 = 0.0;
        for (const auto& a : amplitudes) n2 += std::norm(a);
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) throw OutOfRange("PureState: not normalized");
    }

    DensityMatrix to_density() const {
        const std::size_t d = amplitudes.size();
        DensityMatrix rho{ComplexMatrix(d, d), structure};
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                rho.matrix(i, j) = amplitudes[i] * std::conj(amplitudes[j]);
        return rho;
    }
};

// One (theta_i, phi_i) pair per particle. The induced unit vector follows the
// convention <sigma_x> = cos(theta), <sigma_y> = sin(theta)cos(phi),
// <sigma_z> = sin(theta)sin(phi).
struct BlochVectorSet {
    std::vector<std::array<double, 2>> angles;

    std::size_t size() const { return angles.size(); }

    std::array<double, 3> vec(std::size_t i) const {
        const double th = angles[i][0], ph = angles[i][1];
        return {std::cos(th), std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph)};
    }
};

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    DensityMatrix out{partial_trace_matrix(rho.matrix, rho.structure, keep),
                      PartyStructure{static_cast<int>(keep.size()), rho.structure.local_dim}};
    return out;
}

inline ComplexMatrix partial_transpose(const DensityMatrix& rho, const std::vector<int>& subset) {
    return partial_transpose_matrix(rho.matrix, rho.structure, subset);
}

namespace detail {
inline int popcount(std::size_t x) {
    int c = 0;
    while (x) {
        c += static_cast<int>(x & 1);
        x >>= 1;
    }
    return c;
}
}  // namespace detail

// |D_{N,m}>: equal positive amplitudes on all weight-m basis states.
inline PureState dicke(int n, int m) {
    if (n < 1 || n > 12 || m < 0 || m > n) throw OutOfRange("dicke: need 0 <= m <= N <= 12");
    PureState s{std::vector<cplx>(std::size_t{1} << n, 0.0), PartyStructure{n, 2}};
    std::vector<std::size_t> hits;
    for (std::size_t b = 0; b < s.amplitudes.size(); ++b)
        if (detail::popcount(b) == m) hits.push_back(b);
    const double amp = 1.0 / std::sqrt(static_cast<double>(hits.size()));
    for (std::size_t b : hits) s.amplitudes[b] = amp;
    return s;
}

// |zeta_N> = sum_k e^{2 pi i k/N}/sqrt(N) |0..1_k..0>, qubit k = bit N-k;
// flipped applies sigma_x to every qubit.
inline PureState phased_dicke(int n, bool flipped = false) {
    if (n < 3 || n > 12) throw OutOfRange("phased_dicke: need 3 <= N <= 12");
    const std::size_t dim = std::size_t{1} << n;
    PureState s{std::vector<cplx>(dim, 0.0), PartyStructure{n, 2}};
    for (int k = 1; k <= n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        s.amplitudes[std::size_t{1} << (n - k)] = cplx(std::cos(a), std::sin(a)) / std::sqrt(n);
    }
    if (flipped) {
        std::vector<cplx> flippedamp(dim, 0.0);
        for (std::size_t b = 0; b < dim; ++b) flippedamp[b ^ (dim - 1)] = s.amplitudes[b];
        s.amplitudes = std::move(flippedamp);
    }
    return s;
}

inline PureState ghz(int n) {
    if (n < 1 || n > 12) throw OutOfRange("ghz: need 1 <= N <= 12");
    PureState s{std::vector<cplx>(std::size_t{1} << n, 0.0), PartyStructure{n, 2}};
    s.amplitudes.front() = 1.0 / std::sqrt(2.0);
    s.amplitudes.back() = 1.0 / std::sqrt(2.0);
    return s;
}

// x|zeta><zeta| + y|zeta~><zeta~| + (1-x-y) I/2^N.
inline DensityMatrix mixed_family(int n, double x, double y) {
    if (x < 0.0 || y < 0.0 || x + y > 1.0 + 1e-12)
        throw OutOfRange("mixed_family: need x,y >= 0 and x+y <= 1");
    const DensityMatrix z = phased_dicke(n, false).to_density();
    const DensityMatrix zt = phased_dicke(n, true).to_density();
    const std::size_t dim = z.dim();
    DensityMatrix rho{ComplexMatrix(dim, dim), z.structure};
    const double w = (1.0 - x - y) / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j)
            rho.matrix(i, j) = x * z.matrix(i, j) + y * zt.matrix(i, j);
        rho.matrix(i, i) += w;
    }
    return rho;
}

// Uniform mixture of `pairings` random matching-product singlet states. Each
// pure component is a tensor product of two-qubit singlets over a random
// perfect matching, hence an exact zero eigenstate of every J_l.
inline DensityMatrix singlet_state(int n, int pairings, std::uint64_t seed) {
    if (n < 2 || n > 12) throw OutOfRange("singlet_state: need 2 <= N <= 12");
    if (n % 2 != 0) throw OddN("singlet_state: N must be even");
    if (pairings < 1) throw OutOfRange("singlet_state: pairings >= 1");

    const std::size_t dim = std::size_t{1} << n;
    DensityMatrix rho{ComplexMatrix(dim, dim), PartyStructure{n, 2}};
    SplitMix64 rng = stream_rng(seed, 0x5150);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    for (int rep = 0; rep < pairings; ++rep) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng() % i]);

        std::vector<cplx> amp(dim, 1.0);
        for (std::size_t b = 0; b < dim; ++b) {
            for (int k = 0; k + 1 < n; k += 2) {
                const int qa = perm[static_cast<std::size_t>(k)];
                const int qb = perm[static_cast<std::size_t>(k + 1)];
                const int ba = static_cast<int>((b >> (n - 1 - qa)) & 1u);
                const int bb = static_cast<int>((b >> (n - 1 - qb)) & 1u);
                if (ba == bb) {
                    amp[b] = 0.0;
                    break;
                }
                // (|01> - |10>)/sqrt(2) with the lower qubit index first.
                const bool low_first = (qa < qb) == (ba == 0);
                amp[b] *= low_first ? inv_sqrt2 : -inv_sqrt2;
            }
        }
        const double w = 1.0 / pairings;
        for (std::size_t i = 0; i < dim; ++i) {
            if (amp[i] == cplx(0.0)) continue;
            for (std::size_t j = 0; j < dim; ++j)
                rho.matrix(i, j) += w * amp[i] * std::conj(amp[j]);
        }
    }
    return rho;
}

// (1-lambda) rho + lambda I/dim. Mind the two noise conventions in use:
// the noisy singlet rho_p takes lambda = p, the noisy Dicke state lambda = 1 - p.
inline DensityMatrix depolarize(const DensityMatrix& rho, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw OutOfRange("depolarize: lambda in [0,1]");
    const std::size_t dim = rho.dim();
    DensityMatrix out{rho.matrix, rho.structure};
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) out.matrix(i, j) *= (1.0 - lambda);
        out.matrix(i, i) += lambda / static_cast<double>(dim);
    }
    return out;
}

// Tensor product of single-qubit pure states with <sigma> equal to the given
// Bloch vectors.
inline PureState product_state(const BlochVectorSet& bloch) {
    const int n = static_cast<int>(bloch.size());
    if (n < 1 || n > 12) throw OutOfRange("product_state: need 1 <= N <= 12");
    std::vector<cplx> amp{1.0};
    for (int i = 0; i < n; ++i) {
        const auto v = bloch.vec(static_cast<std::size_t>(i));
        // Standard polar form about z: v_z = cos(t), phase from (v_x, v_y).
        const double t = std::acos(std::clamp(v[2], -1.0, 1.0));
        const double ph = std::atan2(v[1], v[0]);
        const cplx c0 = std::cos(t / 2.0);
        const cplx c1 = std::sin(t / 2.0) * cplx(std::cos(ph), std::sin(ph));
        std::vector<cplx> next(amp.size() * 2);
        for (std::size_t b = 0; b < amp.size(); ++b) {
            next[2 * b] = amp[b] * c0;
            next[2 * b + 1] = amp[b] * c1;
        }
        amp = std::move(next);
    }
    return PureState{std::move(amp), PartyStructure{n, 2}};
}

// True iff P_ab rho = rho P_ab = rho for every pair, entrywise within 1e-10.
// Checking S_ab rho = rho and rho S_ab = rho is equivalent since
// P_ab = (1 + S_ab)/2.
inline bool is_permutationally_symmetric(const DensityMatrix& rho, double tol = 1e-10) {
    const auto& ps = rho.structure;
    const auto strides = detail::party_strides(ps);
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    std::vector<std::size_t> swapped(dim);
    for (int a = 0; a < ps.n_parties; ++a) {
        for (int b = a + 1; b < ps.n_parties; ++b) {
            const std::size_t sa = strides[static_cast<std::size_t>(a)];
            const std::size_t sb = strides[static_cast<std::size_t>(b)];
            for (std::size_t i = 0; i < dim; ++i) {
                const std::size_t da = (i / sa) % d;
                const std::size_t db = (i / sb) % d;
                swapped[i] = i - da * sa - db * sb + db * sa + da * sb;
            }
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) {
                    if (std::abs(rho.matrix(swapped[i], j) - rho.matrix(i, j)) > tol) return false;
                    if (std::abs(rho.matrix(i, swapped[j]) - rho.matrix(i, j)) > tol) return false;
                }
        }
    }
    return true;
}

// True iff S_ab rho S_ab = rho for every pair, entrywise within 1e-10.
// Weaker than is_permutationally_symmetric: admixing white noise preserves
// this invariance but moves support outside the symmetric subspace.
inline bool is_permutation_invariant(const DensityMatrix& rho, double tol = 1e-10) {
    const auto& ps = rho.structure;
    const auto strides = detail::party_strides(ps);
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    std::vector<std::size_t> swapped(dim);
    for (int a = 0; a < ps.n_parties; ++a) {
        for (int b = a + 1; b < ps.n_parties; ++b) {
            const std::size_t sa = strides[static_cast<std::size_t>(a)];
            const std::size_t sb = strides[static_cast<std::size_t>(b)];
            for (std::size_t i = 0; i < dim; ++i) {
                const std::size_t da = (i / sa) % d;
                const std::size_t db = (i / sb) % d;
                swapped[i] = i - da * sa - db * sb + db * sa + da * sb;
            }
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j)
                    if (std::abs(rho.matrix(swapped[i], swapped[j]) - rho.matrix(i, j)) > tol)
                        return false;
        }
    }
    return true;
}

}  // namespace spinmoments
