#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/party.hpp"

namespace spinmoments {

namespace detail {

// Digit strides for the mixed-radix index (party 0 = most significant).
inline std::vector<std::size_t> party_strides(const PartyStructure& ps) {
    std::vector<std::size_t> s(static_cast<std::size_t>(ps.n_parties));
    std::size_t acc = 1;
    for (int p = ps.n_parties - 1; p >= 0; --p) {
        s[static_cast<std::size_t>(p)] = acc;
        acc *= static_cast<std::size_t>(ps.local_dim);
    }
    return s;
}

inline void require_subset(const PartyStructure& ps, const std::vector<int>& subset) {
    if (subset.empty()) throw BadPartition("empty party subset");
    std::vector<int> sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        ps.require_party(sorted[i]);
        if (i > 0 && sorted[i] == sorted[i - 1]) throw BadPartition("duplicate party index");
    }
}

}  // namespace detail

// Trace out every party not in `keep`; kept parties retain their relative
// order. Result dimension is d^{|keep|}.
inline ComplexMatrix partial_trace_matrix(const ComplexMatrix& m, const PartyStructure& ps,
                                          const std::vector<int>& keep) {
    detail::require_subset(ps, keep);
    if (m.rows() != ps.dim() || !m.is_square()) throw ShapeMismatch("partial_trace dims");

    std::vector<int> keep_sorted = keep;
    std::sort(keep_sorted.begin(), keep_sorted.end());
    std::vector<int> traced;
    for (int p = 0; p < ps.n_parties; ++p)
        if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), p)) traced.push_back(p);

    const auto strides = detail::party_strides(ps);
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const auto enumerate = [&](const std::vector<int>& parties) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < parties.size(); ++i) count *= d;
        std::vector<std::size_t> offsets(count, 0);
        for (std::size_t x = 0; x < count; ++x) {
            std::size_t rem = x;
            for (auto it = parties.rbegin(); it != parties.rend(); ++it) {
                offsets[x] += (rem % d) * strides[static_cast<std::size_t>(*it)];
                rem /= d;
            }
        }
        return offsets;
    };
    const auto keep_off = enumerate(keep_sorted);
    const auto traced_off = enumerate(traced);

    ComplexMatrix out(keep_off.size(), keep_off.size());
    for (std::size_t a = 0; a < keep_off.size(); ++a)
        for (std::size_t b = 0; b < keep_off.size(); ++b) {
            cplx acc = 0.0;
            for (std::size_t t : traced_off) acc += m(keep_off[a] + t, keep_off[b] + t);
            out(a, b) = acc;
        }
    return out;
}

// Transpose the indices of `subset` parties only. Involutive and
// trace/Hermiticity preserving.
inline ComplexMatrix partial_transpose_matrix(const ComplexMatrix& m, const PartyStructure& ps,
                                              const std::vector<int>& subset) {
    detail::require_subset(ps, subset);
    if (static_cast<int>(subset.size()) >= ps.n_parties)
        throw BadPartition("partial transpose subset must be proper");
    if (m.rows() != ps.dim() || !m.is_square()) throw ShapeMismatch("partial_transpose dims");

    const auto strides = detail::party_strides(ps);
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();

    // Split each index into its subset part and the remainder.
    std::vector<std::size_t> sub_part(dim, 0);
    for (std::size_t i = 0; i < dim; ++i)
        for (int p : subset) sub_part[i] += ((i / strides[static_cast<std::size_t>(p)]) % d) *
                                            strides[static_cast<std::size_t>(p)];

    ComplexMatrix out(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const std::size_t rs = sub_part[r], rr = r - rs;
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t cs = sub_part[c], cr = c - cs;
            out(cs + rr, rs + cr) = m(r, c);
        }
    }
    return out;
}

// SWAP of parties a and b: a permutation matrix in the computational basis.
inline ComplexMatrix swap_pair(const PartyStructure& ps, int a, int b) {
    ps.require_party(a);
    ps.require_party(b);
    if (a == b) throw BadPartition("swap requires distinct parties");
    const auto strides = detail::party_strides(ps);
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    ComplexMatrix s(dim, dim);
    const std::size_t sa = strides[static_cast<std::size_t>(a)];
    const std::size_t sb = strides[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t da = (i / sa) % d;
        const std::size_t db = (i / sb) % d;
        const std::size_t j = i - da * sa - db * sb + db * sa + da * sb;
        s(j, i) = 1.0;
    }
    return s;
}

// P_ab = (1 + S_ab)/2, the projector onto the pair-symmetric subspace.
inline ComplexMatrix symmetric_projector_pair(const PartyStructure& ps, int a, int b) {
    ComplexMatrix p = swap_pair(ps, a, b);
    const std::size_t dim = ps.dim();
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            p(i, j) *= 0.5;
            if (i == j) p(i, j) += 0.5;
        }
    return p;
}

}  // namespace spinmoments
