#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/party.hpp"

namespace spinmoments {

struct CollectiveOperator {
    ComplexMatrix matrix;
    PartyStructure structure;
    std::string label;
};

inline const std::array<ComplexMatrix, 3>& pauli_matrices() {
    static const std::array<ComplexMatrix, 3> p = [] {
        std::array<ComplexMatrix, 3> m{ComplexMatrix(2, 2), ComplexMatrix(2, 2), ComplexMatrix(2, 2)};
        m[0](0, 1) = 1.0;
        m[0](1, 0) = 1.0;
        m[1](0, 1) = cplx(0.0, -1.0);
        m[1](1, 0) = cplx(0.0, 1.0);
        m[2](0, 0) = 1.0;
        m[2](1, 1) = -1.0;
        return m;
    }();
    return p;
}

// eps[i][j][k]: totally antisymmetric symbol with eps[0][1][2] = 1.
inline int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i) * (k - j) * (k - i) > 0) ? 1 : ((i - j) * (j - k) * (i - k) > 0 ? -1 : 0);
}

namespace detail {

// out += coeff * (op acting on `site`), for a d x d single-site op.
inline void add_single_site(ComplexMatrix& out, const PartyStructure& ps, int site,
                            const ComplexMatrix& op, cplx coeff) {
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    std::size_t stride = 1;
    for (int p = ps.n_parties - 1; p > site; --p) stride *= d;
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t m = (c / stride) % d;
        const std::size_t base = c - m * stride;
        for (std::size_t r = 0; r < d; ++r) {
            const cplx v = op(r, m);
            if (v != cplx(0.0)) out(base + r * stride, c) += coeff * v;
        }
    }
}

// out += coeff * sigma_{labels[0]}^(sites[0]) ... ; each Pauli string has one
// nonzero per column, so this costs O(dim) per string.
inline void add_pauli_string(ComplexMatrix& out, int n, const int* sites, const int* labels,
                             int len, cplx coeff) {
    const std::size_t dim = std::size_t{1} << n;
    for (std::size_t c = 0; c < dim; ++c) {
        std::size_t r = c;
        cplx amp = coeff;
        for (int t = 0; t < len; ++t) {
            const int bitpos = n - 1 - sites[t];
            const bool b = ((c >> bitpos) & 1u) != 0;
            switch (labels[t]) {
                case 0:  // sigma_x
                    r ^= (std::size_t{1} << bitpos);
                    break;
                case 1:  // sigma_y
                    r ^= (std::size_t{1} << bitpos);
                    amp *= b ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
                    break;
                default:  // sigma_z
                    if (b) amp = -amp;
                    break;
            }
        }
        out(r, c) += amp;
    }
}

// Concurrent-reader, single-writer insertion cache keyed by (label, N, d).
class OperatorCache {
public:
    static OperatorCache& instance() {
        static OperatorCache c;
        return c;
    }

    template <class Builder>
    std::shared_ptr<const CollectiveOperator> get_or_build(const std::string& key, Builder&& b) {
        {
            std::shared_lock lk(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto built = std::make_shared<const CollectiveOperator>(b());
        std::unique_lock lk(mu_);
        auto [it, inserted] = cache_.emplace(key, built);
        return it->second;  // first writer wins
    }

private:
    std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const CollectiveOperator>> cache_;
};

inline std::string cache_key(const std::string& label, int n, int d) {
    return label + "/" + std::to_string(n) + "/" + std::to_string(d);
}

}  // namespace detail

// J_u = (1/2) sum_i u . sigma^(i).
inline CollectiveOperator collective_j(int n, const std::array<double, 3>& u) {
    if (n < 1 || n > 12) throw OutOfRange("collective_j: need 1 <= N <= 12");
    const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (std::abs(norm - 1.0) > 1e-10) throw BadDirection("collective_j: |u| != 1");
    const PartyStructure ps{n, 2};
    CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, "Ju"};
    const auto& sigma = pauli_matrices();
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < 3; ++l)
            if (u[static_cast<std::size_t>(l)] != 0.0)
                detail::add_single_site(op.matrix, ps, i, sigma[static_cast<std::size_t>(l)],
                                        0.5 * u[static_cast<std::size_t>(l)]);
    return op;
}

// Cached J_x / J_y / J_z.
inline std::shared_ptr<const CollectiveOperator> cached_j(int n, int axis) {
    if (axis < 0 || axis > 2) throw OutOfRange("cached_j: axis in {0,1,2}");
    static const char* names[3] = {"Jx", "Jy", "Jz"};
    return detail::OperatorCache::instance().get_or_build(
        detail::cache_key(names[axis], n, 2), [&] {
            std::array<double, 3> u{0.0, 0.0, 0.0};
            u[static_cast<std::size_t>(axis)] = 1.0;
            CollectiveOperator op = collective_j(n, u);
            op.label = names[axis];
            return op;
        });
}

// Generalized Gell-Mann basis rescaled so tr(lambda_k lambda_l) = d delta_kl.
// Order: for each pair k<l the symmetric then antisymmetric matrix, then the
// d-1 diagonal matrices. For d=2 this is exactly (sigma_x, sigma_y, sigma_z).
inline const std::vector<ComplexMatrix>& gell_mann(int d) {
    if (d < 2 || d > 64) throw OutOfRange("gell_mann: need 2 <= d <= 64");
    static std::mutex mu;
    static std::map<int, std::vector<ComplexMatrix>> cache;
    std::lock_guard lk(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;

    const double scale = std::sqrt(d / 2.0);
    std::vector<ComplexMatrix> out;
    const std::size_t dd = static_cast<std::size_t>(d);
    for (std::size_t k = 0; k < dd; ++k)
        for (std::size_t l = k + 1; l < dd; ++l) {
            ComplexMatrix x(dd, dd), y(dd, dd);
            x(k, l) = scale;
            x(l, k) = scale;
            y(k, l) = cplx(0.0, -scale);
            y(l, k) = cplx(0.0, scale);
            out.push_back(std::move(x));
            out.push_back(std::move(y));
        }
    for (std::size_t m = 1; m < dd; ++m) {
        ComplexMatrix z(dd, dd);
        const double w = scale * std::sqrt(2.0 / (static_cast<double>(m) * (m + 1.0)));
        for (std::size_t j = 0; j < m; ++j) z(j, j) = w;
        z(m, m) = -w * static_cast<double>(m);
        out.push_back(std::move(z));
    }
    return cache.emplace(d, std::move(out)).first->second;
}

// Lambda_l = (1/d) sum_i lambda_l^(i); l is 1-based over the d^2-1 basis.
inline std::shared_ptr<const CollectiveOperator> collective_lambda(int n, int d, int l) {
    if (l < 1 || l > d * d - 1) throw OutOfRange("collective_lambda: need 1 <= l <= d^2-1");
    const PartyStructure ps{n, d};
    if (ps.dim() > 4096) throw OutOfRange("collective_lambda: d^N > 4096");
    return detail::OperatorCache::instance().get_or_build(
        detail::cache_key("Lambda_" + std::to_string(l), n, d), [&] {
            CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, "Lambda_l"};
            const ComplexMatrix& lam = gell_mann(d)[static_cast<std::size_t>(l - 1)];
            for (int i = 0; i < n; ++i)
                detail::add_single_site(op.matrix, ps, i, lam, 1.0 / static_cast<double>(d));
            return op;
        });
}

// O_S = sum_{i<j<k} S(sigma_x^i sigma_y^j sigma_z^k): all label permutations,
// all unsigned.
inline std::shared_ptr<const CollectiveOperator> build_o_s(int n) {
    if (n < 3 || n > 10) throw OutOfRange("build_o_s: need 3 <= N <= 10");
    return detail::OperatorCache::instance().get_or_build(
        detail::cache_key("O_S", n, 2), [&] {
            const PartyStructure ps{n, 2};
            CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, "O_S"};
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int k = j + 1; k < n; ++k) {
                        const int sites[3] = {i, j, k};
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b)
                                for (int c = 0; c < 3; ++c) {
                                    if (a == b || b == c || a == c) continue;
                                    const int labels[3] = {a, b, c};
                                    detail::add_pauli_string(op.matrix, n, sites, labels, 3, 1.0);
                                }
                    }
            return op;
        });
}

// O_A = sum_{i<j<k} sum_{lmn} eps_lmn sigma_l^i sigma_m^j sigma_n^k.
inline std::shared_ptr<const CollectiveOperator> build_o_a(int n) {
    if (n < 3 || n > 10) throw OutOfRange("build_o_a: need 3 <= N <= 10");
    return detail::OperatorCache::instance().get_or_build(
        detail::cache_key("O_A", n, 2), [&] {
            const PartyStructure ps{n, 2};
            CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, "O_A"};
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int k = j + 1; k < n; ++k) {
                        const int sites[3] = {i, j, k};
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b)
                                for (int c = 0; c < 3; ++c) {
                                    const int e = levi_civita(a, b, c);
                                    if (e == 0) continue;
                                    const int labels[3] = {a, b, c};
                                    detail::add_pauli_string(op.matrix, n, sites, labels, 3,
                                                             static_cast<double>(e));
                                }
                    }
            return op;
        });
}

// W_S = sum_ijk w_ijk s_i (x) s_j (x) s_k for an arbitrary local basis s.
// w is flat with w[(i*m + j)*m + k], m = s.size().
inline CollectiveOperator build_w_s(const std::vector<double>& w,
                                    const std::vector<ComplexMatrix>& s) {
    const std::size_t m = s.size();
    if (m == 0 || w.size() != m * m * m) throw ShapeMismatch("build_w_s: w must have size |s|^3");
    const std::size_t d = s.front().rows();
    for (const auto& si : s) {
        if (!si.is_square() || si.rows() != d) throw ShapeMismatch("build_w_s: basis dims differ");
        if (max_abs_diff(si, ComplexMatrix::identity(d)) < 1e-12)
            throw ShapeMismatch("build_w_s: identity not allowed in the basis");
    }
    const PartyStructure ps{3, static_cast<int>(d)};
    CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, "W_S"};
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            ComplexMatrix sij = kron(s[i], s[j]);
            for (std::size_t k = 0; k < m; ++k) {
                const double wijk = w[(i * m + j) * m + k];
                if (wijk == 0.0) continue;
                op.matrix += wijk * kron(sij, s[k]);
            }
        }
    return op;
}

// J^pm_l = J_{l,A} (x) 1 pm 1 (x) J_{l,B} on two N-qubit ensembles.
inline std::shared_ptr<const CollectiveOperator> two_ensemble_j(int n, int axis, bool plus) {
    if (axis < 0 || axis > 2) throw OutOfRange("two_ensemble_j: axis in {0,1,2}");
    if (2 * n > 12 || n < 1) throw OutOfRange("two_ensemble_j: need 2N <= 12");
    static const char* names[3] = {"x", "y", "z"};
    const std::string label = std::string(plus ? "Jplus_" : "Jminus_") + names[axis];
    return detail::OperatorCache::instance().get_or_build(
        detail::cache_key(label, 2 * n, 2), [&] {
            const PartyStructure ps{2 * n, 2};
            CollectiveOperator op{ComplexMatrix(ps.dim(), ps.dim()), ps, label};
            const auto& sigma = pauli_matrices()[static_cast<std::size_t>(axis)];
            for (int i = 0; i < n; ++i) detail::add_single_site(op.matrix, ps, i, sigma, 0.5);
            for (int i = n; i < 2 * n; ++i)
                detail::add_single_site(op.matrix, ps, i, sigma, plus ? 0.5 : -0.5);
            return op;
        });
}

}  // namespace spinmoments
