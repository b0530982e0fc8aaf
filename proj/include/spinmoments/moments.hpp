#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spinmoments/collective.hpp"
#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/parallel.hpp"
#include "spinmoments/rng.hpp"
#include "spinmoments/states.hpp"

namespace spinmoments {

// f_U(rho) = alpha * Var(J_u) + beta * <J_u>^2 + gamma, raised to `order`.
struct MomentSpec {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    int order = 1;

    // Coefficients are fixed by requiring f(u) = u^T C u for every direction,
    // with C the two-site covariance matrix of a symmetric state: using
    // <J_u> = (N/2) a_u and <J_u^2> = N/4 + [N(N-1)/4] t_uu, this forces
    // alpha*N(N-1)/4 = 1, beta = alpha - 4/N^2 and gamma = -alpha*N/4.
    static MomentSpec obs1(int n) {
        if (n < 2) throw OutOfRange("MomentSpec::obs1: need N >= 2");
        const double n2 = static_cast<double>(n) * (n - 1);
        return {4.0 / n2, 4.0 / (static_cast<double>(n) * n * (n - 1)), -1.0 / (n - 1), 1};
    }
    static MomentSpec obs2() { return {3.0, 0.0, 0.0, 1}; }
    static MomentSpec obs4(int n) {
        if (n < 1) throw OutOfRange("MomentSpec::obs4: need N >= 1");
        return {0.0, 12.0 / (static_cast<double>(n) * n), 0.0, 1};
    }
};

enum class SampleMode { direction, unitary };

inline std::string to_string(SampleMode m) {
    return m == SampleMode::direction ? "direction" : "unitary";
}

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    SampleMode mode = SampleMode::direction;
};

// Covariance data of a two-site reduced state: C_ij = t_ij - a_i b_j, where a
// and b are the single-site Bloch vectors of the two sites (a = b for a
// permutationally symmetric pair).
struct CovarianceMatrix {
    std::array<std::array<double, 3>, 3> c{};
    std::array<std::array<double, 3>, 3> t{};
    std::array<double, 3> a{};
    std::array<double, 3> b{};
    bool symmetric = false;

    double trace() const { return c[0][0] + c[1][1] + c[2][2]; }
    double trace_sq() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        return s;
    }
    double trace_cu() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    s += c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                         c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] *
                         c[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        return s;
    }
};

namespace detail {

// tr(rho * M^(site)) for a single-site d x d operator M; O(dim * d).
inline cplx single_site_trace(const ComplexMatrix& rho, const PartyStructure& ps, int site,
                              const ComplexMatrix& m) {
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    std::size_t stride = 1;
    for (int p = ps.n_parties - 1; p > site; --p) stride *= d;
    cplx out = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t mc = (c / stride) % d;
        const std::size_t base = c - mc * stride;
        for (std::size_t r = 0; r < d; ++r) {
            const cplx v = m(r, mc);
            if (v != cplx(0.0)) out += rho(c, base + r * stride) * v;
        }
    }
    return out;
}

// tr(rho * A^(i) B^(j)) with i != j; O(dim * d^2).
inline cplx site_pair_trace(const ComplexMatrix& rho, const PartyStructure& ps, int i, int j,
                            const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t d = static_cast<std::size_t>(ps.local_dim);
    const std::size_t dim = ps.dim();
    auto stride_of = [&](int site) {
        std::size_t s = 1;
        for (int p = ps.n_parties - 1; p > site; --p) s *= d;
        return s;
    };
    const std::size_t si = stride_of(i), sj = stride_of(j);
    cplx out = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t ci = (c / si) % d, cj = (c / sj) % d;
        const std::size_t base = c - ci * si - cj * sj;
        for (std::size_t ri = 0; ri < d; ++ri) {
            const cplx av = a(ri, ci);
            if (av == cplx(0.0)) continue;
            for (std::size_t rj = 0; rj < d; ++rj) {
                const cplx bv = b(rj, cj);
                if (bv != cplx(0.0)) out += rho(c, base + ri * si + rj * sj) * av * bv;
            }
        }
    }
    return out;
}

// tr(rho * A^(i) B^(j)) allowing i == j (operator product A*B on the site).
inline cplx site_pair_trace_general(const ComplexMatrix& rho, const PartyStructure& ps, int i,
                                    int j, const ComplexMatrix& a, const ComplexMatrix& b) {
    if (i != j) return site_pair_trace(rho, ps, i, j, a, b);
    return single_site_trace(rho, ps, i, a * b);
}

inline double ipow(double x, int k) {
    double out = 1.0;
    for (int i = 0; i < k; ++i) out *= x;
    return out;
}

}  // namespace detail

// First and second collective-spin moments of a fixed state:
// j_l = <J_l>, g_lm = Re <J_l J_m>. Together they give <J_u> and <J_u^2> for
// every direction u as quadratic forms, so a Monte Carlo sample costs O(1).
struct QuadraticForm {
    int n = 0;
    std::array<double, 3> j{};
    std::array<std::array<double, 3>, 3> g{};
};

inline QuadraticForm precompute_form(const DensityMatrix& rho) {
    if (rho.structure.local_dim != 2) throw OutOfRange("precompute_form: qubits only");
    const int n = rho.structure.n_parties;
    const auto& sigma = pauli_matrices();
    QuadraticForm form;
    form.n = n;
    for (int l = 0; l < 3; ++l) {
        cplx s = 0.0;
        for (int i = 0; i < n; ++i)
            s += detail::single_site_trace(rho.matrix, rho.structure, i, sigma[static_cast<std::size_t>(l)]);
        form.j[static_cast<std::size_t>(l)] = 0.5 * s.real();
    }
    for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
            cplx s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    s += detail::site_pair_trace_general(rho.matrix, rho.structure, i, k,
                                                         sigma[static_cast<std::size_t>(l)],
                                                         sigma[static_cast<std::size_t>(m)]);
            form.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] = 0.25 * s.real();
        }
    // Re g is symmetric for Hermitian rho; enforce it exactly.
    for (int l = 0; l < 3; ++l)
        for (int m = l + 1; m < 3; ++m) {
            const double avg = 0.5 * (form.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] +
                                      form.g[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)]);
            form.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] = avg;
            form.g[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] = avg;
        }
    return form;
}

inline double f_from_form(const QuadraticForm& form, const std::array<double, 3>& u,
                          const MomentSpec& spec) {
    double mean = 0.0, second = 0.0;
    for (int l = 0; l < 3; ++l) {
        mean += u[static_cast<std::size_t>(l)] * form.j[static_cast<std::size_t>(l)];
        for (int m = 0; m < 3; ++m)
            second += u[static_cast<std::size_t>(l)] * u[static_cast<std::size_t>(m)] *
                      form.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)];
    }
    return spec.alpha * (second - mean * mean) + spec.beta * mean * mean + spec.gamma;
}

inline double f_value(const DensityMatrix& rho, const std::array<double, 3>& u,
                      const MomentSpec& spec) {
    const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (std::abs(norm - 1.0) > 1e-10) throw BadDirection("f_value: |u| != 1");
    return f_from_form(precompute_form(rho), u, spec);
}

inline MomentEstimate moment_mc(const DensityMatrix& rho, const MomentSpec& spec,
                                std::size_t samples, std::uint64_t seed, SampleMode mode) {
    if (samples < 2) throw TooFewShots("moment_mc: need samples >= 2");
    std::vector<double> vals(samples);
    if (mode == SampleMode::direction) {
        const QuadraticForm form = precompute_form(rho);
        parallel_for(samples, [&](std::size_t i) {
            SplitMix64 rng = stream_rng(seed, i);
            vals[i] = detail::ipow(f_from_form(form, sample_sphere(rng), spec), spec.order);
        });
    } else {
        const int n = rho.structure.n_parties;
        const auto jz = cached_j(n, 2);
        parallel_for(samples, [&](std::size_t i) {
            SplitMix64 rng = stream_rng(seed, i);
            const ComplexMatrix u = sample_haar_su2(rng);
            ComplexMatrix un = u;
            for (int q = 1; q < n; ++q) un = kron(un, u);
            const ComplexMatrix jrot = un.dagger() * jz->matrix * un;
            const double e1 = trace_product(rho.matrix, jrot).real();
            const double e2 = trace_product(rho.matrix * jrot, jrot).real();
            vals[i] = detail::ipow(
                spec.alpha * (e2 - e1 * e1) + spec.beta * e1 * e1 + spec.gamma, spec.order);
        });
    }
    const double mean = pairwise_sum(vals) / static_cast<double>(samples);
    std::vector<double> dev(samples);
    for (std::size_t i = 0; i < samples; ++i) dev[i] = (vals[i] - mean) * (vals[i] - mean);
    const double var = pairwise_sum(dev) / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples, mode};
}

// Sphere moments of the rotated operator components O_U^(i) = 2 u_i:
// arity 2 -> (4/3) delta; arity 4 -> (16/15) (3 pairings); arity 6 ->
// (64/105) (15 pairings).
inline double haar_integral_identities(const std::vector<int>& indices) {
    const std::size_t k = indices.size();
    if (k != 2 && k != 4 && k != 6) throw BadArity("haar_integral_identities: arity 2, 4 or 6");
    for (int i : indices)
        if (i < 0 || i > 2) throw BadArity("haar_integral_identities: index in {x,y,z}");
    // Sum of delta-products over all perfect matchings of the index list.
    std::vector<int> idx(indices.begin(), indices.end());
    std::vector<bool> used(k, false);
    double pairings = 0.0;
    auto rec = [&](auto&& self) -> void {
        std::size_t first = k;
        for (std::size_t i = 0; i < k; ++i)
            if (!used[i]) {
                first = i;
                break;
            }
        if (first == k) {
            pairings += 1.0;
            return;
        }
        used[first] = true;
        for (std::size_t j = first + 1; j < k; ++j) {
            if (used[j] || idx[first] != idx[j]) continue;
            used[j] = true;
            self(self);
            used[j] = false;
        }
        used[first] = false;
    };
    rec(rec);
    const double prefactor = k == 2 ? 4.0 / 3.0 : (k == 4 ? 16.0 / 15.0 : 64.0 / 105.0);
    return prefactor * pairings;
}

// Sum of the three collective-spin variances (rotationally invariant).
inline double j1_closed_form(const DensityMatrix& rho) {
    const QuadraticForm form = precompute_form(rho);
    double out = 0.0;
    for (int l = 0; l < 3; ++l)
        out += form.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)] -
               form.j[static_cast<std::size_t>(l)] * form.j[static_cast<std::size_t>(l)];
    return out;
}

// Qudit analogue: sum over the d^2-1 collective Gell-Mann variances.
inline double d_closed_form(const DensityMatrix& rho, int d) {
    if (rho.structure.local_dim != d) throw OutOfRange("d_closed_form: local_dim mismatch");
    if (rho.dim() > 4096) throw OutOfRange("d_closed_form: d^N > 4096");
    const int n = rho.structure.n_parties;
    const auto& basis = gell_mann(d);
    double out = 0.0;
    for (const auto& lam : basis) {
        cplx first = 0.0, second = 0.0;
        for (int i = 0; i < n; ++i) {
            first += detail::single_site_trace(rho.matrix, rho.structure, i, lam);
            for (int j = 0; j < n; ++j)
                second += detail::site_pair_trace_general(rho.matrix, rho.structure, i, j, lam, lam);
        }
        const double dd = static_cast<double>(d);
        const double mean = first.real() / dd;
        out += second.real() / (dd * dd) - mean * mean;
    }
    return out;
}

// Monte Carlo companion of d_closed_form: each sample Haar-rotates one
// traceless basis element and measures its collective variance; because the
// adjoint representation is irreducible, (d^2-1) * E_U[Var(Lambda_1^U)]
// equals the full variance sum.
inline MomentEstimate d_moment_mc(const DensityMatrix& rho, int d, std::size_t samples,
                                  std::uint64_t seed) {
    if (samples < 2) throw TooFewShots("d_moment_mc: need samples >= 2");
    if (rho.structure.local_dim != d) throw OutOfRange("d_moment_mc: local_dim mismatch");
    if (rho.dim() > 4096) throw OutOfRange("d_moment_mc: d^N > 4096");
    const int n = rho.structure.n_parties;
    const ComplexMatrix& lam1 = gell_mann(d)[0];
    const double dd = static_cast<double>(d);
    std::vector<double> vals(samples);
    parallel_for(samples, [&](std::size_t i) {
        SplitMix64 rng = stream_rng(seed, i);
        const ComplexMatrix u = sample_haar_unitary(rng, static_cast<std::size_t>(d));
        const ComplexMatrix a = u.dagger() * lam1 * u;
        cplx first = 0.0, second = 0.0;
        for (int p = 0; p < n; ++p) {
            first += detail::single_site_trace(rho.matrix, rho.structure, p, a);
            for (int q = 0; q < n; ++q)
                second += detail::site_pair_trace_general(rho.matrix, rho.structure, p, q, a, a);
        }
        const double mean = first.real() / dd;
        vals[i] = (dd * dd - 1.0) * (second.real() / (dd * dd) - mean * mean);
    });
    const double mean = pairwise_sum(vals) / static_cast<double>(samples);
    std::vector<double> dev(samples);
    for (std::size_t i = 0; i < samples; ++i) dev[i] = (vals[i] - mean) * (vals[i] - mean);
    const double var = pairwise_sum(dev) / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples, SampleMode::unitary};
}

// <O_A> -- the rotation-invariant antisymmetric three-body correlation.
inline double t_average(const DensityMatrix& rho) {
    if (rho.structure.local_dim != 2 || rho.structure.n_parties < 3)
        throw OutOfRange("t_average: need N >= 3 qubits");
    const auto oa = build_o_a(rho.structure.n_parties);
    return trace_product(rho.matrix, oa->matrix).real();
}

// Covariance data of a two-qubit state (party 0 -> a, party 1 -> b).
inline CovarianceMatrix pair_covariance(const DensityMatrix& pair) {
    if (pair.structure.n_parties != 2 || pair.structure.local_dim != 2)
        throw ShapeMismatch("pair_covariance: need a two-qubit state");
    const auto& sigma = pauli_matrices();
    CovarianceMatrix cov;
    for (int i = 0; i < 3; ++i) {
        cov.a[static_cast<std::size_t>(i)] =
            detail::single_site_trace(pair.matrix, pair.structure, 0, sigma[static_cast<std::size_t>(i)]).real();
        cov.b[static_cast<std::size_t>(i)] =
            detail::single_site_trace(pair.matrix, pair.structure, 1, sigma[static_cast<std::size_t>(i)]).real();
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cov.t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                detail::site_pair_trace(pair.matrix, pair.structure, 0, 1,
                                        sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(j)])
                    .real();
            cov.c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                cov.t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                cov.a[static_cast<std::size_t>(i)] * cov.b[static_cast<std::size_t>(j)];
        }
    double asym = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            asym = std::max(asym, std::abs(cov.c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                           cov.c[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
    cov.symmetric = asym <= 1e-10;
    return cov;
}

// First three direction-averaged moments of the pair covariance form:
// m1 = trC/3, m2 = [(trC)^2 + 2 trC^2]/15,
// m3 = {trC [(trC)^2 + 6 trC^2] + 8 trC^3}/105.
inline std::array<double, 3> obs1_moments(const DensityMatrix& rho) {
    if (!is_permutationally_symmetric(rho))
        throw NotSymmetric("obs1_moments: state must be permutationally symmetric");
    std::vector<int> keep{0, 1};
    const DensityMatrix pair =
        rho.structure.n_parties == 2 ? rho : partial_trace(rho, keep);
    const CovarianceMatrix cov = pair_covariance(pair);
    const double t1 = cov.trace(), t2 = cov.trace_sq(), t3 = cov.trace_cu();
    return {t1 / 3.0, (t1 * t1 + 2.0 * t2) / 15.0, (t1 * (t1 * t1 + 6.0 * t2) + 8.0 * t3) / 105.0};
}

// Two-ensemble second-moment witness combination. All three routes are
// exposed; `value` is the one the separability bound of the two-ensemble
// criterion is stated for.
struct TwoEnsembleBreakdown {
    double value = 0.0;            // g2 + jA + jB - jA*jB with g2 from the J^+/J^- variance differences
    double eta_dense = 0.0;        // same, via dense variances of J_l^+/J_l^- on the joint state
    double eta_from_pairs = 0.0;   // same, assembled from two-site reduced data
    double pair_covariance_sum = 0.0;  // sum_pq C_pq^2 + sum_p (a_p^2+b_p^2) - sum_pq a_p^2 b_q^2
    std::array<std::array<double, 3>, 3> eta{};  // eta_pq = Var J_p^+ - Var J_q^-
};

inline TwoEnsembleBreakdown two_ensemble_breakdown(const DensityMatrix& rho_ab, int n) {
    if (rho_ab.structure.local_dim != 2 || rho_ab.structure.n_parties != 2 * n || 2 * n > 12)
        throw OutOfRange("two_ensemble_lhs: need 2N qubits with 2N <= 12");
    std::vector<int> keep_a(static_cast<std::size_t>(n)), keep_b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        keep_a[static_cast<std::size_t>(i)] = i;
        keep_b[static_cast<std::size_t>(i)] = n + i;
    }
    const DensityMatrix rho_a = partial_trace(rho_ab, keep_a);
    const DensityMatrix rho_b = partial_trace(rho_ab, keep_b);
    // Permutation invariance (swap conjugation) is the property the reduced-
    // data route actually relies on; the strict symmetric-subspace condition
    // would reject white-noise admixtures of symmetric states, which the
    // depolarized-threshold analysis needs to evaluate.
    if (!is_permutation_invariant(rho_a) || !is_permutation_invariant(rho_b))
        throw NotSymmetric("two_ensemble_lhs: marginals must be permutation invariant");

    const double nn = static_cast<double>(n);
    const QuadraticForm fa = precompute_form(rho_a), fb = precompute_form(rho_b);
    auto j_sq_sum = [](const QuadraticForm& f) {
        return f.j[0] * f.j[0] + f.j[1] * f.j[1] + f.j[2] * f.j[2];
    };
    const double ja = 4.0 / (nn * nn) * j_sq_sum(fa);
    const double jb = 4.0 / (nn * nn) * j_sq_sum(fb);

    // Dense route: variances of the six J_l^{+/-} on the joint state.
    std::array<double, 3> var_plus{}, var_minus{};
    for (int axis = 0; axis < 3; ++axis) {
        for (bool plus : {true, false}) {
            const auto op = two_ensemble_j(n, axis, plus);
            const double e1 = trace_product(rho_ab.matrix, op->matrix).real();
            const double e2 = trace_product(rho_ab.matrix * op->matrix, op->matrix).real();
            (plus ? var_plus : var_minus)[static_cast<std::size_t>(axis)] = e2 - e1 * e1;
        }
    }
    TwoEnsembleBreakdown out;
    double eta_sq = 0.0;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            const double e = var_plus[static_cast<std::size_t>(p)] - var_minus[static_cast<std::size_t>(q)];
            out.eta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = e;
            eta_sq += e * e;
        }
    out.eta_dense = eta_sq / (nn * nn * nn * nn) + ja + jb - ja * jb;

    // Reduced-data route: the same eta matrix assembled from the cross pair
    // (first site of A, first site of B) plus within-ensemble pair data.
    std::vector<int> cross{0, n};
    const CovarianceMatrix cc = pair_covariance(partial_trace(rho_ab, cross));
    if (n >= 2) {
        // Spot-check that other cross pairs carry the same covariance data.
        for (const auto& other : {std::vector<int>{1, n + 1}, std::vector<int>{0, n + 1}}) {
            const CovarianceMatrix oc = pair_covariance(partial_trace(rho_ab, other));
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                    if (std::abs(oc.c[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] -
                                 cc.c[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]) > 1e-9)
                        throw NotSymmetric("two_ensemble_lhs: cross pairs disagree");
        }
    }
    auto ensemble_var = [&](const DensityMatrix& marg, const std::array<double, 3>& bloch,
                            int axis) {
        // Var(J_l) = N/4 + N(N-1)/4 t_ll - (N a_l / 2)^2 from symmetric pair data.
        double tll = 0.0;
        if (n >= 2) {
            std::vector<int> first_pair{0, 1};
            const DensityMatrix pair = marg.structure.n_parties == 2 ? marg : partial_trace(marg, first_pair);
            const auto& sigma = pauli_matrices();
            tll = detail::site_pair_trace(pair.matrix, pair.structure, 0, 1,
                                          sigma[static_cast<std::size_t>(axis)],
                                          sigma[static_cast<std::size_t>(axis)])
                      .real();
        }
        const double al = bloch[static_cast<std::size_t>(axis)];
        return nn / 4.0 + nn * (nn - 1.0) / 4.0 * tll - (nn * al / 2.0) * (nn * al / 2.0);
    };
    std::array<double, 3> bloch_a{}, bloch_b{};
    {
        const auto& sigma = pauli_matrices();
        for (int l = 0; l < 3; ++l) {
            bloch_a[static_cast<std::size_t>(l)] =
                detail::single_site_trace(rho_a.matrix, rho_a.structure, 0, sigma[static_cast<std::size_t>(l)]).real();
            bloch_b[static_cast<std::size_t>(l)] =
                detail::single_site_trace(rho_b.matrix, rho_b.structure, 0, sigma[static_cast<std::size_t>(l)]).real();
        }
    }
    std::array<double, 3> vp2{}, vm2{};
    for (int axis = 0; axis < 3; ++axis) {
        const double va = ensemble_var(rho_a, bloch_a, axis);
        const double vb = ensemble_var(rho_b, bloch_b, axis);
        const double cov_ab = (nn * nn / 4.0) * cc.c[static_cast<std::size_t>(axis)][static_cast<std::size_t>(axis)];
        vp2[static_cast<std::size_t>(axis)] = va + vb + 2.0 * cov_ab;
        vm2[static_cast<std::size_t>(axis)] = va + vb - 2.0 * cov_ab;
    }
    double eta_sq2 = 0.0;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            const double e = vp2[static_cast<std::size_t>(p)] - vm2[static_cast<std::size_t>(q)];
            eta_sq2 += e * e;
        }
    out.eta_from_pairs = eta_sq2 / (nn * nn * nn * nn) + ja + jb - ja * jb;

    if (std::abs(out.eta_dense - out.eta_from_pairs) > 1e-9)
        throw NotSymmetric(
            "two_ensemble_lhs: reduced-data route disagrees with dense route; the state lacks "
            "uniform exchange symmetry across pairs");
    out.value = out.eta_dense;

    // Diagnostic: the plain covariance-square sum over the cross pair.
    double c_sq = 0.0, a_sq = 0.0, b_sq = 0.0;
    for (int p = 0; p < 3; ++p) {
        a_sq += cc.a[static_cast<std::size_t>(p)] * cc.a[static_cast<std::size_t>(p)];
        b_sq += cc.b[static_cast<std::size_t>(p)] * cc.b[static_cast<std::size_t>(p)];
        for (int q = 0; q < 3; ++q)
            c_sq += cc.c[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] *
                    cc.c[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
    }
    out.pair_covariance_sum = c_sq + a_sq + b_sq - a_sq * b_sq;
    return out;
}

inline double two_ensemble_lhs(const DensityMatrix& rho_ab, int n) {
    return two_ensemble_breakdown(rho_ab, n).value;
}

enum class SphericalDesign { octahedron, icosahedron };

inline const std::vector<std::array<double, 3>>& design_points(SphericalDesign d) {
    static const std::vector<std::array<double, 3>> oct = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    static const std::vector<std::array<double, 3>> ico = [] {
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const double s = 1.0 / std::sqrt(1.0 + phi * phi);
        std::vector<std::array<double, 3>> pts;
        for (double u : {1.0, -1.0})
            for (double v : {phi, -phi}) {
                pts.push_back({u * s, v * s, 0.0});
                pts.push_back({0.0, u * s, v * s});
                pts.push_back({v * s, 0.0, u * s});
            }
        return pts;
    }();
    return d == SphericalDesign::octahedron ? oct : ico;
}

inline int design_strength(SphericalDesign d) {
    return d == SphericalDesign::octahedron ? 3 : 5;
}

// Exact finite-point quadrature of the r-th moment; the integrand [f]^r has
// polynomial degree 2r in u, so the design strength must be >= 2r.
inline double design_quadrature_moment(const DensityMatrix& rho, const MomentSpec& spec, int r,
                                       SphericalDesign design) {
    if (r < 1) throw OutOfRange("design_quadrature_moment: r >= 1");
    if (design_strength(design) < 2 * r)
        throw InsufficientDesignStrength("design_quadrature_moment: design strength < 2r");
    const QuadraticForm form = precompute_form(rho);
    const auto& pts = design_points(design);
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        vals[i] = detail::ipow(f_from_form(form, pts[i], spec), r);
    return pairwise_sum(vals) / static_cast<double>(pts.size());
}

}  // namespace spinmoments
