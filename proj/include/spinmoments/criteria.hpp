#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "spinmoments/collective.hpp"
#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/eig.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/moments.hpp"
#include "spinmoments/parallel.hpp"
#include "spinmoments/partial_ops.hpp"
#include "spinmoments/sepbound.hpp"
#include "spinmoments/states.hpp"

namespace spinmoments {

struct CriterionVerdict {
    std::string criterion;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // signed distance past the bound; violated <=> margin > tol
    bool violated = false;
    std::map<std::string, double> diagnostics;
};

// Attach statistical significance for verdicts built from Monte Carlo moments:
// z = margin / std_error, flagged significant at z >= 5.
inline void apply_statistics(CriterionVerdict& v, double std_error) {
    const double z = std_error > 0.0 ? v.margin / std_error : 0.0;
    v.diagnostics["std_error"] = std_error;
    v.diagnostics["z_score"] = z;
    v.diagnostics["statistically_violated"] = (v.violated && z >= 5.0) ? 1.0 : 0.0;
}

namespace detail {

struct CubicRoots {
    std::array<double, 3> roots{};
    bool projected = false;  // complex pair collapsed onto a real double root
};

// Roots of x^3 + p x + q. Exact symmetric covariance input always has three
// real roots, found by the trigonometric method. Statistical noise on a
// near-degenerate spectrum generically splits a double root into a complex
// pair with imaginary part ~ sqrt(noise); such a pair is projected back onto
// the real double root. An imaginary part with b^2 beyond tol signals
// genuinely inconsistent moments and raises ComplexRoots.
inline CubicRoots depressed_cubic_roots(double p, double q, double tol = 1e-9) {
    const double scale = std::max({1.0, std::abs(p), std::abs(q)});
    if (std::abs(p) <= 1e-9 * scale && std::abs(q) <= 1e-9 * scale)
        return {{0.0, 0.0, 0.0}, false};
    if (p < 0.0) {
        const double m = 3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p);
        if (std::abs(m) <= 1.0 + 1e-6) {
            const double theta = std::acos(std::clamp(m, -1.0, 1.0)) / 3.0;
            const double amp = 2.0 * std::sqrt(-p / 3.0);
            CubicRoots out;
            for (int k = 0; k < 3; ++k)
                out.roots[static_cast<std::size_t>(k)] =
                    amp * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
            return out;
        }
    }
    // One real root plus a complex pair (positive Cardano discriminant).
    const double d = q * q / 4.0 + p * p * p / 27.0;
    const double sd = std::sqrt(std::max(d, 0.0));
    const double r = std::cbrt(-q / 2.0 + sd) + std::cbrt(-q / 2.0 - sd);
    const double b_sq = 3.0 * r * r / 4.0 + p;  // squared imaginary part of the pair
    if (b_sq > std::max(tol, 1e-9) * scale)
        throw ComplexRoots("obs1_decide: cubic has complex roots beyond tolerance");
    return {{r, -r / 2.0, -r / 2.0}, true};
}

// Singular values of a real m x m matrix, descending, via eigenvalues of M^T M.
inline std::vector<double> singular_values(const std::vector<std::vector<double>>& m) {
    const std::size_t d = m.size();
    ComplexMatrix mtm(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += m[k][i] * m[k][j];
            mtm(i, j) = s;
        }
    const EigResult eig = hermitian_eig(mtm);
    std::vector<double> sv(d);
    for (std::size_t i = 0; i < d; ++i)
        sv[i] = std::sqrt(std::max(0.0, eig.values[d - 1 - i]));
    return sv;
}

}  // namespace detail

// Recover the covariance eigenvalues from the first three direction-averaged
// moments and decide spin-squeezing entanglement (negative eigenvalue).
inline CriterionVerdict obs1_decide(double m1, double m2, double m3, double tol = 1e-9) {
    const double t1 = 3.0 * m1;
    const double t2 = (15.0 * m2 - t1 * t1) / 2.0;
    const double t3 = (105.0 * m3 - t1 * (t1 * t1 + 6.0 * t2)) / 8.0;
    // Elementary symmetric functions of the eigenvalues.
    const double e1 = t1;
    const double e2 = (t1 * t1 - t2) / 2.0;
    const double e3 = (t1 * t1 * t1 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0;
    // lambda^3 - e1 lambda^2 + e2 lambda - e3 = 0, depressed by lambda = x + e1/3.
    const double p = e2 - e1 * e1 / 3.0;
    const double q = -2.0 * e1 * e1 * e1 / 27.0 + e1 * e2 / 3.0 - e3;
    const detail::CubicRoots solved = detail::depressed_cubic_roots(p, q, tol);
    std::array<double, 3> roots = solved.roots;
    for (double& r : roots) {
        r += e1 / 3.0;
        if (solved.projected) continue;  // polishing would leave the projection
        for (int it = 0; it < 3; ++it) {  // Newton polish on the monic cubic
            const double f = ((r - e1) * r + e2) * r - e3;
            const double fp = (3.0 * r - 2.0 * e1) * r + e2;
            if (std::abs(fp) < 1e-14) break;
            r -= f / fp;
        }
    }
    std::sort(roots.begin(), roots.end());

    CriterionVerdict v;
    v.criterion = "obs1";
    v.value = roots[0];
    v.bound = 0.0;
    v.margin = -roots[0];
    v.violated = v.margin > tol;
    v.diagnostics = {{"c1", roots[0]},   {"c2", roots[1]}, {"c3", roots[2]},
                     {"tr_c", t1},       {"tr_c2", t2},    {"tr_c3", t3},
                     {"tolerance", tol}, {"projected", solved.projected ? 1.0 : 0.0}};
    return v;
}

// Total-variance bound: sum_l Var(J_l) >= N/2 for fully separable states.
inline CriterionVerdict obs2_check(const DensityMatrix& rho, double tol = 1e-9) {
    CriterionVerdict v;
    v.criterion = "obs2";
    v.value = j1_closed_form(rho);
    v.bound = rho.structure.n_parties / 2.0;
    v.margin = v.bound - v.value;
    v.violated = v.margin > tol;
    v.diagnostics = {{"tolerance", tol}};
    return v;
}

// Qudit total-variance bound: sum_l Var(Lambda_l) >= N(d-1)/d.
inline CriterionVerdict obs2_qudit_check(const DensityMatrix& rho, int d, double tol = 1e-9) {
    CriterionVerdict v;
    v.criterion = "obs2-qudit";
    v.value = d_closed_form(rho, d);
    v.bound = rho.structure.n_parties * (d - 1.0) / d;
    v.margin = v.bound - v.value;
    v.violated = v.margin > tol;
    v.diagnostics = {{"tolerance", tol}, {"local_dim", static_cast<double>(d)}};
    return v;
}

// |<O_A>| against the fully separable bound N^2 cot(pi/N)/(3 sqrt 3); for
// N = 3 also reports the biseparable bound 2 and a GME flag.
inline CriterionVerdict obs3_check(const DensityMatrix& rho, double tol = 1e-9) {
    const double t = t_average(rho);
    CriterionVerdict v;
    v.criterion = "obs3";
    v.value = std::abs(t);
    v.bound = conjectured_bound(rho.structure.n_parties);
    v.margin = v.value - v.bound;
    v.violated = v.margin > tol;
    v.diagnostics = {{"t_signed", t}, {"tolerance", tol}};
    if (rho.structure.n_parties == 3) {
        v.diagnostics["bisep_bound"] = 2.0;
        v.diagnostics["gme"] = v.value > 2.0 + tol ? 1.0 : 0.0;
    }
    return v;
}

// Two-ensemble criterion: LHS <= 1 for states separable across A|B.
inline CriterionVerdict obs4_check(const DensityMatrix& rho_ab, int n, double tol = 1e-9) {
    const TwoEnsembleBreakdown b = two_ensemble_breakdown(rho_ab, n);
    CriterionVerdict v;
    v.criterion = "obs4";
    v.value = b.value;
    v.bound = 1.0;
    v.margin = v.value - 1.0;
    v.violated = v.margin > tol;
    v.diagnostics = {{"eta_dense", b.eta_dense},
                     {"eta_from_pairs", b.eta_from_pairs},
                     {"pair_covariance_sum", b.pair_covariance_sum},
                     {"tolerance", tol}};
    return v;
}

// Average of the pairwise two-ensemble LHS over all ensemble pairs; <= 1 for
// fully separable arrangements of m ensembles of N qubits each.
inline CriterionVerdict multi_ensemble_check(const DensityMatrix& rho, int m, int n,
                                             double tol = 1e-9) {
    if (m < 2 || n < 1 || m * n > 12 || rho.structure.n_parties != m * n)
        throw OutOfRange("multi_ensemble_check: need m >= 2 ensembles, m*N <= 12 qubits");
    double sum = 0.0;
    int pairs = 0;
    for (int x = 0; x < m; ++x)
        for (int y = x + 1; y < m; ++y) {
            std::vector<int> keep;
            for (int i = 0; i < n; ++i) keep.push_back(x * n + i);
            for (int i = 0; i < n; ++i) keep.push_back(y * n + i);
            sum += two_ensemble_lhs(partial_trace(rho, keep), n);
            ++pairs;
        }
    CriterionVerdict v;
    v.criterion = "multi-ensemble";
    v.value = sum / pairs;
    v.bound = 1.0;
    v.margin = v.value - 1.0;
    v.violated = v.margin > tol;
    v.diagnostics = {{"pairs", static_cast<double>(pairs)}, {"tolerance", tol}};
    return v;
}

struct PptReport {
    // Key: comma-joined indices of the lexicographically smaller side.
    std::map<std::string, double> min_eigenvalues;
    bool ppt_all = true;
    double threshold = -1e-9;
};

// Minimum eigenvalue of the partial transpose for every bipartition (one side
// listed, complements skipped; the listed side always contains party 0).
inline PptReport ppt_classify(const DensityMatrix& rho, double tol = 1e-9) {
    const int n = rho.structure.n_parties;
    if (n > 10) throw OutOfRange("ppt_classify: need N <= 10");
    PptReport report;
    report.threshold = -tol;
    if (n < 2) return report;
    const unsigned full = (1u << n) - 1u;
    for (unsigned mask = 1u; mask < full; mask += 2u) {  // odd masks contain party 0
        std::vector<int> side;
        std::string key;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                side.push_back(i);
                if (!key.empty()) key += ',';
                key += std::to_string(i);
            }
        const ComplexMatrix pt = partial_transpose(rho, side);
        const double mn = min_eigenvalue(pt);
        report.min_eigenvalues[key] = mn;
        if (mn < -tol) report.ppt_all = false;
    }
    return report;
}

struct LemmaBounds {
    double value = 0.0;
    double fs_bound = 0.0;
    double bisep_bound = 0.0;
};

// State-dependent Cauchy-Schwarz / trace-inequality bounds on <W_S> for a
// three-party state: fs_bound from the single-party expectation vectors,
// bisep_bound from singular values of the pair correlation matrix against the
// contracted tensor.
inline LemmaBounds lemma_bounds(const DensityMatrix& rho, const std::vector<double>& w,
                                const std::vector<ComplexMatrix>& s) {
    if (rho.structure.n_parties != 3) throw ShapeMismatch("lemma_bounds: need three parties");
    const std::size_t m = s.size();
    if (m == 0 || w.size() != m * m * m) throw ShapeMismatch("lemma_bounds: w must have size |s|^3");
    for (const auto& si : s)
        if (!si.is_square() || si.rows() != static_cast<std::size_t>(rho.structure.local_dim))
            throw ShapeMismatch("lemma_bounds: basis dimension mismatch");
    auto wat = [&](std::size_t i, std::size_t j, std::size_t k) { return w[(i * m + j) * m + k]; };

    LemmaBounds out;
    {
        const CollectiveOperator ws = build_w_s(w, s);
        out.value = trace_product(rho.matrix, ws.matrix).real();
    }

    // Single-party expectation vectors.
    std::array<std::vector<double>, 3> sv;
    for (int party = 0; party < 3; ++party) {
        sv[static_cast<std::size_t>(party)].resize(m);
        for (std::size_t i = 0; i < m; ++i)
            sv[static_cast<std::size_t>(party)][i] =
                detail::single_site_trace(rho.matrix, rho.structure, party, s[i]).real();
    }
    auto norm = [](const std::vector<double>& v) {
        double s2 = 0.0;
        for (double x : v) s2 += x * x;
        return std::sqrt(s2);
    };

    // Fully separable bound: max over which party is split off as the scalar.
    double fs = 0.0;
    for (int role = 0; role < 3; ++role) {
        const int y = role == 0 ? 1 : 0;
        const int z = role == 2 ? 1 : 2;
        std::vector<double> v(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < m; ++k) {
                    std::array<std::size_t, 3> idx{};
                    idx[static_cast<std::size_t>(role)] = i;
                    idx[static_cast<std::size_t>(y)] = j;
                    idx[static_cast<std::size_t>(z)] = k;
                    v[i] += wat(idx[0], idx[1], idx[2]) * sv[static_cast<std::size_t>(y)][j] *
                            sv[static_cast<std::size_t>(z)][k];
                }
        fs = std::max(fs, norm(sv[static_cast<std::size_t>(role)]) * norm(v));
    }
    out.fs_bound = fs;

    // Biseparable bound: max over the party kept alone.
    double bisep = 0.0;
    for (int alone = 0; alone < 3; ++alone) {
        const int y = alone == 0 ? 1 : 0;
        const int z = alone == 2 ? 1 : 2;
        std::vector<int> keep{y, z};
        std::sort(keep.begin(), keep.end());
        const DensityMatrix pair = partial_trace(rho, keep);
        std::vector<std::vector<double>> corr(m, std::vector<double>(m, 0.0));
        std::vector<std::vector<double>> zstar(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                corr[i][j] = detail::site_pair_trace(pair.matrix, pair.structure, 0, 1, s[i], s[j])
                                 .real();
                for (std::size_t k = 0; k < m; ++k) {
                    std::array<std::size_t, 3> idx{};
                    idx[static_cast<std::size_t>(alone)] = k;
                    idx[static_cast<std::size_t>(y)] = i;
                    idx[static_cast<std::size_t>(z)] = j;
                    zstar[i][j] += wat(idx[0], idx[1], idx[2]) * sv[static_cast<std::size_t>(alone)][k];
                }
            }
        const auto sc = detail::singular_values(corr);
        const auto sz = detail::singular_values(zstar);
        double b = 0.0;
        for (std::size_t i = 0; i < m; ++i) b += sc[i] * sz[i];
        bisep = std::max(bisep, b);
    }
    out.bisep_bound = bisep;
    return out;
}

struct DickeTwoEnsemble {
    double value = 0.0;   // two-ensemble LHS of the depolarized split Dicke state
    double p_star = 0.0;  // noise level where the LHS crosses 1
};

// Closed form for the split Dicke state |D_{2N,N}> mixed with white noise:
// LHS = (6N^4 - 2N^3 + 1) p^2 / ((1-2N)^2 N^2), critical point
// p* = N(2N-1)/sqrt(6N^4 - 2N^3 + 1) -> sqrt(2/3) as N grows.
inline DickeTwoEnsemble dicke_two_ensemble_analytic(int n, double p) {
    if (n < 1) throw OutOfRange("dicke_two_ensemble_analytic: need N >= 1");
    const double nn = static_cast<double>(n);
    const double num = 6.0 * nn * nn * nn * nn - 2.0 * nn * nn * nn + 1.0;
    const double den = (1.0 - 2.0 * nn) * (1.0 - 2.0 * nn) * nn * nn;
    return {num / den * p * p, nn * (2.0 * nn - 1.0) / std::sqrt(num)};
}

struct ScanRow {
    double x = 0.0;
    double y = 0.0;
    double t_abs = 0.0;
    double fs_bound = 0.0;
    double bisep_bound = 0.0;  // NaN for N != 3 (only proven there)
    bool ppt_all = false;
    std::string region;  // sep-undetected | detected | bound-entangled-detected
};

// Grid scan of the phased-Dicke noise family over feasible (x, y) with
// x + y <= 1; row-major in x then y.
inline std::vector<ScanRow> scan_mixed_family(int n, double step, double tol = 1e-9) {
    if (n < 3 || n > 6) throw OutOfRange("scan_mixed_family: need 3 <= N <= 6");
    if (!(step > 0.0)) throw OutOfRange("scan_mixed_family: step > 0");
    std::vector<std::pair<double, double>> grid;
    const int cells = static_cast<int>(std::floor(1.0 / step + 0.5));
    for (int ix = 0; ix <= cells; ++ix) {
        const double x = ix * step;
        if (x > 1.0 + 1e-12) break;
        for (int iy = 0; iy <= cells; ++iy) {
            const double y = iy * step;
            if (x + y > 1.0 + 1e-12) break;
            grid.emplace_back(x, y);
        }
    }
    const double fs = conjectured_bound(n);
    const double bisep = n == 3 ? 2.0 : std::nan("");
    std::vector<ScanRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto [x, y] = grid[i];
        const DensityMatrix rho = mixed_family(n, x, y);
        const double t = std::abs(t_average(rho));
        const bool ppt = ppt_classify(rho, tol).ppt_all;
        ScanRow row{x, y, t, fs, bisep, ppt, ""};
        if (t > fs + tol)
            row.region = ppt ? "bound-entangled-detected" : "detected";
        else
            row.region = "sep-undetected";
        rows[i] = std::move(row);
    });
    return rows;
}

}  // namespace spinmoments
