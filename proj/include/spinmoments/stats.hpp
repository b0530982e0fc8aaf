#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "spinmoments/collective.hpp"
#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/rng.hpp"
#include "spinmoments/states.hpp"

namespace spinmoments {

struct ShotBatch {
    std::array<double, 3> direction{0.0, 0.0, 1.0};
    std::vector<double> outcomes;  // J_u eigenvalues, each (N - 2k)/2
};

struct MeasurementBudget {
    int n = 0;
    double gamma_cl = 0.0;
    double p = std::numeric_limits<double>::quiet_NaN();
    int k = 0;            // shots per setting
    std::uint64_t m = 0;  // settings
    std::uint64_t m_tot = 0;
    double delta_error = 0.0;
};

namespace detail {

// In-place rho <- (V^(site)) rho (V^(site))^dagger for a 2x2 unitary V.
inline void conjugate_single_site(ComplexMatrix& rho, const PartyStructure& ps, int site,
                                  const std::array<std::array<cplx, 2>, 2>& v) {
    const std::size_t dim = ps.dim();
    const std::size_t bit = std::size_t{1} << (ps.n_parties - 1 - site);
    for (std::size_t r = 0; r < dim; ++r) {
        if (r & bit) continue;
        for (std::size_t c = 0; c < dim; ++c) {
            const cplx a = rho(r, c), b = rho(r | bit, c);
            rho(r, c) = v[0][0] * a + v[0][1] * b;
            rho(r | bit, c) = v[1][0] * a + v[1][1] * b;
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        if (c & bit) continue;
        for (std::size_t r = 0; r < dim; ++r) {
            const cplx a = rho(r, c), b = rho(r, c | bit);
            rho(r, c) = a * std::conj(v[0][0]) + b * std::conj(v[0][1]);
            rho(r, c | bit) = a * std::conj(v[1][0]) + b * std::conj(v[1][1]);
        }
    }
}

// Single-qubit unitary V with V (u . sigma) V^dagger = sigma_z.
inline std::array<std::array<cplx, 2>, 2> rotation_to_z(const std::array<double, 3>& u) {
    std::array<double, 3> axis{0.0, 1.0, 0.0};
    double theta;
    const double uz = std::clamp(u[2], -1.0, 1.0);
    if (uz > 1.0 - 1e-14) {
        theta = 0.0;
        axis = {1.0, 0.0, 0.0};
    } else if (uz < -1.0 + 1e-14) {
        theta = std::acos(-1.0);
        axis = {1.0, 0.0, 0.0};
    } else {
        // axis = u x z, angle = angle(u, z)
        axis = {u[1], -u[0], 0.0};
        const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1]);
        axis[0] /= n;
        axis[1] /= n;
        theta = std::acos(uz);
    }
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    // V = cos(t/2) I - i sin(t/2) (axis . sigma)
    return {std::array<cplx, 2>{cplx(c, -s * axis[2]), cplx(-s * axis[1], -s * axis[0])},
            std::array<cplx, 2>{cplx(s * axis[1], -s * axis[0]), cplx(c, s * axis[2])}};
}

}  // namespace detail

// Exact outcome distribution of the J_u eigenvalues (N - 2k)/2.
inline std::vector<double> outcome_distribution(const DensityMatrix& rho,
                                                const std::array<double, 3>& u) {
    if (rho.structure.local_dim != 2) throw OutOfRange("outcome_distribution: qubits only");
    const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (std::abs(norm - 1.0) > 1e-10) throw BadDirection("outcome_distribution: |u| != 1");
    const int n = rho.structure.n_parties;
    ComplexMatrix rotated = rho.matrix;
    const auto v = detail::rotation_to_z(u);
    for (int site = 0; site < n; ++site)
        detail::conjugate_single_site(rotated, rho.structure, site, v);
    std::vector<double> probs(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::size_t b = 0; b < rho.dim(); ++b)
        probs[static_cast<std::size_t>(detail::popcount(b))] += rotated(b, b).real();
    double total = 0.0;
    for (double& p : probs) {
        p = std::max(0.0, p);
        total += p;
    }
    for (double& p : probs) p /= total;
    return probs;
}

inline ShotBatch simulate_shots(const DensityMatrix& rho, const std::array<double, 3>& u,
                                std::size_t k, std::uint64_t seed) {
    if (k < 1) throw TooFewShots("simulate_shots: need K >= 1");
    const int n = rho.structure.n_parties;
    const std::vector<double> probs = outcome_distribution(rho, u);
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cum[i] = acc;
    }
    cum.back() = 1.0;
    ShotBatch batch;
    batch.direction = u;
    batch.outcomes.resize(k);
    SplitMix64 rng = stream_rng(seed, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const double x = rng.uniform();
        std::size_t idx = 0;
        while (idx + 1 < cum.size() && x > cum[idx]) ++idx;
        batch.outcomes[i] = (n - 2.0 * static_cast<double>(idx)) / 2.0;
    }
    return batch;
}

// Unbiased single-setting estimator of 3 Var(J_u): three times the
// Bessel-corrected sample variance.
inline double unbiased_f1(const ShotBatch& batch) {
    const std::size_t k = batch.outcomes.size();
    if (k < 2) throw TooFewShots("unbiased_f1: need K >= 2");
    double mean = 0.0;
    for (double x : batch.outcomes) mean += x;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double x : batch.outcomes) ss += (x - mean) * (x - mean);
    return 3.0 * ss / static_cast<double>(k - 1);
}

// Coefficients of the exact second-moment expansion of the estimator.
inline std::array<double, 5> c_coeffs(int k) {
    if (k < 2) throw TooFewShots("c_coeffs: need K >= 2");
    const double kk = static_cast<double>(k);
    const double k1 = kk * (kk - 1.0);
    return {1.0 / kk, -4.0 / kk, ((kk - 1.0) * (kk - 1.0) + 2.0) / k1,
            -2.0 * (kk - 2.0) * (kk - 3.0) / k1, (kk - 2.0) * (kk - 3.0) / k1};
}

// E[(f1~)^2] = 9 { c1 <J^4> + c2 <J^3><J> + c3 <J^2>^2 + c4 <J^2><J>^2 + c5 <J>^4 }.
inline double expected_f1_squared(const DensityMatrix& rho, const std::array<double, 3>& u,
                                  int k) {
    const auto c = c_coeffs(k);
    const CollectiveOperator ju = collective_j(rho.structure.n_parties, u);
    ComplexMatrix power = rho.matrix * ju.matrix;
    const double e1 = power.trace().real();
    const double e2 = trace_product(power, ju.matrix).real();
    power = power * ju.matrix;
    const double e3 = trace_product(power, ju.matrix).real();
    power = power * ju.matrix;
    const double e4 = trace_product(power, ju.matrix).real();
    return 9.0 * (c[0] * e4 + c[1] * e3 * e1 + c[2] * e2 * e2 + c[3] * e2 * e1 * e1 +
                  c[4] * e1 * e1 * e1 * e1);
}

// Estimator variance for the depolarized singlet family:
// 9 N p {3N(p-1) + 2 - K[N(p-3) + 2]} / (16 (K-1) K M).
inline double estimator_variance_rho_p(int n, double p, int k, std::uint64_t m) {
    if (k < 2) throw TooFewShots("estimator_variance_rho_p: need K >= 2");
    if (m < 1) throw OutOfRange("estimator_variance_rho_p: need M >= 1");
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    return 9.0 * nn * p * (3.0 * nn * (p - 1.0) + 2.0 - kk * (nn * (p - 3.0) + 2.0)) /
           (16.0 * (kk - 1.0) * kk * static_cast<double>(m));
}

// Number of settings M needed for one-sided confidence gamma_cl at error
// delta, by the Chebyshev-Cantelli inequality at the worst case p = 1.
inline MeasurementBudget budget(int n, double gamma_cl, int k, double delta_error) {
    if (k < 2) throw TooFewShots("budget: need K >= 2");
    if (!(gamma_cl > 0.0 && gamma_cl < 1.0)) throw OutOfRange("budget: gamma_cl in (0,1)");
    if (!(delta_error > 0.0)) throw OutOfRange("budget: delta_error > 0");
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    const double m_cont = 9.0 * gamma_cl * nn * (kk * (nn - 1.0) + 1.0) /
                          (8.0 * (1.0 - gamma_cl) * (kk - 1.0) * kk * delta_error * delta_error);
    MeasurementBudget b;
    b.n = n;
    b.gamma_cl = gamma_cl;
    b.k = k;
    b.m = static_cast<std::uint64_t>(std::ceil(m_cont - 1e-12));
    b.m_tot = b.m * static_cast<std::uint64_t>(k);
    b.delta_error = delta_error;
    return b;
}

struct BudgetCurve {
    std::vector<MeasurementBudget> rows;
    std::vector<double> m_tot_continuous;  // before rounding M up; monotone in K
    std::size_t argmin_index = 0;
    double asymptote = 0.0;  // 9 gamma N (N-1) / (8 (1-gamma) delta^2)
    double delta_error = 0.0;
};

// Budget over a K range for the depolarized singlet at noise p, with error
// margin delta = N/2 - 3Np/4 (the distance to the separability bound).
inline BudgetCurve budget_curve(int n, double gamma_cl, double p, int k_min, int k_max) {
    if (!(p >= 0.0 && p < 2.0 / 3.0)) throw OutOfRange("budget_curve: need 0 <= p < 2/3");
    if (k_min < 2 || k_max < k_min) throw OutOfRange("budget_curve: need 2 <= k_min <= k_max");
    const double nn = static_cast<double>(n);
    const double delta = nn / 2.0 - 3.0 * nn * p / 4.0;
    BudgetCurve curve;
    curve.delta_error = delta;
    curve.asymptote = 9.0 * gamma_cl * nn * (nn - 1.0) /
                      (8.0 * (1.0 - gamma_cl) * delta * delta);
    for (int k = k_min; k <= k_max; ++k) {
        MeasurementBudget b = budget(n, gamma_cl, k, delta);
        b.p = p;
        const double kk = static_cast<double>(k);
        curve.m_tot_continuous.push_back(9.0 * gamma_cl * nn * (kk * (nn - 1.0) + 1.0) /
                                         (8.0 * (1.0 - gamma_cl) * (kk - 1.0) * delta * delta));
        curve.rows.push_back(b);
        if (b.m_tot < curve.rows[curve.argmin_index].m_tot)
            curve.argmin_index = curve.rows.size() - 1;
    }
    return curve;
}

}  // namespace spinmoments
