#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "helpers.hpp"
#include "spinmoments/collective.hpp"
#include "spinmoments/stats.hpp"
#include "spinmoments/states.hpp"

using namespace spinmoments;
using Catch::Approx;

namespace {

DensityMatrix noisy_singlet(int n, double p) { return depolarize(singlet_state(n, 1, 0), p); }

DensityMatrix maximally_mixed(int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0 / static_cast<double>(dim);
    return DensityMatrix{std::move(m), PartyStructure{n_qubits, 2}};
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// (mean, standard error of the mean).
std::array<double, 2> mean_se(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double n = static_cast<double>(xs.size());
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

// tr(rho J_u^k) for k = 1..4.
std::array<double, 4> ju_moments(const DensityMatrix& rho, const std::array<double, 3>& u) {
    const CollectiveOperator ju = collective_j(rho.structure.n_parties, u);
    std::array<double, 4> e{};
    ComplexMatrix power = rho.matrix;
    for (int k = 0; k < 4; ++k) {
        power = power * ju.matrix;
        e[static_cast<std::size_t>(k)] = power.trace().real();
    }
    return e;
}

// Chi-squared 0.999 quantile, 2 degrees of freedom.
constexpr double kChi2Df2 = 13.816;

}  // namespace

TEST_CASE("rotation_to_z maps u.sigma onto sigma_z") {
    SplitMix64 rng(0xf00dull);
    std::vector<std::array<double, 3>> dirs = {
        {0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    for (int i = 0; i < 5; ++i) dirs.push_back(sample_sphere(rng));
    const auto& sigma = pauli_matrices();
    for (const auto& u : dirs) {
        const auto v = detail::rotation_to_z(u);
        ComplexMatrix vm(2, 2);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) vm(r, c) = v[r][c];
        const ComplexMatrix usig =
            sigma[0] * cplx(u[0]) + sigma[1] * cplx(u[1]) + sigma[2] * cplx(u[2]);
        const ComplexMatrix out = vm * usig * vm.dagger();
        REQUIRE(out(0, 0).real() == Approx(1.0).margin(1e-12));
        REQUIRE(out(1, 1).real() == Approx(-1.0).margin(1e-12));
        REQUIRE(std::abs(out(0, 1)) <= 1e-12);
        REQUIRE(std::abs(out(1, 0)) <= 1e-12);
    }
}

TEST_CASE("outcome_distribution reference distributions") {
    BlochVectorSet up;
    up.angles.assign(3, {0.0, 0.0});  // all Bloch vectors along +x
    const DensityMatrix aligned = product_state(up).to_density();
    const auto along = outcome_distribution(aligned, {1.0, 0.0, 0.0});
    REQUIRE(along[0] == Approx(1.0).margin(1e-12));
    for (std::size_t k = 1; k < along.size(); ++k) REQUIRE(along[k] == Approx(0.0).margin(1e-12));

    // Measuring transverse to the polarization gives binomial weights.
    const auto transverse = outcome_distribution(aligned, {0.0, 0.0, 1.0});
    const double binom[4] = {1.0 / 8, 3.0 / 8, 3.0 / 8, 1.0 / 8};
    for (std::size_t k = 0; k <= 3; ++k)
        REQUIRE(transverse[k] == Approx(binom[k]).margin(1e-12));

    const auto mixed = outcome_distribution(maximally_mixed(2), {0.0, 0.0, 1.0});
    REQUIRE(mixed[0] == Approx(0.25).margin(1e-12));
    REQUIRE(mixed[1] == Approx(0.5).margin(1e-12));
    REQUIRE(mixed[2] == Approx(0.25).margin(1e-12));

    const DensityMatrix singlet2 = singlet_state(2, 1, 0);
    const auto sing = outcome_distribution(singlet2, {0.6, 0.0, 0.8});
    REQUIRE(sing[1] == Approx(1.0).margin(1e-12));  // outcome (N - 2k)/2 = 0

    REQUIRE_THROWS_AS(outcome_distribution(aligned, {0.0, 0.0, 0.9}), BadDirection);
    DensityMatrix qutrits{ComplexMatrix(9, 9), PartyStructure{2, 3}};
    for (std::size_t i = 0; i < 9; ++i) qutrits.matrix(i, i) = 1.0 / 9.0;
    REQUIRE_THROWS_AS(outcome_distribution(qutrits, {0.0, 0.0, 1.0}), OutOfRange);
}

TEST_CASE("simulate_shots: eigenstates, reproducibility, sampling checks") {
    BlochVectorSet zup;
    zup.angles.assign(3, {std::acos(-1.0) / 2, std::acos(-1.0) / 2});  // +z Bloch vectors
    const DensityMatrix aligned = product_state(zup).to_density();
    const ShotBatch top = simulate_shots(aligned, {0.0, 0.0, 1.0}, 50, 3);
    for (double x : top.outcomes) REQUIRE(x == Approx(1.5).margin(1e-12));
    REQUIRE(top.direction == std::array<double, 3>{0.0, 0.0, 1.0});

    const DensityMatrix singlet2 = singlet_state(2, 1, 0);
    const ShotBatch zero = simulate_shots(singlet2, {1.0, 0.0, 0.0}, 50, 4);
    for (double x : zero.outcomes) REQUIRE(x == 0.0);

    const ShotBatch a = simulate_shots(maximally_mixed(2), {0.0, 0.0, 1.0}, 100, 9);
    const ShotBatch b = simulate_shots(maximally_mixed(2), {0.0, 0.0, 1.0}, 100, 9);
    REQUIRE(a.outcomes == b.outcomes);

    REQUIRE_THROWS_AS(simulate_shots(singlet2, {1.0, 0.0, 0.0}, 0, 1), TooFewShots);

    // Empirical mean agrees with tr(rho J_u) at three sigma.
    SplitMix64 rng(0xabBAull);
    const DensityMatrix rho = testgen::random_symmetric_mixed(4, rng);
    const std::array<double, 3> u = sample_sphere(rng);
    const ShotBatch big = simulate_shots(rho, u, 4000, 17);
    const auto [m, se] = mean_se(big.outcomes);
    const double expect = ju_moments(rho, u)[0];
    REQUIRE(std::abs(m - expect) <= 3.0 * se + 1e-12);

    // Chi-squared goodness of fit on the maximally mixed pair.
    const ShotBatch counts = simulate_shots(maximally_mixed(2), {0.0, 0.0, 1.0}, 10000, 21);
    std::array<double, 3> observed{};
    for (double x : counts.outcomes) observed[static_cast<std::size_t>(1.0 - x + 0.5)] += 1.0;
    const std::array<double, 3> expected{2500.0, 5000.0, 2500.0};
    double chi2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    REQUIRE(chi2 < kChi2Df2);
}

TEST_CASE("unbiased_f1: hand values and unbiasedness") {
    ShotBatch constant;
    constant.outcomes.assign(5, 1.5);
    REQUIRE(unbiased_f1(constant) == Approx(0.0).margin(1e-14));

    ShotBatch pair;
    pair.outcomes = {-0.5, 0.5};
    REQUIRE(unbiased_f1(pair) == Approx(1.5).margin(1e-14));
    pair.outcomes = {1.0, -1.0};
    REQUIRE(unbiased_f1(pair) == Approx(6.0).margin(1e-14));

    ShotBatch single;
    single.outcomes = {0.5};
    REQUIRE_THROWS_AS(unbiased_f1(single), TooFewShots);

    // E[f1~] = 3 Var(J_u) over repeated K = 4 batches, ten random pairs.
    SplitMix64 rng(0x5eedull);
    for (int rep = 0; rep < 10; ++rep) {
        const DensityMatrix rho = testgen::random_symmetric_mixed(4, rng);
        const std::array<double, 3> u = sample_sphere(rng);
        const auto e = ju_moments(rho, u);
        const double target = 3.0 * (e[1] - e[0] * e[0]);
        std::vector<double> f1s;
        f1s.reserve(1500);
        for (std::uint64_t b = 0; b < 1500; ++b)
            f1s.push_back(unbiased_f1(simulate_shots(rho, u, 4, 1000 + b)));
        const auto [m, se] = mean_se(f1s);
        REQUIRE(std::abs(m - target) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("c_coeffs closed forms and limits") {
    const auto c2 = c_coeffs(2);
    REQUIRE(c2[0] == 0.5);
    REQUIRE(c2[1] == -2.0);
    REQUIRE(c2[2] == 1.5);
    REQUIRE(c2[3] == 0.0);
    REQUIRE(c2[4] == 0.0);

    const auto c3 = c_coeffs(3);
    REQUIRE(c3[0] == Approx(1.0 / 3).margin(1e-15));
    REQUIRE(c3[1] == Approx(-4.0 / 3).margin(1e-15));
    REQUIRE(c3[2] == Approx(1.0).margin(1e-15));
    REQUIRE(c3[3] == Approx(0.0).margin(1e-15));
    REQUIRE(c3[4] == Approx(0.0).margin(1e-15));

    const auto c4 = c_coeffs(4);
    REQUIRE(c4[2] == Approx(11.0 / 12).margin(1e-15));
    REQUIRE(c4[3] == Approx(-1.0 / 3).margin(1e-15));
    REQUIRE(c4[4] == Approx(1.0 / 6).margin(1e-15));

    const auto cinf = c_coeffs(1000000);
    const double limits[5] = {0.0, 0.0, 1.0, -2.0, 1.0};
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(cinf[i] == Approx(limits[i]).margin(1e-5));

    REQUIRE_THROWS_AS(c_coeffs(1), TooFewShots);
}

TEST_CASE("expected_f1_squared: singlet, simulation, large-K limit") {
    const DensityMatrix singlet4 = singlet_state(4, 1, 0);
    REQUIRE(expected_f1_squared(singlet4, {0.0, 1.0, 0.0}, 2) == Approx(0.0).margin(1e-10));

    // Simulated second moment of f1~ matches the closed form within 2%.
    const DensityMatrix rho = noisy_singlet(4, 0.5);
    const std::array<double, 3> u{0.0, 0.0, 1.0};
    const double closed = expected_f1_squared(rho, u, 4);
    const auto probs = outcome_distribution(rho, u);
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = (acc += probs[i]);
    SplitMix64 rng(0xd1ceull);
    double sum_sq = 0.0;
    const std::size_t batches = 100000;
    ShotBatch batch;
    batch.outcomes.resize(4);
    for (std::size_t b = 0; b < batches; ++b) {
        for (auto& x : batch.outcomes) {
            const double r = rng.uniform();
            std::size_t idx = 0;
            while (idx + 1 < cum.size() && r > cum[idx]) ++idx;
            x = (4.0 - 2.0 * static_cast<double>(idx)) / 2.0;
        }
        const double f1 = unbiased_f1(batch);
        sum_sq += f1 * f1;
    }
    const double simulated = sum_sq / static_cast<double>(batches);
    REQUIRE(std::abs(simulated - closed) <= 0.02 * closed);

    // K -> infinity: E[(f1~)^2] -> 9 Var(J_u)^2.
    SplitMix64 srng(0x7e57ull);
    const DensityMatrix sym = testgen::random_symmetric_mixed(3, srng);
    const auto e = ju_moments(sym, {0.0, 0.0, 1.0});
    const double var = e[1] - e[0] * e[0];
    const double big_k = expected_f1_squared(sym, {0.0, 0.0, 1.0}, 1000000);
    REQUIRE(big_k == Approx(9.0 * var * var).epsilon(1e-4));

    REQUIRE_THROWS_AS(expected_f1_squared(rho, u, 1), TooFewShots);
}

TEST_CASE("estimator_variance_rho_p closed form") {
    REQUIRE(estimator_variance_rho_p(4, 0.0, 2, 1) == Approx(0.0).margin(1e-14));
    REQUIRE(estimator_variance_rho_p(4, 1.0, 2, 1) == Approx(15.75).margin(1e-12));
    REQUIRE(estimator_variance_rho_p(4, 1.0, 2, 2) == Approx(15.75 / 2).margin(1e-12));
    REQUIRE_THROWS_AS(estimator_variance_rho_p(4, 1.0, 1, 1), TooFewShots);
    REQUIRE_THROWS_AS(estimator_variance_rho_p(4, 1.0, 2, 0), OutOfRange);

    // Monte Carlo cross-check at N=4, p=0.5, K=2, M=1 within five percent.
    const int n = 4;
    const double p = 0.5;
    const DensityMatrix rho = noisy_singlet(n, p);
    SplitMix64 rng(0xca15ull);
    std::vector<double> f1s;
    const std::size_t reps = 60000;
    f1s.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto u = sample_sphere(rng);
        f1s.push_back(unbiased_f1(simulate_shots(rho, u, 2, 40000 + r)));
    }
    const double m = mean_of(f1s);
    double var = 0.0;
    for (double x : f1s) var += (x - m) * (x - m);
    var /= static_cast<double>(reps - 1);
    const double closed = estimator_variance_rho_p(n, p, 2, 1);
    REQUIRE(std::abs(var - closed) <= 0.05 * closed);
}

TEST_CASE("budget: reference points, guards, scalings") {
    const MeasurementBudget b = budget(100, 0.95, 2, 50.0);
    REQUIRE(b.m == 86);
    REQUIRE(b.m_tot == 172);
    REQUIRE(b.n == 100);
    REQUIRE(b.k == 2);
    REQUIRE(b.gamma_cl == 0.95);
    REQUIRE(b.delta_error == 50.0);

    REQUIRE(budget(6, 0.95, 2, 3.0).m == 79);

    REQUIRE_THROWS_AS(budget(100, 0.95, 1, 50.0), TooFewShots);
    REQUIRE_THROWS_AS(budget(100, 0.0, 2, 50.0), OutOfRange);
    REQUIRE_THROWS_AS(budget(100, 1.0, 2, 50.0), OutOfRange);
    REQUIRE_THROWS_AS(budget(100, 0.95, 2, 0.0), OutOfRange);

    REQUIRE(budget(100, 0.99, 2, 50.0).m > b.m);

    // Halving delta quadruples M up to rounding slack.
    const std::uint64_t quarter = budget(100, 0.95, 2, 100.0).m;
    const std::uint64_t whole = budget(100, 0.95, 2, 50.0).m;
    REQUIRE(whole <= 4 * quarter);
    REQUIRE(whole >= 4 * quarter - 3);
}

TEST_CASE("budget_curve: monotone total, asymptote, bookkeeping") {
    const BudgetCurve curve = budget_curve(100, 0.95, 0.0, 2, 40);
    REQUIRE(curve.delta_error == Approx(50.0).margin(1e-12));
    REQUIRE(curve.asymptote == Approx(84.645).margin(1e-10));
    REQUIRE(curve.rows.size() == 39);
    REQUIRE(curve.m_tot_continuous.front() == Approx(170.145).margin(1e-9));

    for (std::size_t i = 0; i + 1 < curve.m_tot_continuous.size(); ++i)
        REQUIRE(curve.m_tot_continuous[i] > curve.m_tot_continuous[i + 1]);
    for (double v : curve.m_tot_continuous) REQUIRE(v > curve.asymptote);
    REQUIRE(curve.m_tot_continuous.back() - curve.asymptote < 2.5);

    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        const MeasurementBudget& row = curve.rows[i];
        REQUIRE(row.k == static_cast<int>(i) + 2);
        REQUIRE(row.p == 0.0);
        REQUIRE(row.m == budget(100, 0.95, row.k, 50.0).m);
        REQUIRE(row.m_tot == row.m * static_cast<std::uint64_t>(row.k));
        REQUIRE(curve.rows[curve.argmin_index].m_tot <= row.m_tot);
    }

    const BudgetCurve noisy = budget_curve(100, 0.95, 0.3, 2, 5);
    REQUIRE(noisy.delta_error == Approx(50.0 - 22.5).margin(1e-12));
    REQUIRE(noisy.rows[0].m > curve.rows[0].m);

    REQUIRE_THROWS_AS(budget_curve(100, 0.95, 0.7, 2, 10), OutOfRange);
    REQUIRE_THROWS_AS(budget_curve(100, 0.95, 2.0 / 3.0, 2, 10), OutOfRange);
    REQUIRE_THROWS_AS(budget_curve(100, 0.95, 0.0, 1, 10), OutOfRange);
    REQUIRE_THROWS_AS(budget_curve(100, 0.95, 0.0, 5, 4), OutOfRange);
}
