#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "spinmoments/collective.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/parallel.hpp"
#include "spinmoments/rng.hpp"
#include "spinmoments/states.hpp"

namespace spinmoments {

struct OptimizationResult {
    double best_value = 0.0;
    BlochVectorSet best_angles;
    std::size_t restarts = 0;
    double converged_fraction = 0.0;
};

// Closed-form candidate for the fully separable maximum of <O_A>:
// N^2 cot(pi/N) / (3 sqrt(3)).
inline double conjectured_bound(int n) {
    if (n < 3) throw OutOfRange("conjectured_bound: need N >= 3");
    const double nn = static_cast<double>(n);
    return nn * nn / std::tan(std::numbers::pi / nn) / (3.0 * std::sqrt(3.0));
}

// Cone of Bloch vectors around the x axis at the magic angle
// (cos theta = 1/sqrt(3)), azimuths equally spaced; attains the closed form.
inline BlochVectorSet magic_cone_angles(int n) {
    if (n < 3) throw OutOfRange("magic_cone_angles: need N >= 3");
    const double theta = 2.0 * std::atan(std::sqrt(2.0 - std::sqrt(3.0)));
    BlochVectorSet set;
    for (int i = 0; i < n; ++i)
        set.angles.push_back({theta, 2.0 * std::numbers::pi * i / n});
    return set;
}

namespace detail {

inline std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline std::array<double, 3> normalize3(std::array<double, 3> v) {
    const double n = std::sqrt(dot3(v, v));
    for (double& x : v) x /= n;
    return v;
}

inline double triple_sum(const std::vector<std::array<double, 3>>& v) {
    const std::size_t n = v.size();
    double out = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::array<double, 3> bc_a = cross(v[a], v[b]);
            for (std::size_t c = b + 1; c < n; ++c) out += dot3(bc_a, v[c]);
        }
    return out;
}

inline std::vector<std::array<double, 3>> triple_sum_gradient(
    const std::vector<std::array<double, 3>>& v) {
    const std::size_t n = v.size();
    std::vector<std::array<double, 3>> g(n, {0.0, 0.0, 0.0});
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                const auto ga = cross(v[b], v[c]);
                const auto gb = cross(v[c], v[a]);
                const auto gc = cross(v[a], v[b]);
                for (int i = 0; i < 3; ++i) {
                    g[a][static_cast<std::size_t>(i)] += ga[static_cast<std::size_t>(i)];
                    g[b][static_cast<std::size_t>(i)] += gb[static_cast<std::size_t>(i)];
                    g[c][static_cast<std::size_t>(i)] += gc[static_cast<std::size_t>(i)];
                }
            }
    return g;
}

}  // namespace detail

// sum_{i<j<k} v_i . (v_j x v_k) over the Bloch vectors of a product state;
// equals t_average(product_state(bloch)).
inline double t_product_value(const BlochVectorSet& bloch) {
    if (bloch.size() < 3) throw OutOfRange("t_product_value: need N >= 3 vectors");
    std::vector<std::array<double, 3>> v(bloch.size());
    for (std::size_t i = 0; i < bloch.size(); ++i) v[i] = bloch.vec(i);
    return detail::triple_sum(v);
}

inline std::size_t default_restarts(int n) { return n <= 5 ? 200u : 500u; }

// Multi-start projected gradient ascent of the triple-product sum over the
// product of N unit spheres.
inline OptimizationResult optimize_fully_sep_bound(int n, std::size_t restarts,
                                                   std::uint64_t seed, double tol = 1e-10) {
    if (n < 3 || n > 8) throw OutOfRange("optimize_fully_sep_bound: need 3 <= N <= 8");
    if (restarts < 1) throw OutOfRange("optimize_fully_sep_bound: restarts >= 1");

    struct Outcome {
        double value = 0.0;
        std::vector<std::array<double, 3>> vecs;
        bool converged = false;
    };
    std::vector<Outcome> outcomes(restarts);

    parallel_for(restarts, [&](std::size_t r) {
        SplitMix64 rng = stream_rng(seed, r);
        std::vector<std::array<double, 3>> v(static_cast<std::size_t>(n));
        for (auto& vi : v) vi = sample_sphere(rng);
        bool converged = false;
        for (int iter = 0; iter < 2000; ++iter) {
            const auto g = detail::triple_sum_gradient(v);
            std::vector<std::array<double, 3>> tang(v.size());
            double gn2 = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double proj = detail::dot3(g[i], v[i]);
                for (int k = 0; k < 3; ++k)
                    tang[i][static_cast<std::size_t>(k)] =
                        g[i][static_cast<std::size_t>(k)] - proj * v[i][static_cast<std::size_t>(k)];
                gn2 += detail::dot3(tang[i], tang[i]);
            }
            if (std::sqrt(gn2) <= tol) {
                converged = true;
                break;
            }
            const double f0 = detail::triple_sum(v);
            double alpha = 0.1;
            bool accepted = false;
            while (alpha >= 1e-14) {
                std::vector<std::array<double, 3>> cand(v.size());
                for (std::size_t i = 0; i < v.size(); ++i) {
                    std::array<double, 3> step = v[i];
                    for (int k = 0; k < 3; ++k)
                        step[static_cast<std::size_t>(k)] += alpha * tang[i][static_cast<std::size_t>(k)];
                    cand[i] = detail::normalize3(step);
                }
                if (detail::triple_sum(cand) >= f0 + 1e-4 * alpha * gn2) {
                    v = std::move(cand);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;  // line search exhausted below the gradient tolerance scale
        }
        outcomes[r] = {detail::triple_sum(v), std::move(v), converged};
    });

    OptimizationResult res;
    res.restarts = restarts;
    std::size_t best = 0, n_conv = 0;
    for (std::size_t r = 0; r < restarts; ++r) {
        if (outcomes[r].converged) ++n_conv;
        if (outcomes[r].value > outcomes[best].value) best = r;  // ties keep the earliest restart
    }
    if (n_conv == 0) throw NoConvergence("optimize_fully_sep_bound: no restart converged");
    res.converged_fraction = static_cast<double>(n_conv) / static_cast<double>(restarts);
    res.best_value = outcomes[best].value;
    for (const auto& vi : outcomes[best].vecs) {
        const double theta = std::acos(std::clamp(vi[0], -1.0, 1.0));
        const double phi = std::atan2(vi[2], vi[1]);
        res.best_angles.angles.push_back({theta, phi});
    }
    return res;
}

namespace detail {

struct NelderMeadResult {
    std::vector<double> x;
    double fmin = 0.0;
    bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink
// 1/2). A zero initial step gives a point simplex, which is returned
// unconverged on purpose (degenerate-start probe).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, double h, int max_iter,
                                    double tol) {
    const std::size_t d = x0.size();
    if (h == 0.0) return {x0, f(x0), false};
    std::vector<std::vector<double>> simplex(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += h;
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);

    std::vector<std::size_t> order(d + 1);
    auto sort_order = [&] {
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        sort_order();
        if (fv[order[d]] - fv[order[0]] < tol)
            return {simplex[order[0]], fv[order[0]], true};

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(d);
        const std::size_t worst = order[d];
        auto at = [&](double coef) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k)
                p[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
            return p;
        };
        const auto refl = at(-1.0);
        const double fr = f(refl);
        if (fr < fv[order[0]]) {
            const auto exp_p = at(-2.0);
            const double fe = f(exp_p);
            if (fe < fr) {
                simplex[worst] = exp_p;
                fv[worst] = fe;
            } else {
                simplex[worst] = refl;
                fv[worst] = fr;
            }
        } else if (fr < fv[order[d - 1]]) {
            simplex[worst] = refl;
            fv[worst] = fr;
        } else {
            const auto con = at(fr < fv[worst] ? -0.5 : 0.5);
            const double fc = f(con);
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = con;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t k = 0; k < d; ++k)
                        simplex[order[i]][k] =
                            0.5 * (simplex[order[i]][k] + simplex[order[0]][k]);
                    fv[order[i]] = f(simplex[order[i]]);
                }
            }
        }
    }
    sort_order();
    return {simplex[order[0]], fv[order[0]], false};
}

// |<psi| O_A |psi>| for psi = (cos w |a0 b0> + e^{i chi} sin w |a1 b1>) (x) |c>.
// Params: (w, theta_a, phi_a, theta_b, phi_b, chi, theta_c, phi_c).
inline double bisep_objective(const std::vector<double>& p, const ComplexMatrix& oa) {
    auto frame = [](double theta, double phi) {
        const cplx e(std::cos(phi), std::sin(phi));
        const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
        return std::array<std::array<cplx, 2>, 2>{
            std::array<cplx, 2>{c, e * s},
            std::array<cplx, 2>{-std::conj(e) * s, c}};
    };
    const auto a = frame(p[1], p[2]);
    const auto b = frame(p[3], p[4]);
    const auto c = frame(p[6], p[7]);
    const cplx phase(std::cos(p[5]), std::sin(p[5]));
    const double cw = std::cos(p[0]), sw = std::sin(p[0]);
    std::array<cplx, 8> psi{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const cplx pair = cw * a[0][static_cast<std::size_t>(i)] * b[0][static_cast<std::size_t>(j)] +
                              phase * sw * a[1][static_cast<std::size_t>(i)] * b[1][static_cast<std::size_t>(j)];
            for (int k = 0; k < 2; ++k)
                psi[static_cast<std::size_t>((i << 2) | (j << 1) | k)] =
                    pair * c[0][static_cast<std::size_t>(k)];
        }
    cplx val = 0.0;
    for (std::size_t r = 0; r < 8; ++r) {
        if (psi[r] == cplx(0.0)) continue;
        for (std::size_t cc = 0; cc < 8; ++cc) val += std::conj(psi[r]) * oa(r, cc) * psi[cc];
    }
    return std::abs(val.real());
}

}  // namespace detail

// Maximize |<O_A>| over pure biseparable three-qubit states (entangled pair
// in Schmidt form times a single qubit). O_A is exchange-invariant, so one
// pair placement covers all three bipartitions.
inline OptimizationResult optimize_bisep_bound_3q(std::size_t restarts, std::uint64_t seed,
                                                  double tol = 1e-10) {
    if (restarts < 1) throw OutOfRange("optimize_bisep_bound_3q: restarts >= 1");
    const auto oa = build_o_a(3);
    auto objective = [&](const std::vector<double>& p) {
        return -detail::bisep_objective(p, oa->matrix);
    };

    struct Outcome {
        double value = 0.0;
        std::vector<double> params;
        bool converged = false;
    };
    std::vector<Outcome> outcomes(restarts);
    parallel_for(restarts, [&](std::size_t r) {
        std::vector<double> x0(8, 0.0);
        double h = 0.0;  // restart 0 probes the symmetric origin with a point simplex
        if (r > 0) {
            SplitMix64 rng = stream_rng(seed, r);
            for (double& x : x0) x = 2.0 * std::numbers::pi * rng.uniform();
            h = 0.25;
        }
        const auto nm = detail::nelder_mead(objective, x0, h, 4000, tol);
        outcomes[r] = {-nm.fmin, nm.x, nm.converged};
    });

    OptimizationResult res;
    res.restarts = restarts;
    std::size_t best = 0, n_conv = 0;
    for (std::size_t r = 0; r < restarts; ++r) {
        if (outcomes[r].converged) ++n_conv;
        if (outcomes[r].value > outcomes[best].value) best = r;
    }
    if (n_conv == 0) throw NoConvergence("optimize_bisep_bound_3q: no restart converged");
    res.converged_fraction = static_cast<double>(n_conv) / static_cast<double>(restarts);
    res.best_value = outcomes[best].value;
    const auto& p = outcomes[best].params;
    res.best_angles.angles = {{p[0], p[5]}, {p[1], p[2]}, {p[3], p[4]}, {p[6], p[7]}};
    return res;
}

}  // namespace spinmoments
