#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/errors.hpp"

namespace spinmoments {

struct EigResult {
    std::vector<double> values;   // ascending
    ComplexMatrix vectors;        // columns, same order as values
};

// Cyclic Jacobi eigensolver for Hermitian matrices. Each pivot (p,q) is
// annihilated by a complex rotation V = P(phase)*G(angle); sweeps stop when
// the off-diagonal Frobenius mass falls below 1e-12 relative to the input
// scale, with at most 100 sweeps. Full-spectrum work is capped at dim 1024.
inline EigResult hermitian_eig(const ComplexMatrix& h) {
    if (!h.is_square()) throw ShapeMismatch("hermitian_eig: square matrix required");
    const std::size_t n = h.rows();
    if (n > 1024) throw OutOfRange("hermitian_eig: dim > 1024");
    if (!h.is_hermitian(1e-10)) throw NonHermitianInput("hermitian_eig input");

    // Symmetrize to kill roundoff-level asymmetry before iterating.
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));

    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(1.0, a.frobenius_norm());
    const double pivot_floor = 1e-12 * scale / static_cast<double>(n);

    for (int sweep = 0; sweep < 100 && n > 1; ++sweep) {
        double off2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off2 += 2.0 * std::norm(a(i, j));
        if (std::sqrt(off2) <= 1e-12 * scale) break;

        for (std::size_t p = 0; p < n - 1; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double r = std::abs(apq);
                if (r <= pivot_floor) continue;
                const cplx phase = apq / r;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx se = s * std::conj(phase);  // s * e^{-i phi}

                // Columns, rows outside the pivot block. A <- V^dag A V keeps
                // Hermitian structure, so update columns and mirror.
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const cplx aip = a(i, p);
                    const cplx aiq = a(i, q);
                    a(i, p) = c * aip - se * aiq;
                    a(i, q) = s * aip + c * std::conj(phase) * aiq;
                    a(p, i) = std::conj(a(i, p));
                    a(q, i) = std::conj(a(i, q));
                }
                a(p, p) = c * c * app - 2.0 * c * s * r + s * s * aqq;
                a(q, q) = s * s * app + 2.0 * c * s * r + c * c * aqq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;

                for (std::size_t i = 0; i < n; ++i) {
                    const cplx vip = v(i, p);
                    const cplx viq = v(i, q);
                    v(i, p) = c * vip - se * viq;
                    v(i, q) = s * vip + c * std::conj(phase) * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigResult out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline double min_eigenvalue(const ComplexMatrix& h) { return hermitian_eig(h).values.front(); }

}  // namespace spinmoments
