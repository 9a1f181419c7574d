#pragma once

// Shared generators and independent oracles for the test suites. Nothing
// here calls the library's m-function, kernel or distance routines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rtree/measure.hpp"

namespace testing {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Generators

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
        return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
    }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    /// Finite half-line measure with up to `max_atoms` atoms, gaps in
    /// [eps, eps + spread], weights in [beta_lo, beta_hi].
    rtree::AtomicMeasure measure(std::size_t max_atoms, double eps, double spread, double beta_lo,
                                 double beta_hi, std::size_t min_atoms = 0) {
        const std::size_t n = index(min_atoms, max_atoms);
        std::vector<rtree::Atom> atoms;
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            t += uniform(eps, eps + spread);
            atoms.push_back({t, uniform(beta_lo, beta_hi)});
        }
        return rtree::AtomicMeasure(std::move(atoms), eps);
    }

    /// Point in the open upper half-plane.
    cplx upper(double re_span, double im_lo, double im_hi) {
        return {uniform(-re_span, re_span), uniform(im_lo, im_hi)};
    }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Scalar Riccati oracle: m = f'/f propagated leftward as a plain complex
// number with an explicit flag for m = infinity. Only valid for finite
// measures with moderate Im k * length (no overflow handling).

struct ScalarM {
    cplx value;
    bool infinite = false;
};

inline cplx oracle_k(cplx z) {
    if (z.imag() == 0.0 && z.real() < 0.0) return {0.0, std::sqrt(-z.real())};
    cplx k = std::sqrt(z);
    if (k.imag() < 0.0) k = -k;
    return k;
}

/// Moves m from x leftward to x - d across a free interval.
inline ScalarM oracle_free_left(ScalarM m, cplx k, double d) {
    const cplx c = std::cos(k * d);
    const cplx s = std::sin(k * d) / k;
    if (m.infinite) return {-c / s, false};
    const cplx num = k * k * s + m.value * c;
    const cplx den = c - m.value * s;
    if (den == cplx(0.0)) return {0.0, true};
    return {num / den, false};
}

/// m_+(z; 0) for a finite list of atoms; beta == 1 atoms are Dirichlet.
inline ScalarM oracle_m_plus(const std::vector<rtree::Atom>& atoms, cplx z, double t0 = 0.0) {
    const cplx k = oracle_k(z);
    ScalarM m{cplx(0.0, 1.0) * k, false};
    double x = atoms.empty() ? t0 : atoms.back().t;
    for (std::size_t i = atoms.size(); i-- > 0;) {
        const auto& a = atoms[i];
        if (a.t < t0) break;
        m = oracle_free_left(m, k, x - a.t);
        x = a.t;
        if (a.beta == 1.0) {
            m = {0.0, true};
        } else if (!m.infinite) {
            const double r = (a.beta + 1.0) / (a.beta - 1.0);
            m.value *= r * r;
        }
    }
    return oracle_free_left(m, k, x - t0);
}

/// One atom (t1, b) at z = -kappa^2: (m + kappa) / (-q 2 kappa e^{-2 kappa t1})
/// equals 1 / (1 - q e^{-2 kappa t1}) with q = (b-1)/(b+1).
inline double oracle_one_atom_ratio(double t1, double b, double kappa) {
    const double q = std::isinf(b) ? 1.0 : (b - 1.0) / (b + 1.0);
    return 1.0 / (1.0 - q * std::exp(-2.0 * kappa * t1));
}

/// Dirichlet Green kernel of the interval [0, L] at z = -kappa^2.
inline double oracle_interval_kernel(double t, double u, double L, double kappa) {
    const double lo = std::min(t, u), hi = std::max(t, u);
    return std::sinh(kappa * lo) * std::sinh(kappa * (L - hi)) / (kappa * std::sinh(kappa * L));
}

// ---------------------------------------------------------------------------
// Bounded-Lipschitz oracle by vertex enumeration of the LP
//   max sum w_i f_i  s.t. |f_i| <= cap_i, |f_i - f_j| <= |x_i - x_j|.
// Only for a handful of points.

inline double oracle_bl_distance(const std::vector<std::pair<double, double>>& signed_atoms, double left,
                                 double right) {
    std::vector<double> xs, ws;
    for (const auto& [x, w] : signed_atoms) {
        if (!(x > left && x < right)) continue;
        bool merged = false;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (xs[i] == x) {
                ws[i] += w;
                merged = true;
            }
        if (!merged) {
            xs.push_back(x);
            ws.push_back(w);
        }
    }
    const std::size_t n = xs.size();
    if (n == 0) return 0.0;
    // Constraints a.f <= c.
    std::vector<Eigen::VectorXd> A;
    std::vector<double> c;
    for (std::size_t i = 0; i < n; ++i) {
        const double cap = std::min({1.0, xs[i] - left, right - xs[i]});
        for (double sgn : {1.0, -1.0}) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            a(static_cast<Eigen::Index>(i)) = sgn;
            A.push_back(a);
            c.push_back(cap);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            a(static_cast<Eigen::Index>(i)) = 1.0;
            a(static_cast<Eigen::Index>(j)) = -1.0;
            A.push_back(a);
            c.push_back(std::abs(xs[i] - xs[j]));
        }
    const std::size_t m = A.size();
    double best = 0.0;
    // Enumerate n-subsets of constraints.
    std::vector<bool> mask(m, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(n), true);
    do {
        Eigen::MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
        Eigen::Index r = 0;
        for (std::size_t q = 0; q < m; ++q)
            if (mask[q]) {
                M.row(r) = A[q].transpose();
                rhs(r) = c[q];
                ++r;
            }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rank() < static_cast<Eigen::Index>(n)) continue;
        const Eigen::VectorXd f = lu.solve(rhs);
        bool feasible = true;
        for (std::size_t q = 0; q < m && feasible; ++q) feasible = A[q].dot(f) <= c[q] + 1e-12;
        if (!feasible) continue;
        double val = 0.0;
        for (std::size_t i = 0; i < n; ++i) val += ws[i] * f(static_cast<Eigen::Index>(i));
        best = std::max(best, std::abs(val));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

}  // namespace testing
