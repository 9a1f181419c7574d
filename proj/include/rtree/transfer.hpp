#pragma once

#include <cstddef>
#include <vector>

#include "rtree/energy.hpp"
#include "rtree/matrix2.hpp"
#include "rtree/measure.hpp"

namespace rtree {

/// Maps (f(y), f'(y)) to (f(y+delta), f'(y+delta)) for -f'' = z f:
/// [[cos k d, sin(k d)/k], [-k sin k d, cos k d]]; [[1, d], [0, 1]] at z = 0.
TransferMatrix2 free_propagator(double delta, const EnergyPoint& z);

/// diag(sqrt(b), 1/sqrt(b)): (f, f')(t-) -> (f, f')(t+) across an atom.
TransferMatrix2 jump_matrix(double b);
TransferMatrix2 jump_matrix(const Atom& atom);

/// Transfer matrix from y to x (y <= x) through every atom of mu in (y, x).
/// Throws std::invalid_argument if x or y sits on an atom or a decoupling
/// (b = inf) atom lies in between.
TransferMatrix2 transfer(const AtomicMeasure& mu, double x, double y, const EnergyPoint& z);

struct SolutionSample {
    double x;
    cplx f;
    cplx df;
};

/// (f, f') at each grid point, starting from (f, f')(0) = init.
std::vector<SolutionSample> solution_eval(const AtomicMeasure& mu, const EnergyPoint& z, const Vec2& init,
                                          const std::vector<double>& grid);

struct SimonStolzInterval {
    std::size_t n;        // interval (t_n, t_{n+1}), t_0 = 0
    double t_n;
    double t_next;
    double integral;      // numerical contribution of the interval
    double lower_bound;   // (t_{n+1}-t_n) / (max(k,1/k)^{2n+2} prod_{m<=n} b_m)
    double cumulative_integral;
    double cumulative_lower_bound;
};

struct SimonStolzResult {
    double integral = 0.0;  // int_0^X ||T(x,0,E)||^-2 dx
    double step = 0.0;
    std::vector<SimonStolzInterval> intervals;
};

/// Largest midpoint step allowed for energy E: min(epsilon, pi/(4k))/8.
double simon_stolz_max_step(double epsilon, double E);

/// Composite midpoint rule for int_0^X dx / ||T(x,0,E)||^2 (spectral norm) with
/// step <= `step` (0 selects simon_stolz_max_step), plus per-interval bounds.
SimonStolzResult simon_stolz_integral(const AtomicMeasure& mu, double E, double X, double step = 0.0);

}  // namespace rtree
