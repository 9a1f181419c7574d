#include "rtree/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rtree {

TransferMatrix2 free_propagator(double delta, const EnergyPoint& z) {
    if (!(delta >= 0.0)) throw std::invalid_argument("free_propagator: delta must be >= 0");
    const cplx k = z.k();
    if (k == cplx(0.0)) return {1.0, delta, 0.0, 1.0};
    const cplx c = std::cos(k * delta);
    const cplx s = std::sin(k * delta);
    return {c, s / k, -k * s, c};
}

TransferMatrix2 jump_matrix(double b) {
    if (std::isnan(b) || !(b > 1.0)) throw std::domain_error("jump_matrix: branching must lie in (1, inf)");
    if (std::isinf(b)) throw std::domain_error("jump_matrix: b = inf has no transfer matrix");
    const double r = std::sqrt(b);
    return {r, 0.0, 0.0, 1.0 / r};
}

TransferMatrix2 jump_matrix(const Atom& atom) {
    if (atom.decoupling()) throw std::domain_error("jump_matrix: b = inf has no transfer matrix");
    const double r = atom.sqrt_b();
    return {r, 0.0, 0.0, 1.0 / r};
}

TransferMatrix2 transfer(const AtomicMeasure& mu, double x, double y, const EnergyPoint& z) {
    if (!(y <= x)) throw std::invalid_argument("transfer: requires y <= x");
    const auto atoms = mu.window(y, x);
    TransferMatrix2 m = TransferMatrix2::identity();
    double pos = y;
    for (const auto& a : atoms) {
        if (a.t == x || a.t == y) throw std::invalid_argument("transfer: endpoint lies on an atom");
        if (a.decoupling()) throw std::invalid_argument("transfer: decoupling atom (b = inf) inside the range");
        m = jump_matrix(a) * free_propagator(a.t - pos, z) * m;
        pos = a.t;
    }
    return free_propagator(x - pos, z) * m;
}

std::vector<SolutionSample> solution_eval(const AtomicMeasure& mu, const EnergyPoint& z, const Vec2& init,
                                          const std::vector<double>& grid) {
    std::vector<SolutionSample> out;
    out.reserve(grid.size());
    for (double x : grid) {
        if (x < 0.0) throw std::invalid_argument("solution_eval: grid points must be >= 0");
        const Vec2 v = transfer(mu, x, 0.0, z).apply(init);
        out.push_back({x, v[0], v[1]});
    }
    return out;
}

double simon_stolz_max_step(double epsilon, double E) {
    const double k = std::sqrt(E);
    return std::min(epsilon, std::numbers::pi / (4.0 * k)) / 8.0;
}

SimonStolzResult simon_stolz_integral(const AtomicMeasure& mu, double E, double X, double step) {
    if (!(E > 0.0)) throw std::domain_error("simon_stolz_integral: E must be positive");
    if (!(X > 0.0)) throw std::invalid_argument("simon_stolz_integral: X must be positive");
    const double hmax = simon_stolz_max_step(mu.epsilon(), E);
    const double h = step > 0.0 ? std::min(step, hmax) : hmax;
    const EnergyPoint z(cplx(E, 0.0));
    const double k = std::sqrt(E);
    const double growth = std::max(k, 1.0 / k);

    SimonStolzResult res;
    res.step = h;

    auto atoms = mu.window(0.0, X);
    if (!atoms.empty() && atoms.back().t == X) atoms.pop_back();

    TransferMatrix2 at_left = TransferMatrix2::identity();  // T(t_n+, 0)
    double left = 0.0;
    double log_prod_b = 0.0;
    double cumulative = 0.0;
    double cumulative_bound = 0.0;
    for (std::size_t n = 0; n <= atoms.size(); ++n) {
        const double right = n < atoms.size() ? atoms[n].t : X;
        const double len = right - left;
        double piece = 0.0;
        if (len > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(len / h));
            const double hh = len / static_cast<double>(steps);
            for (std::size_t i = 0; i < steps; ++i) {
                const double dx = (static_cast<double>(i) + 0.5) * hh;
                const double nrm = (free_propagator(dx, z) * at_left).spectral_norm();
                piece += hh / (nrm * nrm);
            }
        }
        cumulative += piece;
        const double log_bound =
            std::log(len) - (2.0 * static_cast<double>(n) + 2.0) * std::log(growth) - log_prod_b;
        const double bound = len > 0.0 ? std::exp(log_bound) : 0.0;
        cumulative_bound += bound;
        res.intervals.push_back({n, left, right, piece, bound, cumulative, cumulative_bound});

        if (n < atoms.size()) {
            const auto& a = atoms[n];
            if (a.decoupling()) throw std::invalid_argument("simon_stolz_integral: decoupling atom (b = inf)");
            at_left = jump_matrix(a) * free_propagator(len, z) * at_left;
            log_prod_b += std::log(a.b());
            left = right;
        }
    }
    res.integral = cumulative;
    return res;
}

}  // namespace rtree
