#include "rtree/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>

#include "rtree/parallel.hpp"
#include "rtree/transfer.hpp"

namespace rtree {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();
// Longest free step, in units of 1/Im k, between renormalizations.
constexpr double kMaxGrowth = 20.0;

Vec2 normalized(const Vec2& v) {
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    if (n == 0.0 || !std::isfinite(n)) throw std::runtime_error("projective state degenerated");
    return {v[0] / n, v[1] / n};
}

/// Propagates the projective state over a signed distance (negative: leftward).
Vec2 free_move(Vec2 v, double delta, const EnergyPoint& z) {
    const double im = std::abs(z.k().imag());
    const double chunk = im > 0.0 ? kMaxGrowth / im : kInf;
    double remaining = std::abs(delta);
    const bool left = delta < 0.0;
    while (remaining > 0.0) {
        const double step = std::min(remaining, chunk);
        const TransferMatrix2 p = free_propagator(step, z);
        v = normalized((left ? p.unimodular_inverse() : p).apply(v));
        remaining -= step;
    }
    return v;
}

Vec2 cross_leftward(const Vec2& v, const Atom& a) {
    if (a.decoupling()) return {0.0, 1.0};  // f(t-) = 0
    const double r = a.sqrt_b();
    return normalized({v[0] / r, v[1] * r});
}

Vec2 cross_rightward(const Vec2& v, const Atom& a) {
    if (a.decoupling()) return {1.0, 0.0};  // f'(t+) = 0
    const double r = a.sqrt_b();
    return normalized({v[0] * r, v[1] / r});
}

/// State right of `from` (after crossing any atom located exactly at `from`)
/// carried left to `to`; `atoms` sorted ascending, those in (to, from] used.
Vec2 propagate_left(const std::vector<Atom>& atoms, double from, Vec2 state, double to, const EnergyPoint& z) {
    double pos = from;
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
        if (it->t > from || it->t <= to) continue;
        state = free_move(state, it->t - pos, z);
        state = cross_leftward(state, *it);
        pos = it->t;
    }
    return free_move(state, to - pos, z);
}

void check_off_atoms(const AtomicMeasure& mu, double t) {
    for (const auto& a : mu.window(t, t))
        if (a.t == t) throw std::invalid_argument("m-function base point lies on an atom");
}

Vec2 floquet_state(const PeriodicTail& tail, const EnergyPoint& z) {
    for (std::size_t i = 0; i < tail.cell.size(); ++i) {
        if (tail.cell[i].decoupling()) {
            std::vector<Atom> before(tail.cell.begin(), tail.cell.begin() + static_cast<std::ptrdiff_t>(i));
            return propagate_left(before, tail.cell[i].t, {0.0, 1.0}, 0.0, z);
        }
    }
    const TransferMatrix2 M = periodic_monodromy(tail, z);
    const cplx tr = M.trace();
    const cplx disc = std::sqrt(tr * tr - 4.0);
    const cplx lambdas[2] = {(tr + disc) / 2.0, (tr - disc) / 2.0};
    Vec2 vecs[2];
    for (int i = 0; i < 2; ++i) {
        const Vec2 v1{M.b, lambdas[i] - M.a};
        const Vec2 v2{lambdas[i] - M.d, M.c};
        const double n1 = std::norm(v1[0]) + std::norm(v1[1]);
        const double n2 = std::norm(v2[0]) + std::norm(v2[1]);
        vecs[i] = normalized(n1 >= n2 ? v1 : v2);
    }
    const double a0 = std::abs(lambdas[0]);
    const double a1 = std::abs(lambdas[1]);
    if (a0 < a1 * (1.0 - 1e-10)) return vecs[0];
    if (a1 < a0 * (1.0 - 1e-10)) return vecs[1];
    // |lambda| = 1 (band): the Herglotz branch Im m >= 0 is the limit from C+.
    auto im_m = [](const Vec2& v) { return (v[1] * std::conj(v[0])).imag(); };
    return im_m(vecs[0]) >= im_m(vecs[1]) ? vecs[0] : vecs[1];
}

MSample make_sample(const EnergyPoint& z, double t, Side side, const Vec2& v, double sign) {
    MSample s;
    s.z = z;
    s.t = t;
    s.side = side;
    s.route = Route::riccati;
    if (std::abs(v[0]) <= 1e-300 * std::abs(v[1])) {
        s.at_infinity = true;
        s.value = cplx(kInf, 0.0);
    } else {
        s.value = sign * v[1] / v[0];
    }
    return s;
}

}  // namespace

TransferMatrix2 periodic_monodromy(const PeriodicTail& tail, const EnergyPoint& z) {
    TransferMatrix2 m = TransferMatrix2::identity();
    double pos = 0.0;
    for (const auto& a : tail.cell) {
        m = jump_matrix(a) * free_propagator(a.t - pos, z) * m;
        pos = a.t;
    }
    return free_propagator(tail.period - pos, z) * m;
}

TailClosure tail_closure(const AtomicMeasure& mu, const EnergyPoint& z, const RiccatiOptions& opts) {
    const Tail tail = mu.tail();
    const cplx ik = kI * z.k();
    if (const auto* p = std::get_if<PeriodicTail>(&tail)) return {p->start, floquet_state(*p, z)};
    if (std::holds_alternative<GapTail>(tail)) {
        const auto atoms = mu.first_atoms(mu.explicit_count() + opts.gap_atoms);
        return {atoms.empty() ? -kInf : atoms.back().t, normalized({1.0, ik})};
    }
    const auto atoms = mu.atoms();
    return {atoms.empty() ? -kInf : atoms.back().t, normalized({1.0, ik})};
}

MSample riccati_m_plus(const AtomicMeasure& mu, const EnergyPoint& z, double t, const RiccatiOptions& opts) {
    check_off_atoms(mu, t);
    TailClosure closure = tail_closure(mu, z, opts);
    const Tail tail = mu.tail();
    if (const auto* p = std::get_if<PeriodicTail>(&tail); p && t >= p->start) {
        // Move the closure to the first cell boundary at or beyond t.
        closure.position = p->start + std::ceil((t - p->start) / p->period) * p->period;
    }
    const double from = std::max(t, closure.position);
    const auto atoms = mu.window(t, from);
    const Vec2 v = propagate_left(atoms, from, closure.state, t, z);
    MSample s = make_sample(z, t, Side::plus, v, 1.0);

    if (std::holds_alternative<GapTail>(tail) && z.z().imag() > 0.0) {
        // Everything beyond the materialized window is unknown to this route.
        const auto more = mu.first_atoms(mu.explicit_count() + opts.gap_atoms + 1);
        if (more.size() >= 2 && more.back().t > t) {
            const double depth = 0.5 * (more[more.size() - 2].t + more.back().t);
            if (depth > t) s.uncertainty = weyl_disk(mu.shifted(t), z, depth - t).radius;
        }
    }
    return s;
}

MSample m_minus(const AtomicMeasure& mu, const EnergyPoint& z, double t) {
    check_off_atoms(mu, t);
    const auto atoms = mu.window(-kInf, t);
    const cplx ik = kI * z.k();
    Vec2 v = normalized({1.0, -ik});  // e^{-ikx}, decaying to the left
    double pos = atoms.empty() ? t : atoms.front().t;
    for (const auto& a : atoms) {
        v = free_move(v, a.t - pos, z);
        v = cross_rightward(v, a);
        pos = a.t;
    }
    v = free_move(v, t - pos, z);
    return make_sample(z, t, Side::minus, v, -1.0);
}

WeylDisk weyl_disk(const AtomicMeasure& mu, const EnergyPoint& z, double depth) {
    const bool upper = z.z().imag() > 0.0;
    const bool negative = z.z().imag() == 0.0 && z.z().real() < 0.0;
    if (!upper && !negative) throw std::invalid_argument("weyl_disk: requires Im z > 0 or z < 0");
    if (!(depth > 0.0)) throw std::invalid_argument("weyl_disk: depth must be positive");
    const auto atoms = mu.window(0.0, depth);
    for (const auto& a : atoms)
        if (a.t == depth || a.t == 0.0) throw std::invalid_argument("weyl_disk: depth or base point on an atom");

    WeylDisk disk;
    disk.z = z;
    disk.depth = depth;

    for (const auto& a : atoms) {
        if (a.decoupling()) {
            // f(t-) = 0 fixes the solution on (0, t) whatever lies beyond.
            const Vec2 v = propagate_left(atoms, a.t, {0.0, 1.0}, 0.0, z);
            disk.center = v[1] / v[0];
            disk.radius = 0.0;
            return disk;
        }
    }

    // T_z(depth), renormalized as it grows; the Moebius map ignores scale.
    const double im = std::abs(z.k().imag());
    const double chunk = im > 0.0 ? kMaxGrowth / im : kInf;
    TransferMatrix2 T = TransferMatrix2::identity();
    auto renorm = [](TransferMatrix2 m) {
        const double n = m.frobenius_norm();
        return TransferMatrix2{m.a / n, m.b / n, m.c / n, m.d / n};
    };
    auto advance = [&](double len) {
        while (len > 0.0) {
            const double step = std::min(len, chunk);
            T = renorm(free_propagator(step, z) * T);
            len -= step;
        }
    };
    double pos = 0.0;
    for (const auto& a : atoms) {
        advance(a.t - pos);
        T = renorm(jump_matrix(a) * T);
        pos = a.t;
    }
    advance(depth - pos);

    // [f(0) : f'(0)] = T^{-1} [1 : w], so m(0) = (A w + B) / (C w + D).
    const TransferMatrix2 inv = T.unimodular_inverse();
    const cplx A = inv.d, B = inv.c, C = inv.b, D = inv.a;
    if (upper) {
        const cplx denom = D * std::conj(C) - C * std::conj(D);
        if (std::abs(denom) == 0.0) throw std::logic_error("weyl_disk: degenerate Moebius map");
        disk.center = (B * std::conj(C) - A * std::conj(D)) / denom;
        disk.radius = std::abs(A * D - B * C) / std::abs(denom);
    } else {
        const double kappa = z.k().imag();
        const cplx at_kappa = (B - A * kappa) / (D - C * kappa);
        const cplx at_inf = A / C;
        disk.center = 0.5 * (at_kappa + at_inf);
        disk.radius = 0.5 * std::abs(at_kappa - at_inf);
    }
    return disk;
}

BoundaryValue boundary_value(const AtomicMeasure& mu, double E, const EtaSchedule& schedule, double t, Side side) {
    if (!(E > 0.0)) throw std::domain_error("boundary_value: E must be positive");
    const double eta0 = schedule.eta0 > 0.0 ? schedule.eta0 : 1e-2 * (1.0 + E);
    auto eval = [&](double eta) {
        const EnergyPoint z = EnergyPoint::above(E, eta);
        return side == Side::plus ? riccati_m_plus(mu, z, t) : m_minus(mu, z, t);
    };

    std::vector<cplx> m;
    std::vector<cplx> r1;
    std::vector<cplx> r2;
    BoundaryValue out;
    MSample last_sample;
    double eta = eta0;
    for (std::size_t j = 0; j < schedule.max_levels; ++j, eta *= 0.5) {
        last_sample = eval(eta);
        if (last_sample.at_infinity) continue;
        m.push_back(last_sample.value);
        if (m.size() >= 2) r1.push_back(2.0 * m[m.size() - 1] - m[m.size() - 2]);
        if (r1.size() >= 2) r2.push_back((4.0 * r1[r1.size() - 1] - r1[r1.size() - 2]) / 3.0);
        out.levels = j + 1;
        if (r2.size() >= 2) {
            out.estimate = std::abs(r2.back() - r2[r2.size() - 2]);
            if (out.estimate < schedule.tol) {
                out.converged = true;
                break;
            }
        }
    }
    out.sample = last_sample;
    out.sample.z = EnergyPoint(cplx(E, 0.0));
    if (!r2.empty()) out.sample.value = r2.back();
    else if (!m.empty()) out.sample.value = m.back();
    out.sample.at_infinity = m.empty();
    out.sample.uncertainty = out.estimate;
    return out;
}

ReflectionlessReport reflectionless_defect(const AtomicMeasure& mu, const std::vector<double>& energies, double t,
                                           const EtaSchedule& schedule, unsigned threads) {
    ReflectionlessReport rep;
    rep.samples.resize(energies.size());
    parallel_for(energies.size(), threads, [&](std::size_t i) {
        const double E = energies[i];
        const auto plus = boundary_value(mu, E, schedule, t, Side::plus);
        const auto minus = boundary_value(mu, E, schedule, t, Side::minus);
        const cplx mp = plus.sample.value;
        const cplx mm = minus.sample.value;
        rep.samples[i] = {E, mp, mm, std::abs(mp + std::conj(mm)), plus.converged && minus.converged};
    });
    double sum = 0.0;
    for (const auto& s : rep.samples) {
        rep.sup = std::max(rep.sup, s.defect);
        sum += s.defect;
    }
    rep.mean = rep.samples.empty() ? 0.0 : sum / static_cast<double>(rep.samples.size());
    return rep;
}

double SpectralSet::fraction() const {
    if (member.empty()) return 0.0;
    return static_cast<double>(std::count(member.begin(), member.end(), true)) / static_cast<double>(member.size());
}

namespace {

DensityReport finish_density(std::vector<DensitySample> samples, double delta) {
    DensityReport rep;
    rep.set.delta = delta;
    for (const auto& s : samples) {
        const double im = s.m_plus.imag();
        rep.set.energies.push_back(s.E);
        rep.set.member.push_back(im > delta && im < 1.0 / delta);
    }
    rep.samples = std::move(samples);
    return rep;
}

}  // namespace

DensityReport spectral_density(const AtomicMeasure& mu, const std::vector<double>& energies, double eta, double delta,
                               unsigned threads) {
    if (!(eta > 0.0)) throw std::invalid_argument("spectral_density: eta must be positive");
    std::vector<DensitySample> samples(energies.size());
    parallel_for(energies.size(), threads, [&](std::size_t i) {
        const double E = energies[i];
        const auto s = riccati_m_plus(mu, EnergyPoint::above(E, eta), 0.0);
        samples[i] = {E, eta, s.value, s.value.imag() / std::numbers::pi, true};
    });
    return finish_density(std::move(samples), delta);
}

DensityReport spectral_density(const AtomicMeasure& mu, const std::vector<double>& energies,
                               const EtaSchedule& schedule, double delta, unsigned threads) {
    std::vector<DensitySample> samples(energies.size());
    parallel_for(energies.size(), threads, [&](std::size_t i) {
        const double E = energies[i];
        const auto bv = boundary_value(mu, E, schedule, 0.0, Side::plus);
        samples[i] = {E, 0.0, bv.sample.value, bv.sample.value.imag() / std::numbers::pi, bv.converged};
    });
    return finish_density(std::move(samples), delta);
}

}  // namespace rtree
