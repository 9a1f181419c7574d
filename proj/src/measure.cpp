#include "rtree/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace rtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_atoms(const std::vector<Atom>& atoms, const char* what) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!std::isfinite(atoms[i].t))
            throw std::invalid_argument(std::string(what) + ": atom position not finite");
        if (!(atoms[i].beta >= 1.0) || !std::isfinite(atoms[i].beta))
            throw std::invalid_argument(std::string(what) + ": atom weight must lie in [1, inf)");
        if (i > 0 && !(atoms[i].t > atoms[i - 1].t))
            throw std::invalid_argument(std::string(what) + ": atom positions must increase strictly");
    }
}

Tail shift_tail(const Tail& tail, double s) {
    return std::visit(Overloaded{
                          [](const NoTail& t) -> Tail { return t; },
                          [s](PeriodicTail t) -> Tail {
                              t.start -= s;
                              return t;
                          },
                          [s](GapTail t) -> Tail {
                              t.first_t -= s;
                              return t;
                          },
                      },
                      tail);
}

}  // namespace

double beta_from_b(double b) {
    if (std::isnan(b) || !(b > 1.0)) throw std::domain_error("beta_from_b: branching must lie in (1, inf]");
    if (std::isinf(b)) return 1.0;
    const double r = std::sqrt(b);
    return (r + 1.0) / (r - 1.0);
}

double b_from_beta(double beta) {
    if (std::isnan(beta) || !(beta >= 1.0)) throw std::domain_error("b_from_beta: weight must be >= 1");
    if (beta == 1.0) return kInf;
    const double r = (beta + 1.0) / (beta - 1.0);
    return r * r;
}

double Atom::sqrt_b() const {
    if (beta == 1.0) return kInf;
    return (beta + 1.0) / (beta - 1.0);
}

double sparse_gap(std::size_t n) {
    const double m = static_cast<double>(n + 1);
    return std::pow(m, 2.0 * m);
}

// ---------------------------------------------------------------------------

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, double epsilon, SupportClass support, Tail tail)
    : base_(std::move(atoms)), epsilon_(epsilon), support_(support), tail_(std::move(tail)) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("AtomicMeasure: epsilon must be positive");
    check_atoms(base_, "AtomicMeasure");
    if (const auto* p = std::get_if<PeriodicTail>(&tail_)) {
        if (!(p->period > 0.0)) throw std::invalid_argument("PeriodicTail: period must be positive");
        if (p->cell.empty()) throw std::invalid_argument("PeriodicTail: empty cell");
        check_atoms(p->cell, "PeriodicTail");
        if (!(p->cell.front().t > 0.0) || !(p->cell.back().t < p->period))
            throw std::invalid_argument("PeriodicTail: cell offsets must lie in (0, period)");
        if (!base_.empty() && !(base_.back().t < p->start))
            throw std::invalid_argument("PeriodicTail: explicit atoms must precede the tail start");
    }
    if (const auto* g = std::get_if<GapTail>(&tail_)) {
        if (!(g->beta >= 1.0)) throw std::invalid_argument("GapTail: weight must be >= 1");
        if (g->first_index != base_.size() + 1)
            throw std::invalid_argument("GapTail: first_index must follow the explicit atoms");
        if (!base_.empty() && !(base_.back().t < g->first_t))
            throw std::invalid_argument("GapTail: explicit atoms must precede the tail");
    }
}

std::vector<Atom> AtomicMeasure::atoms() const {
    std::vector<Atom> out = base_;
    for (auto& a : out) a.t -= offset_;
    return out;
}

Tail AtomicMeasure::tail() const { return shift_tail(tail_, offset_); }

double AtomicMeasure::tail_start() const {
    return std::visit(Overloaded{
                          [this](const NoTail&) { return base_.empty() ? -kInf : base_.back().t - offset_; },
                          [this](const PeriodicTail& p) { return p.start - offset_; },
                          [this](const GapTail& g) { return g.first_t - offset_; },
                      },
                      tail_);
}

std::vector<Atom> AtomicMeasure::window(double upto) const { return window(-kInf, upto); }

std::vector<Atom> AtomicMeasure::window(double lo, double hi) const {
    std::vector<Atom> out;
    for (const auto& a : base_) {
        const double t = a.t - offset_;
        if (t >= lo && t <= hi) out.push_back({t, a.beta});
    }
    std::visit(Overloaded{
                   [](const NoTail&) {},
                   [&](const PeriodicTail& p) {
                       const double start = p.start - offset_;
                       if (start + p.cell.front().t > hi) return;
                       // First cell that can reach lo.
                       double j0 = 0.0;
                       if (lo > start) j0 = std::max(0.0, std::floor((lo - start) / p.period) - 1.0);
                       for (double j = j0;; j += 1.0) {
                           const double cell_start = start + j * p.period;
                           if (cell_start + p.cell.front().t > hi) break;
                           for (const auto& c : p.cell) {
                               const double t = cell_start + c.t;
                               if (t >= lo && t <= hi) out.push_back({t, c.beta});
                           }
                       }
                   },
                   [&](const GapTail& g) {
                       double t = g.first_t - offset_;
                       for (std::size_t n = g.first_index; t <= hi; ++n) {
                           if (t >= lo) out.push_back({t, g.beta});
                           const double next = t + std::max(epsilon_, sparse_gap(n));
                           if (!std::isfinite(next) || next == t) break;
                           t = next;
                       }
                   },
               },
               tail_);
    return out;
}

std::vector<Atom> AtomicMeasure::first_atoms(std::size_t n) const {
    std::vector<Atom> out;
    for (std::size_t i = 0; i < base_.size() && out.size() < n; ++i)
        out.push_back({base_[i].t - offset_, base_[i].beta});
    if (out.size() >= n) return out;
    std::visit(Overloaded{
                   [](const NoTail&) {},
                   [&](const PeriodicTail& p) {
                       const double start = p.start - offset_;
                       for (double j = 0.0; out.size() < n; j += 1.0)
                           for (const auto& c : p.cell) {
                               if (out.size() >= n) break;
                               out.push_back({start + j * p.period + c.t, c.beta});
                           }
                   },
                   [&](const GapTail& g) {
                       double t = g.first_t - offset_;
                       for (std::size_t k = g.first_index; out.size() < n; ++k) {
                           out.push_back({t, g.beta});
                           t += std::max(epsilon_, sparse_gap(k));
                           if (!std::isfinite(t)) break;
                       }
                   },
               },
               tail_);
    return out;
}

AtomicMeasure AtomicMeasure::restricted(double lo, double hi) const {
    return AtomicMeasure(window(lo, hi), epsilon_, support_);
}

AtomicMeasure AtomicMeasure::truncated() const { return AtomicMeasure(atoms(), epsilon_, support_); }

AtomicMeasure AtomicMeasure::shifted(double s) const {
    AtomicMeasure out = *this;
    out.offset_ = offset_ + s;
    out.support_ = SupportClass::whole_line;
    return out;
}

bool operator==(const AtomicMeasure& lhs, const AtomicMeasure& rhs) {
    return lhs.epsilon_ == rhs.epsilon_ && lhs.support_ == rhs.support_ && lhs.atoms() == rhs.atoms() &&
           lhs.tail() == rhs.tail();
}

// ---------------------------------------------------------------------------

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::gap: return "gap";
        case Violation::Kind::first_position: return "first_position";
        case Violation::Kind::weight_low: return "weight_low";
        case Violation::Kind::weight_high: return "weight_high";
    }
    return "unknown";
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    if (ok()) {
        os << "pass (" << atoms_checked << " atoms up to t=" << horizon << ")";
        return os.str();
    }
    os << "fail:";
    for (const auto& v : violations)
        os << " [" << to_string(v.kind) << " at index " << v.index << ": " << v.value << " vs " << v.bound << "]";
    return os.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::invalid_argument("measure violates class bounds: " + report.summary()), report_(std::move(report)) {}

ValidationReport validate(const AtomicMeasure& mu, const MeasureClassBounds& bounds) {
    ValidationReport report;
    const Tail tail = mu.tail();
    std::vector<Atom> atoms;
    if (const auto* p = std::get_if<PeriodicTail>(&tail)) {
        atoms = mu.window(p->start + 2.0 * p->period);
    } else if (std::holds_alternative<GapTail>(tail)) {
        atoms = mu.first_atoms(mu.explicit_count() + 3);
    } else {
        atoms = mu.atoms();
    }
    report.atoms_checked = atoms.size();
    report.horizon = atoms.empty() ? 0.0 : atoms.back().t;

    const double lo = 1.0 + 1.0 / bounds.C;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const std::size_t idx = i + 1;
        if (i == 0 && mu.support() == SupportClass::half_line && atoms[0].t < bounds.epsilon)
            report.violations.push_back({Violation::Kind::first_position, idx, atoms[0].t, bounds.epsilon});
        if (i > 0) {
            const double gap = atoms[i].t - atoms[i - 1].t;
            if (gap < bounds.epsilon) report.violations.push_back({Violation::Kind::gap, idx, gap, bounds.epsilon});
        }
        if (atoms[i].beta < lo) report.violations.push_back({Violation::Kind::weight_low, idx, atoms[i].beta, lo});
        if (atoms[i].beta > bounds.C)
            report.violations.push_back({Violation::Kind::weight_high, idx, atoms[i].beta, bounds.C});
    }
    return report;
}

AtomicMeasure shift(const AtomicMeasure& mu, double s) { return mu.shifted(s); }

// ---------------------------------------------------------------------------
// Bounded-Lipschitz distance.
//
// With the merged atom positions x_1 < ... < x_P inside the open window and
// net masses c_p, the distance is the linear program
//   max sum_p c_p f_p   s.t.  |f_p| <= 1, |f_{p+1} - f_p| <= x_{p+1} - x_p,
//                             f = 0 at both window ends.
// Along a chain this is solved exactly by dynamic programming over concave
// piecewise-linear value functions.

namespace {

struct ConcavePL {
    std::vector<std::pair<double, double>> pts;  // (f, value), f increasing

    // V(f) <- max_{|g - f| <= d} V(g)
    void dilate(double d) {
        std::size_t lo = 0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (pts[i].second > pts[lo].second) lo = i;
        std::size_t hi = lo;
        while (hi + 1 < pts.size() && pts[hi + 1].second >= pts[lo].second) ++hi;
        std::vector<std::pair<double, double>> out;
        out.reserve(pts.size() + 1);
        for (std::size_t i = 0; i <= lo; ++i) out.emplace_back(pts[i].first - d, pts[i].second);
        for (std::size_t i = hi; i < pts.size(); ++i) out.emplace_back(pts[i].first + d, pts[i].second);
        pts = std::move(out);
    }

    double eval(double f) const {
        if (pts.size() == 1) return pts[0].second;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const auto& [x0, y0] = pts[i];
            const auto& [x1, y1] = pts[i + 1];
            if (f >= x0 && f <= x1) {
                if (x1 == x0) return std::max(y0, y1);
                return y0 + (y1 - y0) * (f - x0) / (x1 - x0);
            }
        }
        throw std::logic_error("ConcavePL::eval outside domain");
    }

    void clip(double lo, double hi) {
        std::vector<std::pair<double, double>> out;
        const double a = std::max(lo, pts.front().first);
        const double b = std::min(hi, pts.back().first);
        out.emplace_back(a, eval(a));
        for (const auto& p : pts)
            if (p.first > a && p.first < b) out.push_back(p);
        if (b > a) out.emplace_back(b, eval(b));
        pts = std::move(out);
    }

    void add_linear(double c) {
        for (auto& p : pts) p.second += c * p.first;
    }
};

}  // namespace

double weak_distance(const AtomicMeasure& mu, const AtomicMeasure& nu, double window) {
    if (!(window > 0.0)) throw std::invalid_argument("weak_distance: window must be positive");
    const bool half = mu.support() == SupportClass::half_line && nu.support() == SupportClass::half_line;
    const double left = half ? 0.0 : -window;
    const double right = window;

    std::vector<std::pair<double, double>> merged;
    for (const auto& a : mu.window(left, right))
        if (a.t > left && a.t < right) merged.emplace_back(a.t, a.beta);
    for (const auto& a : nu.window(left, right))
        if (a.t > left && a.t < right) merged.emplace_back(a.t, -a.beta);
    std::sort(merged.begin(), merged.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    ConcavePL v{{{0.0, 0.0}}};
    double prev = left;
    for (std::size_t i = 0; i < merged.size();) {
        const double x = merged[i].first;
        double c = 0.0;
        for (; i < merged.size() && merged[i].first == x; ++i) c += merged[i].second;
        v.dilate(x - prev);
        v.clip(-1.0, 1.0);
        v.add_linear(c);
        prev = x;
    }
    v.dilate(right - prev);
    return std::max(0.0, v.eval(0.0));
}

// ---------------------------------------------------------------------------

namespace {

bool windows_agree(const std::vector<Atom>& x, const std::vector<Atom>& y, double pos_tol, double weight_tol) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i].t - y[i].t) > pos_tol) return false;
        if (std::abs(x[i].beta - y[i].beta) > weight_tol) return false;
    }
    return true;
}

}  // namespace

RightLimitResult right_limit(const AtomicMeasure& mu, const std::vector<double>& shifts, double window,
                             double tol, const MeasureClassBounds& bounds) {
    if (shifts.size() < 2) throw std::invalid_argument("right_limit: need at least two shifts");
    if (!(window > 0.0)) throw std::invalid_argument("right_limit: window must be positive");
    for (std::size_t j = 1; j < shifts.size(); ++j)
        if (!(shifts[j] > shifts[j - 1])) throw std::invalid_argument("right_limit: shifts must increase strictly");

    std::vector<std::vector<Atom>> windows;
    windows.reserve(shifts.size());
    for (double s : shifts) windows.push_back(shift(mu, s).window(-window, window));

    const double pos_tol = tol * bounds.epsilon;
    const double weight_tol = tol * bounds.C;
    const auto& last = windows.back();
    std::size_t stable = windows.size() - 1;
    while (stable > 0 && windows_agree(windows[stable - 1], last, pos_tol, weight_tol)) --stable;

    RightLimitResult out;
    out.limit = AtomicMeasure(last, mu.epsilon(), SupportClass::whole_line);
    out.converged = stable + 2 <= windows.size();
    out.stable_from = stable;
    out.window = window;
    out.consumed_upto = shifts.back() + window;
    return out;
}

AtomicMeasure sparsify(const AtomicMeasure& mu, double R, const MeasureClassBounds& bounds) {
    if (!(R > 0.0)) throw std::invalid_argument("sparsify: R must be positive");
    std::vector<Atom> kept = mu.window(R);
    AtomicMeasure head(kept, mu.epsilon(), mu.support());
    auto report = validate(head, bounds);
    if (!report.ok()) throw ValidationError(std::move(report));

    const double eps = std::max(bounds.epsilon, mu.epsilon());
    const std::size_t K = kept.size();
    const double last_t = kept.empty() ? 0.0 : kept.back().t;
    GapTail tail;
    tail.beta = kept.empty() ? bounds.C : kept.back().beta;
    tail.first_index = K + 1;
    tail.first_t = std::max(last_t + std::max(eps, sparse_gap(K)), R + eps);
    return AtomicMeasure(std::move(kept), mu.epsilon(), mu.support(), tail);
}

std::optional<Periodicity> is_eventually_periodic(const DiscreteBranchSequence& seq, std::size_t max_start,
                                                  std::size_t max_period) {
    const auto& b = seq.values;
    const std::size_t L = b.size();
    if (max_start < 1 || max_period < 1)
        throw std::invalid_argument("is_eventually_periodic: bounds must be at least 1");
    if (L <= max_start + 2 * max_period)
        throw std::invalid_argument("is_eventually_periodic: window too short for the requested bounds");
    for (int v : b) {
        if (v < 1) throw std::invalid_argument("is_eventually_periodic: entries must be >= 1");
        if (seq.declared_max > 0 && v > seq.declared_max)
            throw std::invalid_argument("is_eventually_periodic: entry exceeds declared maximum");
    }
    for (std::size_t N = 1; N <= max_start; ++N)
        for (std::size_t p = 1; p <= max_period; ++p) {
            bool ok = true;
            for (std::size_t n = N; n + p <= L && ok; ++n) ok = b[n - 1] == b[n + p - 1];
            if (ok) return Periodicity{N, p, L};
        }
    return std::nullopt;
}

}  // namespace rtree
