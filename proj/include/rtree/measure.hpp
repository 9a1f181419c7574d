#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rtree {

/// Weight of a vertex with branching b: (sqrt(b)+1)/(sqrt(b)-1); 1 for b = inf.
double beta_from_b(double b);
/// Inverse of beta_from_b: ((beta+1)/(beta-1))^2; inf for beta = 1.
double b_from_beta(double beta);

/// One atom of the jump measure: a vertex at distance t carrying weight beta.
struct Atom {
    double t = 0.0;
    double beta = 1.0;

    static Atom from_b(double t, double b) { return {t, beta_from_b(b)}; }

    double b() const { return b_from_beta(beta); }
    /// sqrt(b) = (beta+1)/(beta-1), computed without squaring.
    double sqrt_b() const;
    /// b = inf: the atom decouples the line (f(t-) = 0, f'(t+) = 0).
    bool decoupling() const { return beta == 1.0; }

    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class SupportClass { half_line, whole_line };

/// No atoms beyond the explicit list (free half-line).
struct NoTail {
    friend bool operator==(const NoTail&, const NoTail&) = default;
};

/// Atoms at start + j*period + cell[i].t for all j >= 0, with cell offsets in
/// (0, period).
struct PeriodicTail {
    double start = 0.0;
    double period = 1.0;
    std::vector<Atom> cell;
    friend bool operator==(const PeriodicTail&, const PeriodicTail&) = default;
};

/// Sparse tail: atom number first_index sits at first_t, and atom n+1 follows
/// atom n after a gap max(epsilon, (n+1)^(2(n+1))). All weights equal beta.
struct GapTail {
    double beta = 1.0;
    std::size_t first_index = 1;
    double first_t = 1.0;
    friend bool operator==(const GapTail&, const GapTail&) = default;
};

using Tail = std::variant<NoTail, PeriodicTail, GapTail>;

/// Gap separating atom n from atom n+1 in a GapTail: (n+1)^(2(n+1)).
double sparse_gap(std::size_t n);

/// Atomic measure sum_n beta_n delta_{t_n}, given by a finite explicit list
/// plus an optional generator rule for the tail.
///
/// Shifts are stored as an offset on the original coordinates, so composed
/// shifts agree bit for bit with a single shift by the summed amount.
class AtomicMeasure {
public:
    AtomicMeasure() = default;
    AtomicMeasure(std::vector<Atom> atoms, double epsilon,
                  SupportClass support = SupportClass::half_line, Tail tail = NoTail{});

    double epsilon() const { return epsilon_; }
    SupportClass support() const { return support_; }
    double offset() const { return offset_; }

    /// Explicit atoms in current coordinates.
    std::vector<Atom> atoms() const;
    std::size_t explicit_count() const { return base_.size(); }
    /// Tail rule expressed in current coordinates.
    Tail tail() const;
    bool has_tail() const { return !std::holds_alternative<NoTail>(tail_); }
    bool is_zero() const { return base_.empty() && !has_tail(); }

    /// All atoms (explicit and generated) with t <= upto.
    std::vector<Atom> window(double upto) const;
    /// Atoms with t in [lo, hi].
    std::vector<Atom> window(double lo, double hi) const;
    /// The first n atoms; fewer when the measure has fewer.
    std::vector<Atom> first_atoms(std::size_t n) const;

    /// Finite measure with the atoms in [lo, hi]; same epsilon and class.
    AtomicMeasure restricted(double lo, double hi) const;
    /// Same atoms with the tail rule dropped.
    AtomicMeasure truncated() const;

    AtomicMeasure shifted(double s) const;

    /// Position where the explicit list hands over to the tail rule.
    double tail_start() const;

    friend bool operator==(const AtomicMeasure& lhs, const AtomicMeasure& rhs);

private:
    std::vector<Atom> base_;
    double epsilon_ = 1.0;
    SupportClass support_ = SupportClass::half_line;
    Tail tail_ = NoTail{};
    double offset_ = 0.0;
};

struct MeasureClassBounds {
    double epsilon = 1.0;
    double C = 2.0;
};

struct Violation {
    enum class Kind { gap, first_position, weight_low, weight_high };
    Kind kind;
    std::size_t index;  // 1-based atom index
    double value;
    double bound;
};

std::string to_string(Violation::Kind kind);

struct ValidationReport {
    std::vector<Violation> violations;
    double horizon = 0.0;  // largest position inspected
    std::size_t atoms_checked = 0;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Membership test for the class of eps-separated measures with
/// 1 + 1/C <= beta <= C. Tail rules are checked through two periods
/// (periodic) or three generated atoms (gaps).
ValidationReport validate(const AtomicMeasure& mu, const MeasureClassBounds& bounds);

/// mu(. + s) as a whole-line measure.
AtomicMeasure shift(const AtomicMeasure& mu, double s);

/// Bounded-Lipschitz distance of the restrictions to the window:
/// sup |int f dmu - int f dnu| over |f| <= 1, Lip(f) <= 1, supp f in
/// [-W, W] ([0, W] when both are half-line measures). Exact for atoms.
double weak_distance(const AtomicMeasure& mu, const AtomicMeasure& nu, double window);

struct RightLimitResult {
    AtomicMeasure limit;         // candidate, restricted to [-W, W]
    bool converged = false;
    std::size_t stable_from = 0;  // first shift index from which windows agree
    double window = 0.0;
    double consumed_upto = 0.0;  // largest position of mu that was read
};

/// Looks for a window-wise limit of shift(mu, s_j) restricted to [-W, W].
/// Positions must agree within tol*epsilon and weights within tol*C.
RightLimitResult right_limit(const AtomicMeasure& mu, const std::vector<double>& shifts,
                             double window, double tol, const MeasureClassBounds& bounds);

/// Keeps mu on [0, R] and replaces the rest by a sparse GapTail. The new
/// weight repeats the last kept weight, or C when nothing is kept.
AtomicMeasure sparsify(const AtomicMeasure& mu, double R, const MeasureClassBounds& bounds);

struct DiscreteBranchSequence {
    std::vector<int> values;  // b_1, b_2, ... of the reliable window
    int declared_max = 0;     // 0: no declared bound

    std::size_t horizon() const { return values.size(); }
};

struct Periodicity {
    std::size_t start = 0;  // 1-based N
    std::size_t period = 0;
    std::size_t horizon = 0;
    friend bool operator==(const Periodicity&, const Periodicity&) = default;
};

/// Lexicographically least (N, p) with N <= max_start, p <= max_period and
/// b_{n+p} = b_n for every in-window n >= N. Only a statement about the window.
std::optional<Periodicity> is_eventually_periodic(const DiscreteBranchSequence& seq,
                                                  std::size_t max_start,
                                                  std::size_t max_period);

}  // namespace rtree
