#include "rtree/krein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rtree {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_off_axis(const EnergyPoint& z, const char* what) {
    if (z.on_positive_axis())
        throw std::domain_error(std::string(what) + ": z must lie off [0, inf)");
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string to_string(Route route) { return route == Route::krein ? "krein" : "riccati"; }

cplx free_green(double t, double u, const EnergyPoint& z) {
    require_off_axis(z, "free_green");
    const cplx k = z.k();
    return kI / (2.0 * k) * (std::exp(kI * k * std::abs(t - u)) - std::exp(kI * k * (t + u)));
}

cplx free_green_ds(double t, double u, const EnergyPoint& z) {
    require_off_axis(z, "free_green_ds");
    const cplx k = z.k();
    return -0.5 * (sgn(t - u) * std::exp(kI * k * std::abs(t - u)) - std::exp(kI * k * (t + u)));
}

Eigen::Matrix2cd t_block(double tn, double tm, const EnergyPoint& z) {
    require_off_axis(z, "t_block");
    const cplx k = z.k();
    const cplx e1 = std::exp(kI * k * std::abs(tn - tm));
    const cplx e2 = std::exp(kI * k * (tn + tm));
    const double s_mn = sgn(tm - tn);
    const double s_nm = -s_mn;
    Eigen::Matrix2cd blk;
    blk(0, 0) = (e1 - e2) / (2.0 * kI * k);
    blk(0, 1) = 0.5 * (s_mn * e1 - e2);
    blk(1, 0) = 0.5 * (s_nm * e1 - e2);
    blk(1, 1) = -(kI * k / 2.0) * (e1 + e2);
    return blk;
}

Eigen::Matrix2d b_block(double beta) {
    if (std::isnan(beta) || !(beta >= 1.0)) throw std::domain_error("b_block: weight must be >= 1");
    Eigen::Matrix2d blk;
    blk << 0.0, beta / 2.0, beta / 2.0, 0.0;
    return blk;
}

double krein_tail_bound(const EnergyPoint& z, std::optional<double> first_discarded, double epsilon) {
    if (!first_discarded) return 0.0;
    const double im = z.k().imag();
    return kTailConstant * std::abs(z.k()) * std::exp(-im * *first_discarded) / (1.0 - std::exp(-im * epsilon));
}

// ---------------------------------------------------------------------------

KreinSystem::KreinSystem(const EnergyPoint& z, std::vector<Atom> atoms, double tail_bound)
    : z_(z), atoms_(std::move(atoms)), tail_bound_(tail_bound) {
    require_off_axis(z_, "KreinSystem");
    const auto N = static_cast<Eigen::Index>(atoms_.size());
    matrix_.resize(2 * N, 2 * N);
    for (Eigen::Index n = 0; n < N; ++n) {
        for (Eigen::Index m = 0; m < N; ++m) {
            Eigen::Matrix2cd blk = t_block(atoms_[n].t, atoms_[m].t, z_);
            if (n == m) blk += b_block(atoms_[n].beta).cast<cplx>();
            matrix_.block<2, 2>(2 * n, 2 * m) = blk;
        }
    }
    if (N == 0) return;
    lu_.compute(matrix_);
    const Eigen::MatrixXcd inv = lu_.inverse();
    const double inv1 = inv.cwiseAbs().colwise().sum().maxCoeff();
    const double invinf = inv.cwiseAbs().rowwise().sum().maxCoeff();
    const double a1 = matrix_.cwiseAbs().colwise().sum().maxCoeff();
    condition_ = a1 * inv1;
    inverse_norm_ = std::sqrt(inv1 * invinf);
    if (!std::isfinite(condition_) || condition_ > 1e14) {
        std::ostringstream os;
        os << "KreinSystem: truncated T(z)+B is numerically singular (condition estimate " << condition_ << ")";
        throw std::runtime_error(os.str());
    }
}

Eigen::Matrix2cd KreinSystem::block(std::size_t n, std::size_t m) const {
    return matrix_.block<2, 2>(2 * static_cast<Eigen::Index>(n), 2 * static_cast<Eigen::Index>(m));
}

Eigen::VectorXcd KreinSystem::solve(const Eigen::VectorXcd& rhs) const {
    if (atoms_.empty()) return Eigen::VectorXcd(0);
    return lu_.solve(rhs);
}

Eigen::VectorXcd KreinSystem::trace_row(double x) const {
    Eigen::VectorXcd h(2 * static_cast<Eigen::Index>(atoms_.size()));
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
        const auto i = 2 * static_cast<Eigen::Index>(n);
        h(i) = free_green(atoms_[n].t, x, z_);
        h(i + 1) = free_green_ds(atoms_[n].t, x, z_);
    }
    return h;
}

cplx KreinSystem::resolvent_kernel(double t, double u) const {
    for (const auto& a : atoms_)
        if (a.t == t || a.t == u) throw std::invalid_argument("resolvent_kernel: point lies on an atom");
    const cplx g = free_green(t, u, z_);
    if (atoms_.empty()) return g;
    const Eigen::VectorXcd ht = trace_row(t);
    const Eigen::VectorXcd hu = trace_row(u);
    return g + (ht.transpose() * solve(hu)).value();
}

cplx KreinSystem::m_correction() const {
    if (atoms_.empty()) return 0.0;
    const cplx ik = kI * z_.k();
    Eigen::VectorXcd v(2 * static_cast<Eigen::Index>(atoms_.size()));
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
        const cplx e = std::exp(ik * atoms_[n].t);
        v(2 * static_cast<Eigen::Index>(n)) = e;
        v(2 * static_cast<Eigen::Index>(n) + 1) = ik * e;
    }
    return v.transpose() * solve(v);
}

// ---------------------------------------------------------------------------

KreinSystem assemble_krein(const AtomicMeasure& mu, const EnergyPoint& z, std::size_t N) {
    require_off_axis(z, "assemble_krein");
    auto atoms = mu.first_atoms(N + 1);
    if (atoms.size() < N) {
        std::ostringstream os;
        os << "assemble_krein: measure has only " << atoms.size() << " atoms, truncation " << N << " requested";
        throw std::invalid_argument(os.str());
    }
    for (const auto& a : atoms)
        if (!(a.t > 0.0)) throw std::invalid_argument("assemble_krein: atoms must lie in (0, inf)");
    std::optional<double> next;
    if (atoms.size() > N) {
        next = atoms[N].t;
        atoms.resize(N);
    }
    const double tail = krein_tail_bound(z, next, mu.epsilon());
    return KreinSystem(z, std::move(atoms), tail);
}

std::size_t choose_truncation(const AtomicMeasure& mu, const EnergyPoint& z, double tol, std::size_t max_atoms) {
    require_off_axis(z, "choose_truncation");
    if (!mu.has_tail()) return mu.explicit_count();
    auto meets = [&](const KreinSystem& s) {
        const double inv = s.inverse_norm();
        return s.tail_bound() * inv * inv <= tol;
    };
    std::size_t hi = std::max<std::size_t>(1, mu.explicit_count());
    double inv_hi = 0.0;
    for (;;) {
        if (hi > max_atoms) {
            throw TruncationRefusal("choose_truncation: tail bound not met within the atom cap", 0);
        }
        const auto sys = assemble_krein(mu, z, hi);
        if (meets(sys)) {
            inv_hi = sys.inverse_norm();
            break;
        }
        hi *= 2;
    }
    // The inverse norm varies little with N once the tail is small; scan down
    // with it, then confirm on the candidate.
    const auto atoms = mu.first_atoms(hi + 1);
    std::size_t n = hi;
    while (n > 1) {
        const double tb = krein_tail_bound(z, atoms[n - 1].t, mu.epsilon());
        if (tb * inv_hi * inv_hi > tol) break;
        --n;
    }
    for (; n < hi; ++n)
        if (meets(assemble_krein(mu, z, n))) return n;
    return hi;
}

namespace {

KreinSystem system_for(const AtomicMeasure& mu, const EnergyPoint& z, const KreinOptions& opts) {
    if (opts.truncation) {
        auto sys = assemble_krein(mu, z, *opts.truncation);
        const double inv = sys.inverse_norm();
        if (sys.tail_bound() * inv * inv > opts.tol) {
            std::size_t required = 0;
            if (mu.has_tail()) {
                try {
                    required = choose_truncation(mu, z, opts.tol, opts.max_atoms);
                } catch (const TruncationRefusal&) {
                }
            } else {
                required = mu.explicit_count();
                for (std::size_t n = *opts.truncation + 1; n < mu.explicit_count(); ++n) {
                    const auto cand = assemble_krein(mu, z, n);
                    const double ci = cand.inverse_norm();
                    if (cand.tail_bound() * ci * ci <= opts.tol) {
                        required = n;
                        break;
                    }
                }
            }
            std::ostringstream os;
            os << "truncation N=" << *opts.truncation << " leaves tail bound " << sys.tail_bound()
               << " above tolerance " << opts.tol << "; required N=" << required;
            throw TruncationRefusal(os.str(), required);
        }
        return sys;
    }
    return assemble_krein(mu, z, choose_truncation(mu, z, opts.tol, opts.max_atoms));
}

}  // namespace

cplx resolvent_kernel(const AtomicMeasure& mu, const EnergyPoint& z, double t, double u, const KreinOptions& opts) {
    return system_for(mu, z, opts).resolvent_kernel(t, u);
}

MSample m_plus_krein(const AtomicMeasure& mu, const EnergyPoint& z, const KreinOptions& opts) {
    const auto sys = system_for(mu, z, opts);
    MSample s;
    s.z = z;
    s.t = 0.0;
    s.side = Side::plus;
    s.route = Route::krein;
    s.value = kI * z.k() + sys.m_correction();
    s.uncertainty = sys.tail_bound();
    s.truncation = sys.size();
    s.condition = sys.condition();
    return s;
}

double asymptotic_ratio(const AtomicMeasure& mu, double kappa, const KreinOptions& opts) {
    const auto first = mu.first_atoms(1);
    if (first.empty()) throw std::domain_error("asymptotic_ratio: measure must be nonzero");
    if (!(kappa > 0.0)) throw std::domain_error("asymptotic_ratio: kappa must be positive");
    const EnergyPoint z = EnergyPoint::below(kappa);
    const auto sys = system_for(mu, z, opts);
    // m + kappa is exactly the correction sum, which avoids cancellation.
    const double correction = sys.m_correction().real();
    const double beta = first[0].beta;
    const double q = 2.0 * beta / (beta * beta + 1.0);  // (b-1)/(b+1)
    const double t1 = first[0].t;
    const double leading = -q * 2.0 * kappa * std::exp(-2.0 * kappa * t1);
    return correction / leading;
}

double schur_remainder_norm(const KreinSystem& sys) {
    const double kappa = sys.z().k().imag();
    const auto N = sys.size();
    double best = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
        double col = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            Eigen::Matrix2cd r = t_block(sys.atoms()[n].t, sys.atoms()[m].t, sys.z());
            if (n == m) {
                r(0, 0) -= -1.0 / (2.0 * kappa);
                r(1, 1) -= kappa / 2.0;
            }
            Eigen::JacobiSVD<Eigen::Matrix2cd> svd(r);
            col += svd.singularValues()(0);
        }
        best = std::max(best, col);
    }
    return best;
}

std::vector<Vec2> trace_vector(const std::vector<Atom>& atoms, const EnergyPoint& z,
                               const std::function<double(double)>& f, double a, double b, std::size_t panels) {
    require_off_axis(z, "trace_vector");
    if (!(b > a)) throw std::invalid_argument("trace_vector: empty source support");
    if (panels % 2 == 1) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    std::vector<Vec2> out;
    out.reserve(atoms.size());
    for (const auto& atom : atoms) {
        Vec2 acc{0.0, 0.0};
        for (std::size_t i = 0; i <= panels; ++i) {
            const double u = a + h * static_cast<double>(i);
            const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            const double fu = f(u);
            acc[0] += w * free_green(atom.t, u, z) * fu;
            acc[1] += w * free_green_ds(atom.t, u, z) * fu;
        }
        out.push_back({acc[0] * h / 3.0, acc[1] * h / 3.0});
    }
    return out;
}

}  // namespace rtree
