#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rtree/energy.hpp"
#include "rtree/matrix2.hpp"
#include "rtree/measure.hpp"
#include "rtree/msample.hpp"

namespace rtree {

/// Dirichlet Green kernel of -d^2/dt^2 on the half-line:
/// (i/2k)(e^{ik|t-u|} - e^{ik(t+u)}), Im k > 0.
cplx free_green(double t, double u, const EnergyPoint& z);

/// d/ds g_z(s, u) at s = t (one-sided, s -> t from the side away from u).
cplx free_green_ds(double t, double u, const EnergyPoint& z);

/// Block (n, m) of T(z) for atoms at positions tn, tm.
Eigen::Matrix2cd t_block(double tn, double tm, const EnergyPoint& z);

/// (beta/2) [[0, 1], [1, 0]].
Eigen::Matrix2d b_block(double beta);

/// Default constant in the truncation tail bound.
inline constexpr double kTailConstant = 1.0;

/// c |k| e^{-Im k t_next} / (1 - e^{-Im k eps}); zero when nothing is discarded.
double krein_tail_bound(const EnergyPoint& z, std::optional<double> first_discarded, double epsilon);

/// Truncation of T(z) + B to the first N atoms, flattened to 2N x 2N and
/// factored once. Immutable after assembly.
class KreinSystem {
public:
    KreinSystem(const EnergyPoint& z, std::vector<Atom> atoms, double tail_bound);

    const EnergyPoint& z() const { return z_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double tail_bound() const { return tail_bound_; }
    /// 1-norm condition number of the flattened matrix.
    double condition() const { return condition_; }
    /// Upper bound on ||(T+B)^{-1}||_2 via sqrt(||.||_1 ||.||_inf).
    double inverse_norm() const { return inverse_norm_; }

    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    Eigen::Matrix2cd block(std::size_t n, std::size_t m) const;
    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

    /// G_z(t, u) of the perturbed operator; t, u off the atoms.
    cplx resolvent_kernel(double t, double u) const;
    /// Column of traces (g(t_n, x), d_s g(s, x)|_{s=t_n}) used in the kernel.
    Eigen::VectorXcd trace_row(double x) const;

    /// sum_{n,m} e^{ik(t_n+t_m)} (1, ik) (T+B)^{-1}_{nm} (1, ik)^T, so that
    /// m_+(z; 0) = ik + m_correction().
    cplx m_correction() const;

private:
    EnergyPoint z_;
    std::vector<Atom> atoms_;
    double tail_bound_;
    Eigen::MatrixXcd matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    double condition_ = 1.0;
    double inverse_norm_ = 0.0;
};

/// Assemble on the first N atoms of mu. Throws std::domain_error for z in
/// [0, inf) and std::runtime_error if the truncation is numerically singular.
KreinSystem assemble_krein(const AtomicMeasure& mu, const EnergyPoint& z, std::size_t N);

/// Smallest N with tail_bound(N) * inverse_norm^2 <= tol. For finite
/// measures that is at most the atom count. Throws TruncationRefusal when
/// more than max_atoms would be needed.
std::size_t choose_truncation(const AtomicMeasure& mu, const EnergyPoint& z, double tol,
                              std::size_t max_atoms = 4096);

struct KreinOptions {
    std::optional<std::size_t> truncation;  // fixed N; otherwise adaptive
    double tol = 1e-12;
    std::size_t max_atoms = 4096;
};

/// Resolvent kernel of the half-line operator. Refuses (TruncationRefusal)
/// when a fixed truncation leaves a tail above tolerance.
cplx resolvent_kernel(const AtomicMeasure& mu, const EnergyPoint& z, double t, double u,
                      const KreinOptions& opts = {});

/// m_+(z; 0) from the block system.
MSample m_plus_krein(const AtomicMeasure& mu, const EnergyPoint& z, const KreinOptions& opts = {});

/// (m_+(-kappa^2; 0) + kappa) / (-(b_1-1)/(b_1+1) 2 kappa e^{-2 kappa t_1}).
double asymptotic_ratio(const AtomicMeasure& mu, double kappa, const KreinOptions& opts = {});

/// sup_m sum_n ||T^R_{nm}|| with T^R = T(-kappa^2) - T^0 (Schur test bound);
/// only meaningful for z = -kappa^2.
double schur_remainder_norm(const KreinSystem& sys);

/// Traces (w(t_n), w'(t_n)) of w = (A_0 - z)^{-1} f for a source f supported
/// on [a, b], by composite Simpson quadrature with `panels` panels.
std::vector<Vec2> trace_vector(const std::vector<Atom>& atoms, const EnergyPoint& z,
                               const std::function<double(double)>& f, double a, double b,
                               std::size_t panels = 2000);

}  // namespace rtree
