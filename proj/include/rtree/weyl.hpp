#pragma once

#include <cstddef>
#include <vector>

#include "rtree/energy.hpp"
#include "rtree/matrix2.hpp"
#include "rtree/measure.hpp"
#include "rtree/msample.hpp"

namespace rtree {

struct RiccatiOptions {
    /// Generated atoms of a GapTail taken into account before closing with a
    /// free half-line; the reported uncertainty is the Weyl disk radius there.
    std::size_t gap_atoms = 4;
};

/// m_+(z; t) = f'_+/f_+ by propagating the projective state [f : f'] leftward
/// from the tail closure. Throws std::invalid_argument if t sits on an atom.
MSample riccati_m_plus(const AtomicMeasure& mu, const EnergyPoint& z, double t, const RiccatiOptions& opts = {});

/// m_-(z; t) = -f'_-/f_- for the whole-line operator, propagating rightward
/// from a free left half-line.
MSample m_minus(const AtomicMeasure& mu, const EnergyPoint& z, double t);

/// The state [f : f'] of the L^2-at-+inf solution at the tail start of mu
/// (free: [1 : ik]; periodic: Floquet solution).
struct TailClosure {
    double position;
    Vec2 state;
};
TailClosure tail_closure(const AtomicMeasure& mu, const EnergyPoint& z, const RiccatiOptions& opts = {});

/// Disk that contains m_+(z; 0) for every measure agreeing with mu on (0, N).
///
/// For Im z > 0 it is the Moebius image of the closed upper half-plane under
/// T_z(N)^{-1}. For z < 0 the same map is applied to [-inf, -kappa], the set
/// of m_+(z; N) values reachable by weights beta >= 1, giving a segment of the
/// real line (center and half-length).
struct WeylDisk {
    EnergyPoint z{cplx(0.0, 1.0)};
    double depth = 0.0;
    cplx center{0.0};
    double radius = 0.0;

    bool contains(cplx m, double slack = 1e-12) const {
        return std::abs(m - center) <= radius * (1.0 + slack) + slack;
    }
};

WeylDisk weyl_disk(const AtomicMeasure& mu, const EnergyPoint& z, double depth);

struct EtaSchedule {
    double eta0 = 0.0;  // 0 selects 1e-2 * (1 + E)
    std::size_t max_levels = 40;
    double tol = 1e-8;
};

struct BoundaryValue {
    MSample sample;       // at E + i0
    bool converged = false;
    double estimate = 0.0;  // difference of the last two extrapolants
    std::size_t levels = 0;
};

/// Richardson extrapolation (three levels, eta halved each step) of
/// m_+(E + i eta; t), or m_-(E + i eta; t) for side = minus. Non-convergence
/// is flagged, not thrown.
BoundaryValue boundary_value(const AtomicMeasure& mu, double E, const EtaSchedule& schedule = {}, double t = 0.0,
                             Side side = Side::plus);

struct DefectSample {
    double E;
    cplx m_plus;
    cplx m_minus;
    double defect;  // |m_+ + conj(m_-)|
    bool converged;
};

struct ReflectionlessReport {
    std::vector<DefectSample> samples;
    double sup = 0.0;
    double mean = 0.0;
};

ReflectionlessReport reflectionless_defect(const AtomicMeasure& mu, const std::vector<double>& energies, double t,
                                           const EtaSchedule& schedule = {}, unsigned threads = 1);

inline constexpr double kSpectralThreshold = 1e-3;

struct SpectralSet {
    std::vector<double> energies;
    std::vector<bool> member;  // delta < Im m_+ < 1/delta
    double delta = kSpectralThreshold;

    /// Fraction of grid points in the set.
    double fraction() const;
};

struct DensitySample {
    double E;
    double eta;  // 0 after extrapolation
    cplx m_plus;
    double density;  // Im m_+ / pi
    bool converged;
};

struct DensityReport {
    std::vector<DensitySample> samples;
    SpectralSet set;
};

/// pi^{-1} Im m_+(E + i eta; 0) at fixed eta > 0.
DensityReport spectral_density(const AtomicMeasure& mu, const std::vector<double>& energies, double eta,
                               double delta = kSpectralThreshold, unsigned threads = 1);

/// Same with boundary values E + i0 from boundary_value.
DensityReport spectral_density(const AtomicMeasure& mu, const std::vector<double>& energies,
                               const EtaSchedule& schedule, double delta = kSpectralThreshold, unsigned threads = 1);

/// Transfer matrix over one cell of a periodic tail (decoupling atoms not allowed).
TransferMatrix2 periodic_monodromy(const PeriodicTail& tail, const EnergyPoint& z);

}  // namespace rtree
