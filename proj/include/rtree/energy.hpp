#pragma once

#include <complex>

namespace rtree {

using cplx = std::complex<double>;

/// Spectral parameter z together with its square root k, z = k^2.
///
/// Off the half-line [0, inf) the branch is Im k > 0, continuous on
/// C \ [0, inf). On the positive axis k = sqrt(E) > 0, and z = 0 gives k = 0.
class EnergyPoint {
public:
    explicit EnergyPoint(cplx z);

    /// z = -kappa^2, k = i kappa.
    static EnergyPoint below(double kappa);
    /// z = E + i eta.
    static EnergyPoint above(double E, double eta);

    cplx z() const { return z_; }
    cplx k() const { return k_; }

    /// True when z lies on [0, inf), where resolvents of the half-line
    /// operators are not defined.
    bool on_positive_axis() const { return z_.imag() == 0.0 && z_.real() >= 0.0; }

private:
    cplx z_;
    cplx k_;
};

}  // namespace rtree
