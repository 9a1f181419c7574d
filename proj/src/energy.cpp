#include "rtree/energy.hpp"

#include <cmath>

namespace rtree {

EnergyPoint::EnergyPoint(cplx z) : z_(z) {
    if (z.imag() == 0.0 && z.real() >= 0.0) {
        k_ = cplx(std::sqrt(z.real()), 0.0);
    } else {
        // -z avoids the negative real axis, so its principal root has Re > 0
        // and k = i * sqrt(-z) has Im k > 0.
        const cplx w = std::sqrt(cplx(-z.real(), -z.imag() + 0.0));
        k_ = cplx(0.0, 1.0) * w;
    }
}

EnergyPoint EnergyPoint::below(double kappa) {
    EnergyPoint p(cplx(-kappa * kappa, 0.0));
    p.k_ = cplx(0.0, std::abs(kappa));
    return p;
}

EnergyPoint EnergyPoint::above(double E, double eta) { return EnergyPoint(cplx(E, eta)); }

}  // namespace rtree
