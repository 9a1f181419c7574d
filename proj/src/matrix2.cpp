#include "rtree/matrix2.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rtree {

TransferMatrix2 TransferMatrix2::inverse() const {
    const cplx dt = det();
    if (dt == cplx(0.0)) throw std::domain_error("TransferMatrix2::inverse: singular matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
}

double TransferMatrix2::frobenius_norm() const {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
}

double TransferMatrix2::spectral_norm() const {
    // sigma_max^2 = (F^2 + sqrt(F^4 - 4|det|^2)) / 2, F the Frobenius norm.
    const double f2 = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    const double dt = std::abs(det());
    const double disc = std::max(0.0, (f2 - 2.0 * dt) * (f2 + 2.0 * dt));
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

TransferMatrix2 operator*(const TransferMatrix2& l, const TransferMatrix2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

double max_abs_diff(const TransferMatrix2& l, const TransferMatrix2& r) {
    return std::max({std::abs(l.a - r.a), std::abs(l.b - r.b), std::abs(l.c - r.c),
                     std::abs(l.d - r.d)});
}

std::ostream& operator<<(std::ostream& os, const TransferMatrix2& m) {
    return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

}  // namespace rtree
