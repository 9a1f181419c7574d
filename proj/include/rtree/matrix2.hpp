#pragma once

#include <array>
#include <complex>
#include <iosfwd>

#include "rtree/energy.hpp"

namespace rtree {

using Vec2 = std::array<cplx, 2>;

/// 2x2 complex matrix acting on (f, f') pairs.
///
/// Row 1 is value-like and row 2 derivative-like. Every matrix produced by
/// this library (free propagators and jump matrices) has determinant 1, and
/// products keep that up to rounding.
struct TransferMatrix2 {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static constexpr TransferMatrix2 identity() { return {}; }

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }

    /// Inverse assuming unit determinant: [[d, -b], [-c, a]].
    TransferMatrix2 unimodular_inverse() const { return {d, -b, -c, a}; }
    TransferMatrix2 inverse() const;

    Vec2 apply(const Vec2& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }

    /// Largest singular value, closed form.
    double spectral_norm() const;
    double frobenius_norm() const;
};

TransferMatrix2 operator*(const TransferMatrix2& lhs, const TransferMatrix2& rhs);

/// Max-entry distance, used in tests and diagnostics.
double max_abs_diff(const TransferMatrix2& lhs, const TransferMatrix2& rhs);

std::ostream& operator<<(std::ostream& os, const TransferMatrix2& m);

}  // namespace rtree
