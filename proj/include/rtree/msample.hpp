#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "rtree/energy.hpp"

namespace rtree {

enum class Side { plus, minus };
enum class Route { krein, riccati };

std::string to_string(Route route);

/// One evaluation of m_+(z; t) or m_-(z; t) with its provenance.
struct MSample {
    EnergyPoint z{cplx(-1.0, 0.0)};
    double t = 0.0;
    Side side = Side::plus;
    cplx value{0.0};
    bool at_infinity = false;  // projective pole [0 : 1]
    Route route = Route::riccati;
    double uncertainty = 0.0;  // Weyl disk radius or truncation tail bound
    std::size_t truncation = 0;  // atoms used
    double condition = 0.0;      // linear-solve condition estimate (krein route)
};

class TruncationRefusal : public std::runtime_error {
public:
    TruncationRefusal(const std::string& what, std::size_t required)
        : std::runtime_error(what), required_(required) {}
    /// Number of atoms needed to meet the tolerance; 0 when unknown.
    std::size_t required() const { return required_; }

private:
    std::size_t required_;
};

}  // namespace rtree
