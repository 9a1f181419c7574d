#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rtree/measure.hpp"
#include "rtree/weyl.hpp"

namespace rtree {

struct TreeVertex {
    double t;  // distance from the root
    int b;     // branching, >= 2
};

/// Radial metric tree: vertex generations at t_1 < t_2 < ... with
/// branching b_n; the root has branching 1. Finitely many generations means
/// the last ones end in half-lines.
struct TreeSpec {
    std::vector<TreeVertex> params;
    double epsilon = 1.0;
    double C = 2.0;

    /// Throws std::invalid_argument on unsorted positions, gaps below epsilon
    /// or branching below 2.
    void check() const;
    /// The measure sum beta(b_n) delta_{t_n}.
    AtomicMeasure measure() const;
};

/// One summand A_k^+ of the direct-sum decomposition.
struct ComponentSpec {
    std::size_t k = 0;
    AtomicMeasure measure;  // atoms t_n - t_k, n > k
    std::uint64_t multiplicity = 1;
};

/// b_1 ... b_{k-1} (b_k - 1), and 1 for k = 0. Throws std::overflow_error.
std::uint64_t component_multiplicity(const TreeSpec& tree, std::size_t k);
/// b_1 ... b_K: the number of generation-K subtrees.
std::uint64_t subtree_count(const TreeSpec& tree, std::size_t K);

/// Components k = 0..K.
std::vector<ComponentSpec> decompose(const TreeSpec& tree, std::size_t K);

struct TreeReport {
    std::vector<double> energies;
    std::vector<double> total_density;                  // sum_k multiplicity_k density_k
    std::vector<std::vector<double>> component_density;  // [k][E]
    std::vector<ComponentSpec> components;
    std::uint64_t uncounted_multiplicity = 0;  // b_1 ... b_K beyond the truncation
    double eta = 0.0;                          // 0: boundary values
};

/// Multiplicity-weighted spectral densities of the components up to K.
/// eta > 0 evaluates at E + i eta; eta = 0 uses boundary_value.
TreeReport tree_spectral_report(const TreeSpec& tree, std::size_t K, const std::vector<double>& energies, double eta,
                                unsigned threads = 1);

struct DiscreteSpectrum {
    std::size_t vertices = 0;
    std::vector<double> adjacency;  // sorted eigenvalues
    std::vector<double> laplacian;  // (b(x)+1) f(x) - sum f(y), root: b(O) f(O) - sum f(y)
};

inline constexpr std::size_t kDiscreteVertexCap = 4000;

/// Eigenvalues of the radial tree truncated at `depth` generations below the
/// root, where the root has b_1 children and generation g vertices have
/// b_{g+1}. Requires depth < window length so every diagonal entry is known.
DiscreteSpectrum discrete_truncation_spectrum(const DiscreteBranchSequence& seq, std::size_t depth,
                                              std::size_t cap = kDiscreteVertexCap);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi);

}  // namespace rtree
