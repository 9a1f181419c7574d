#include "rtree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rtree/parallel.hpp"

namespace rtree {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("multiplicity overflows 64 bits");
    return out;
}

}  // namespace

void TreeSpec::check() const {
    double prev = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& v = params[i];
        if (v.b < 2) throw std::invalid_argument("TreeSpec: branching numbers must be integers >= 2");
        if (!(v.t - prev >= epsilon))
            throw std::invalid_argument("TreeSpec: generation " + std::to_string(i + 1) +
                                        " is closer than epsilon to its predecessor");
        prev = v.t;
    }
}

AtomicMeasure TreeSpec::measure() const {
    std::vector<Atom> atoms;
    atoms.reserve(params.size());
    for (const auto& v : params) atoms.push_back(Atom::from_b(v.t, v.b));
    return AtomicMeasure(std::move(atoms), epsilon);
}

std::uint64_t component_multiplicity(const TreeSpec& tree, std::size_t k) {
    if (k == 0) return 1;
    if (k > tree.params.size()) throw std::invalid_argument("component_multiplicity: k beyond the tree");
    std::uint64_t m = 1;
    for (std::size_t i = 0; i + 1 < k; ++i) m = checked_mul(m, static_cast<std::uint64_t>(tree.params[i].b));
    return checked_mul(m, static_cast<std::uint64_t>(tree.params[k - 1].b - 1));
}

std::uint64_t subtree_count(const TreeSpec& tree, std::size_t K) {
    if (K > tree.params.size()) throw std::invalid_argument("subtree_count: K beyond the tree");
    std::uint64_t m = 1;
    for (std::size_t i = 0; i < K; ++i) m = checked_mul(m, static_cast<std::uint64_t>(tree.params[i].b));
    return m;
}

std::vector<ComponentSpec> decompose(const TreeSpec& tree, std::size_t K) {
    tree.check();
    if (K > tree.params.size()) throw std::invalid_argument("decompose: K exceeds the represented generations");
    std::vector<ComponentSpec> out;
    out.reserve(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        const double tk = k == 0 ? 0.0 : tree.params[k - 1].t;
        std::vector<Atom> atoms;
        for (std::size_t n = k; n < tree.params.size(); ++n)
            atoms.push_back(Atom::from_b(tree.params[n].t - tk, tree.params[n].b));
        out.push_back({k, AtomicMeasure(std::move(atoms), tree.epsilon), component_multiplicity(tree, k)});
    }
    return out;
}

TreeReport tree_spectral_report(const TreeSpec& tree, std::size_t K, const std::vector<double>& energies, double eta,
                                unsigned threads) {
    if (eta < 0.0) throw std::invalid_argument("tree_spectral_report: eta must be >= 0");
    TreeReport rep;
    rep.energies = energies;
    rep.eta = eta;
    rep.components = decompose(tree, K);
    rep.uncounted_multiplicity = subtree_count(tree, K);
    rep.total_density.assign(energies.size(), 0.0);
    for (const auto& comp : rep.components) {
        const DensityReport d = eta > 0.0 ? spectral_density(comp.measure, energies, eta, kSpectralThreshold, threads)
                                          : spectral_density(comp.measure, energies, EtaSchedule{},
                                                             kSpectralThreshold, threads);
        std::vector<double> dens;
        dens.reserve(energies.size());
        for (std::size_t i = 0; i < energies.size(); ++i) {
            dens.push_back(d.samples[i].density);
            rep.total_density[i] += static_cast<double>(comp.multiplicity) * d.samples[i].density;
        }
        rep.component_density.push_back(std::move(dens));
    }
    return rep;
}

DiscreteSpectrum discrete_truncation_spectrum(const DiscreteBranchSequence& seq, std::size_t depth, std::size_t cap) {
    const auto& b = seq.values;
    if (depth >= b.size())
        throw std::invalid_argument("discrete_truncation_spectrum: depth must be below the window length");
    for (int v : b)
        if (v < 1) throw std::invalid_argument("discrete_truncation_spectrum: branching numbers must be >= 1");

    // Generation sizes and vertex count.
    std::size_t total = 1;
    std::size_t gen = 1;
    for (std::size_t g = 1; g <= depth; ++g) {
        gen *= static_cast<std::size_t>(b[g - 1]);
        total += gen;
        if (total > cap) throw std::invalid_argument("discrete_truncation_spectrum: vertex cap exceeded");
    }

    const auto n = static_cast<Eigen::Index>(total);
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd diag(n);
    diag(0) = b[0];
    Eigen::Index first_of_gen = 0;
    Eigen::Index gen_size = 1;
    Eigen::Index next = 1;
    for (std::size_t g = 0; g < depth; ++g) {
        const Eigen::Index children = b[g];
        for (Eigen::Index p = 0; p < gen_size; ++p) {
            const Eigen::Index parent = first_of_gen + p;
            for (Eigen::Index c = 0; c < children; ++c, ++next) {
                adj(parent, next) = adj(next, parent) = 1.0;
                diag(next) = b[g + 1] + 1.0;
            }
        }
        first_of_gen += gen_size;
        gen_size *= children;
    }

    DiscreteSpectrum out;
    out.vertices = total;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_adj(adj, Eigen::EigenvaluesOnly);
    Eigen::MatrixXd lap = -adj;
    lap.diagonal() += diag;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_lap(lap, Eigen::EigenvaluesOnly);
    out.adjacency.assign(es_adj.eigenvalues().data(), es_adj.eigenvalues().data() + n);
    out.laplacian.assign(es_lap.eigenvalues().data(), es_lap.eigenvalues().data() + n);
    std::sort(out.adjacency.begin(), out.adjacency.end());
    std::sort(out.laplacian.begin(), out.laplacian.end());
    return out;
}

Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram: need bins > 0 and hi > lo");
    Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
    const double w = (hi - lo) / static_cast<double>(bins);
    for (double v : values) {
        if (v < lo || v > hi) continue;
        auto i = static_cast<std::size_t>((v - lo) / w);
        h.counts[std::min(i, bins - 1)]++;
    }
    return h;
}

}  // namespace rtree
