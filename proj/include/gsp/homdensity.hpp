#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/graphon.hpp"
#include "gsp/rng.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Motifs
//
// Edges are ordered pairs contributing one factor S_{b(i)b(j)} each to the
// homomorphism product. Simple motifs list each undirected edge once; the
// 2-cycle is the walk motif {(0,1),(1,0)}, whose density is trace(S^2)/n^2.
// ---------------------------------------------------------------------------

struct Motif {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges;

    static Motif make(int n_vertices, std::vector<std::pair<int, int>> edges) {
        if (n_vertices < 1 || n_vertices > 8)
            throw std::invalid_argument("motif: vertex count must be in 1..8");
        for (const auto& [i, j] : edges) {
            if (i == j) throw std::invalid_argument("motif: self-loops are not allowed");
            if (i < 0 || j < 0 || i >= n_vertices || j >= n_vertices)
                throw std::invalid_argument("motif: edge endpoint out of range");
        }
        auto sorted = edges;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("motif: duplicate edge");
        return Motif{n_vertices, std::move(edges)};
    }
};

inline Motif motif_edge() { return Motif::make(2, {{0, 1}}); }

inline Motif motif_cycle(int k) {
    if (k < 2) throw std::invalid_argument("motif_cycle: k must be >= 2");
    if (k == 2) return Motif::make(2, {{0, 1}, {1, 0}});
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < k; ++i) edges.emplace_back(i, (i + 1) % k);
    return Motif::make(k, std::move(edges));
}

inline Motif motif_path(int vertices) {
    if (vertices < 2) throw std::invalid_argument("motif_path: need >= 2 vertices");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < vertices; ++i) edges.emplace_back(i, i + 1);
    return Motif::make(vertices, std::move(edges));
}

inline Motif motif_complete(int vertices) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < vertices; ++i)
        for (int j = i + 1; j < vertices; ++j) edges.emplace_back(i, j);
    return Motif::make(vertices, std::move(edges));
}

/// Motif text file: first non-comment line is the vertex count, then one
/// "i j" line per edge, 0-based.
inline Motif load_motif(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    int n = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        if (n < 0) {
            ss >> n;
            continue;
        }
        int i, j;
        if (!(ss >> i >> j)) throw std::runtime_error(path + ": bad edge line '" + line + "'");
        edges.emplace_back(i, j);
    }
    if (n < 0) throw std::runtime_error(path + ": missing vertex count");
    return Motif::make(n, std::move(edges));
}

inline void save_motif(const Motif& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << f.n_vertices << "\n";
    for (const auto& [i, j] : f.edges) out << i << " " << j << "\n";
}

// ---------------------------------------------------------------------------
// Homomorphism densities
// ---------------------------------------------------------------------------

namespace hom_detail {

constexpr double kMapBudget = 1e9;

/// Sum over all assignments with vertex 0 pinned; the remaining vertices run
/// through an odometer.
inline double pinned_sum(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& measures,
                         const Motif& f, int pinned) {
    const int n = static_cast<int>(measures.size());
    const int k = f.n_vertices;
    std::vector<int> assign(static_cast<std::size_t>(k), 0);
    assign[0] = pinned;
    double total = 0.0;
    while (true) {
        double prod = measures[pinned];
        for (int v = 1; v < k; ++v) prod *= measures[assign[static_cast<std::size_t>(v)]];
        if (prod != 0.0)
            for (const auto& [a, b] : f.edges) {
                prod *= kernel(assign[static_cast<std::size_t>(a)], assign[static_cast<std::size_t>(b)]);
                if (prod == 0.0) break;
            }
        total += prod;
        int v = k - 1;
        while (v >= 1 && assign[static_cast<std::size_t>(v)] == n - 1) {
            assign[static_cast<std::size_t>(v)] = 0;
            --v;
        }
        if (v < 1) break;
        ++assign[static_cast<std::size_t>(v)];
    }
    return total;
}

/// Deterministic pairwise tree reduction; the result does not depend on how
/// the partial sums were scheduled.
inline double tree_reduce(std::vector<double> parts) {
    if (parts.empty()) return 0.0;
    while (parts.size() > 1) {
        std::vector<double> next;
        next.reserve(parts.size() / 2 + 1);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
        if (parts.size() % 2) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts[0];
}

inline double density_over_kernel(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& measures,
                                  const Motif& f, int threads) {
    const int n = static_cast<int>(measures.size());
    if (std::pow(static_cast<double>(n), f.n_vertices) > kMapBudget)
        throw std::runtime_error(
            "homomorphism density: brute-force budget exceeded (" + std::to_string(n) + "^" +
            std::to_string(f.n_vertices) + " maps); use the cycle fast path or monte_carlo");
    if (f.n_vertices == 1) return measures.sum();

    std::vector<double> parts(static_cast<std::size_t>(n));
    if (threads <= 1 || n < 4) {
        for (int a = 0; a < n; ++a) parts[static_cast<std::size_t>(a)] = pinned_sum(kernel, measures, f, a);
    } else {
        std::vector<std::future<void>> jobs;
        std::atomic<int> cursor{0};
        const int workers = std::min(threads, n);
        for (int t = 0; t < workers; ++t)
            jobs.push_back(std::async(std::launch::async, [&]() {
                for (int a = cursor.fetch_add(1); a < n; a = cursor.fetch_add(1))
                    parts[static_cast<std::size_t>(a)] = pinned_sum(kernel, measures, f, a);
            }));
        for (auto& j : jobs) j.get();
    }
    return tree_reduce(std::move(parts));
}

} // namespace hom_detail

/// t(F,G) = sum over all vertex maps of the edge-weight product, divided by
/// n^{|V'|}; the sum ranges over all maps, not just injective ones.
inline double hom_density_graph(const Motif& f, const Graph& g, int threads = 1) {
    const Eigen::VectorXd measures = Eigen::VectorXd::Constant(g.n, 1.0 / g.n);
    return hom_detail::density_over_kernel(g.S, measures, f, threads);
}

/// t(C_k, G) = trace(S^k) / n^k via repeated multiplication.
inline double cycle_density_graph(int k, const Graph& g) {
    if (k < 2) throw std::invalid_argument("cycle_density_graph: k must be >= 2");
    Eigen::MatrixXd p = g.S;
    for (int i = 1; i < k; ++i) p = (p * g.S).eval();
    return p.trace() / std::pow(static_cast<double>(g.n), k);
}

// ---------------------------------------------------------------------------
// Step kernels: block matrix + block measures. Used for exact graphon
// densities, exact operator norms and cut norms. Values may be negative when
// the kernel is a difference of graphons.
// ---------------------------------------------------------------------------

struct StepKernel {
    Eigen::VectorXd measures;  // positive, sums to 1 for a graphon
    Eigen::MatrixXd values;    // symmetric
};

/// Block representation of a block-family graphon (constant, SBM, step,
/// grid-sampled). Closed-form kernels have no block structure.
inline StepKernel to_step_kernel(const Graphon& w) {
    return std::visit(
        [](const auto& g) -> StepKernel {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantGraphon>) {
                return {Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, g.p)};
            } else if constexpr (std::is_same_v<T, SbmGraphon>) {
                const int k = static_cast<int>(g.boundaries.size());
                Eigen::VectorXd m(k);
                double prev = 0.0;
                for (int i = 0; i < k; ++i) {
                    m[i] = g.boundaries[static_cast<std::size_t>(i)] - prev;
                    prev = g.boundaries[static_cast<std::size_t>(i)];
                }
                return {std::move(m), g.block_probs};
            } else if constexpr (std::is_same_v<T, StepGraphon>) {
                const int k = static_cast<int>(g.values.rows());
                return {Eigen::VectorXd::Constant(k, 1.0 / k), g.values};
            } else if constexpr (std::is_same_v<T, GridSampledGraphon>) {
                const int k = static_cast<int>(g.values.rows());
                return {Eigen::VectorXd::Constant(k, 1.0 / k), g.values};
            } else {
                throw std::invalid_argument("step kernel: graphon has no block structure");
            }
        },
        w.variant());
}

/// W1 - W2 on the common refinement of two block-family graphons.
inline StepKernel step_kernel_difference(const Graphon& w1, const Graphon& w2) {
    const StepKernel a = to_step_kernel(w1);
    const StepKernel b = to_step_kernel(w2);
    std::vector<double> cuts{0.0};
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.measures.size(); ++i) cuts.push_back(acc += a.measures[i]);
    acc = 0.0;
    for (Eigen::Index i = 0; i < b.measures.size(); ++i) cuts.push_back(acc += b.measures[i]);
    cuts.back() = 1.0;
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               cuts.end());
    const int k = static_cast<int>(cuts.size()) - 1;
    StepKernel d;
    d.measures.resize(k);
    d.values.resize(k, k);
    std::vector<double> mids(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        d.measures[i] = cuts[static_cast<std::size_t>(i) + 1] - cuts[static_cast<std::size_t>(i)];
        mids[static_cast<std::size_t>(i)] = 0.5 * (cuts[static_cast<std::size_t>(i)] + cuts[static_cast<std::size_t>(i) + 1]);
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            d.values(i, j) = w1.eval(mids[static_cast<std::size_t>(i)], mids[static_cast<std::size_t>(j)]) -
                             w2.eval(mids[static_cast<std::size_t>(i)], mids[static_cast<std::size_t>(j)]);
    return d;
}

/// Exact eigenvalues of the operator induced by a step kernel: the spectrum
/// of D^{1/2} B D^{1/2} with D = diag(measures), signed-ordered.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> step_kernel_eigenvalues(const StepKernel& k) {
    const Eigen::VectorXd root = k.measures.cwiseSqrt();
    const Eigen::MatrixXd m = root.asDiagonal() * k.values * root.asDiagonal();
    return signed_eigenvalues(m);
}

struct DensityEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Exact density for block-family graphons via a measure-weighted hom count.
inline DensityEstimate hom_density_graphon_exact(const Motif& f, const Graphon& w, int threads = 1) {
    const StepKernel k = to_step_kernel(w);
    return {hom_detail::density_over_kernel(k.values, k.measures, f, threads), 0.0};
}

/// Monte Carlo density: i.i.d. uniform vertex positions, averaged edge-weight
/// products, with the sample standard error.
inline DensityEstimate hom_density_graphon_mc(const Motif& f, const Graphon& w, int samples,
                                              Rng& rng) {
    if (samples < 2) throw std::invalid_argument("hom_density_graphon_mc: need >= 2 samples");
    double sum = 0.0;
    double sumsq = 0.0;
    std::vector<double> u(static_cast<std::size_t>(f.n_vertices));
    for (int s = 0; s < samples; ++s) {
        for (auto& ui : u) ui = rng.uniform();
        double prod = 1.0;
        for (const auto& [a, b] : f.edges) prod *= w.eval(u[static_cast<std::size_t>(a)], u[static_cast<std::size_t>(b)]);
        sum += prod;
        sumsq += prod * prod;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, (sumsq - samples * mean * mean) / (samples - 1));
    return {mean, std::sqrt(var / samples)};
}

struct CycleIdentityReport {
    double density = 0.0;       // t(C_k, .)
    double spectral_sum = 0.0;  // sum_j lambda_j^k
    double gap = 0.0;
};

/// Graph side: trace identity t(C_k,G) = sum_j (lambda_j(S)/n)^k, exact.
inline CycleIdentityReport cycle_spectral_identity_check(int k, const Graph& g) {
    CycleIdentityReport r;
    r.density = cycle_density_graph(k, g);
    auto [pos, neg] = signed_eigenvalues(g.S);
    const double nk = std::pow(static_cast<double>(g.n), k);
    for (Eigen::Index i = 0; i < pos.size(); ++i) r.spectral_sum += std::pow(pos[i], k) / nk;
    for (Eigen::Index i = 0; i < neg.size(); ++i) r.spectral_sum += std::pow(neg[i], k) / nk;
    r.gap = std::abs(r.density - r.spectral_sum);
    return r;
}

/// Graphon side: t(C_k,W) against the power sum of the retained basis
/// eigenvalues. Exact for block families with a full basis.
inline CycleIdentityReport cycle_spectral_identity_check(int k, const Graphon& w,
                                                         const GraphonBasis& basis) {
    CycleIdentityReport r;
    r.density = hom_density_graphon_exact(motif_cycle(k), w).value;
    for (int j : basis.signed_indices()) r.spectral_sum += std::pow(basis.eigenvalue(j), k);
    r.gap = std::abs(r.density - r.spectral_sum);
    return r;
}

// ---------------------------------------------------------------------------
// Cut norm of step kernels
//
// ||D||_cut = sup_{S,T} |int_{SxT} D|. The integral is bilinear in the
// fractional block-inclusion vectors, so the supremum over measurable sets is
// attained on block unions; exact mode enumerates subsets S via a Gray code
// and picks T per column sign, running both maximization and minimization.
// ---------------------------------------------------------------------------

enum class CutNormMode { exact, greedy };

namespace cut_detail {

inline double best_objective(const Eigen::VectorXd& col) {
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) (col[i] > 0.0 ? pos : neg) += col[i];
    return std::max(pos, -neg);
}

inline double exact_cut_norm(const StepKernel& d) {
    const int n = static_cast<int>(d.measures.size());
    if (n > 20) throw std::invalid_argument("cut_norm: exact mode limited to 20 blocks");
    // weighted(i,j) = m_i m_j D_ij; col holds the column sums over S.
    const Eigen::MatrixXd weighted =
        d.measures.asDiagonal() * d.values * d.measures.asDiagonal();
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    double best = 0.0;
    std::uint32_t prev_gray = 0;
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t i = 1; i < total; ++i) {
        const std::uint32_t gray = static_cast<std::uint32_t>(i ^ (i >> 1));
        const std::uint32_t flipped = gray ^ prev_gray;
        const int bit = static_cast<int>(std::countr_zero(flipped));
        if (gray & flipped)
            col += weighted.col(bit);
        else
            col -= weighted.col(bit);
        prev_gray = gray;
        best = std::max(best, best_objective(col));
    }
    return best;
}

inline double greedy_cut_norm(const StepKernel& d, int starts, std::uint64_t seed) {
    const int n = static_cast<int>(d.measures.size());
    const Eigen::MatrixXd weighted =
        d.measures.asDiagonal() * d.values * d.measures.asDiagonal();
    Rng rng(seed);
    double best = 0.0;
    for (int start = 0; start < starts; ++start) {
        for (int sign = 0; sign < 2; ++sign) {
            Eigen::VectorXd s(n), t(n);
            for (int i = 0; i < n; ++i) s[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            const double target = sign == 0 ? 1.0 : -1.0;
            double prev = -1.0;
            for (int iter = 0; iter < 100; ++iter) {
                const Eigen::VectorXd col = weighted.transpose() * s;
                for (int i = 0; i < n; ++i) t[i] = (target * col[i] > 0.0) ? 1.0 : 0.0;
                const Eigen::VectorXd row = weighted * t;
                for (int i = 0; i < n; ++i) s[i] = (target * row[i] > 0.0) ? 1.0 : 0.0;
                const double val = target * s.dot(weighted * t);
                if (val <= prev) break;
                prev = val;
            }
            best = std::max(best, prev);
        }
    }
    return best;
}

} // namespace cut_detail

/// Exact mode enumerates the 2^n block subsets (n <= 20); greedy mode is an
/// alternating ascent from random starts and only a lower bound.
inline double cut_norm_step(const StepKernel& d, CutNormMode mode, int greedy_starts = 20,
                            std::uint64_t greedy_seed = 12345) {
    if (d.values.rows() != d.values.cols() || d.values.rows() != d.measures.size())
        throw std::invalid_argument("cut_norm: inconsistent kernel shape");
    if (mode == CutNormMode::exact) return cut_detail::exact_cut_norm(d);
    return cut_detail::greedy_cut_norm(d, greedy_starts, greedy_seed);
}

/// Operator norm from a retained spectrum: max |lambda_j|.
inline double l2_operator_norm(const GraphonBasis& basis) {
    double best = 0.0;
    for (int j : basis.signed_indices()) best = std::max(best, std::abs(basis.eigenvalue(j)));
    return best;
}

/// Exact operator norm of a step kernel.
inline double l2_operator_norm(const StepKernel& k) {
    auto [pos, neg] = step_kernel_eigenvalues(k);
    double best = 0.0;
    if (pos.size()) best = std::max(best, std::abs(pos[0]));
    if (neg.size()) best = std::max(best, std::abs(neg[0]));
    return best;
}

} // namespace gsp
