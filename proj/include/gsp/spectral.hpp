#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/graphon.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Graphon operator spectra via discretization
//
// The operator induced by W is approximated on the regular N-point grid: with
// M = discretize_matrix(W, N), the basis eigenvalues are lambda_j(M)/N and the
// eigenfunctions are piecewise-constant with grid values sqrt(N) * v_j. For a
// step graphon with n blocks and N = n this reproduces the graph spectrum
// scaled by 1/n exactly, which is what makes the graph<->induced-graphon
// bridge an identity rather than an approximation.
// ---------------------------------------------------------------------------

struct GraphonBasis {
    int resolution = 0;  // N
    int k_kept = 0;      // eigenpairs requested per sign
    Eigen::VectorXd pos_vals;
    Eigen::VectorXd neg_vals;
    Eigen::MatrixXd pos_funcs;  // N x pos_count grid values of phi_j
    Eigen::MatrixXd neg_funcs;

    int pos_count() const { return static_cast<int>(pos_vals.size()); }
    int neg_count() const { return static_cast<int>(neg_vals.size()); }

    bool has_index(int j) const {
        return (j > 0 && j <= pos_count()) || (j < 0 && -j <= neg_count());
    }

    double eigenvalue(int j) const {
        if (j > 0 && j <= pos_count()) return pos_vals[j - 1];
        if (j < 0 && -j <= neg_count()) return neg_vals[-j - 1];
        throw std::invalid_argument("eigenvalue: unknown signed index " + std::to_string(j));
    }

    Eigen::VectorXd eigenfunction(int j) const {
        if (j > 0 && j <= pos_count()) return pos_funcs.col(j - 1);
        if (j < 0 && -j <= neg_count()) return neg_funcs.col(-j - 1);
        throw std::invalid_argument("eigenfunction: unknown signed index " + std::to_string(j));
    }

    std::vector<int> signed_indices() const {
        std::vector<int> idx;
        for (int j = 1; j <= pos_count(); ++j) idx.push_back(j);
        for (int j = 1; j <= neg_count(); ++j) idx.push_back(-j);
        return idx;
    }
};

/// Signal on [0,1]: either a closed-form evaluator or samples on the regular
/// grid. Grid signals are tied to their resolution.
class GraphonSignal {
public:
    static GraphonSignal closed_form(std::function<double(double)> f, std::string description = {}) {
        GraphonSignal s;
        s.f_ = std::move(f);
        s.desc_ = std::move(description);
        return s;
    }

    static GraphonSignal grid(Eigen::VectorXd values) {
        GraphonSignal s;
        s.grid_ = std::move(values);
        return s;
    }

    bool is_grid() const { return grid_.size() > 0; }
    const std::string& description() const { return desc_; }

    double operator()(double u) const {
        if (!(u >= 0.0 && u <= 1.0))
            throw std::invalid_argument("graphon signal: argument outside [0,1]");
        if (is_grid()) {
            const int n = static_cast<int>(grid_.size());
            return grid_[graphon_detail::regular_block(u, n)];
        }
        return f_(u);
    }

    /// Samples at grid midpoints. Grid signals must already match the
    /// requested resolution.
    Eigen::VectorXd grid_values(int resolution) const {
        if (is_grid()) {
            if (static_cast<int>(grid_.size()) != resolution)
                throw std::invalid_argument("graphon signal: resolution mismatch (have " +
                                            std::to_string(grid_.size()) + ", want " +
                                            std::to_string(resolution) + ")");
            return grid_;
        }
        Eigen::VectorXd v(resolution);
        for (int i = 0; i < resolution; ++i) v[i] = f_((i + 0.5) / resolution);
        return v;
    }

    /// L2 norm under the quadrature inner product <f,g> = (1/N) sum f_i g_i.
    double quadrature_norm(int resolution) const {
        return std::sqrt(grid_values(resolution).squaredNorm() / resolution);
    }

private:
    GraphonSignal() = default;
    std::function<double(double)> f_;
    Eigen::VectorXd grid_;
    std::string desc_;
};

inline GraphonBasis graphon_eigs(const Graphon& w, int resolution, int k_per_sign) {
    if (resolution < 2) throw std::invalid_argument("graphon_eigs: resolution must be >= 2");
    if (k_per_sign < 1) throw std::invalid_argument("graphon_eigs: k must be >= 1");
    if (k_per_sign > resolution)
        throw std::invalid_argument("graphon_eigs: k exceeds resolution");

    const Eigen::MatrixXd m = discretize_matrix(w, resolution);
    const SpectralBasis gb = eigendecompose(Graph::from_adjacency(m));

    GraphonBasis basis;
    basis.resolution = resolution;
    basis.k_kept = k_per_sign;
    const int np = std::min(k_per_sign, gb.pos_count());
    const int nn = std::min(k_per_sign, gb.neg_count());
    const double root_n = std::sqrt(static_cast<double>(resolution));
    basis.pos_vals = gb.pos_vals.head(np) / resolution;
    basis.neg_vals = gb.neg_vals.head(nn) / resolution;
    basis.pos_funcs = gb.pos_vecs.leftCols(np) * root_n;
    basis.neg_funcs = gb.neg_vecs.leftCols(nn) * root_n;
    return basis;
}

/// Signed-ordered graphon eigenvalues only (no eigenfunctions); cheaper for
/// high-resolution reference spectra.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> graphon_eigenvalues(const Graphon& w,
                                                                       int resolution) {
    if (resolution < 2) throw std::invalid_argument("graphon_eigenvalues: resolution must be >= 2");
    auto [pos, neg] = signed_eigenvalues(discretize_matrix(w, resolution));
    return {pos / resolution, neg / resolution};
}

inline SignedCoeffs wft(const GraphonBasis& basis, const GraphonSignal& phi) {
    const Eigen::VectorXd v = phi.grid_values(basis.resolution);
    SignedCoeffs c;
    c.pos = basis.pos_funcs.transpose() * v / basis.resolution;
    c.neg = basis.neg_funcs.transpose() * v / basis.resolution;
    return c;
}

inline GraphonSignal iwft(const GraphonBasis& basis, const SignedCoeffs& c) {
    if (c.pos.size() != basis.pos_count() || c.neg.size() != basis.neg_count())
        throw std::invalid_argument("iwft: coefficient layout does not match basis");
    return GraphonSignal::grid(basis.pos_funcs * c.pos + basis.neg_funcs * c.neg);
}

/// Energy of the signal outside the retained eigenpairs:
/// ||phi||^2 - sum_j phi^_j^2 under the quadrature inner product.
inline double residual_energy(const GraphonBasis& basis, const GraphonSignal& phi) {
    const double total = phi.grid_values(basis.resolution).squaredNorm() / basis.resolution;
    return std::max(0.0, total - wft(basis, phi).squared_norm());
}

/// Step graphon signal induced by a graph signal: value x_l on block I_l.
/// Its quadrature norm satisfies ||phi_G||^2 = ||x||^2 / n.
inline GraphonSignal induced_signal(const Graph& g, const GraphSignal& x) {
    if (x.size() != g.n)
        throw std::invalid_argument("induced_signal: signal length does not match graph");
    const int n = g.n;
    Eigen::VectorXd copy = x;
    return GraphonSignal::closed_form(
        [copy, n](double u) { return copy[graphon_detail::regular_block(u, n)]; },
        "induced graph signal");
}

struct BridgeReport {
    double max_eigenvalue_gap = 0.0;
    double max_wft_gap = 0.0;
};

/// Exact-identity check between a graph's spectrum/GFT and its induced
/// graphon's spectrum/WFT: lambda_j(T_WG) = lambda_j(S)/n and
/// [phi_G^]_j = [x^]_j / sqrt(n). Both gaps are floating-error sized.
inline BridgeReport induced_graphon_bridge_check(const Graph& g, const GraphSignal& x) {
    const SpectralBasis gb = eigendecompose(g);
    const GraphonBasis wb = graphon_eigs(induced_graphon(g), g.n, g.n);

    BridgeReport report;
    for (int j : gb.signed_indices()) {
        if (!wb.has_index(j)) {
            report.max_eigenvalue_gap = std::numeric_limits<double>::infinity();
            continue;
        }
        report.max_eigenvalue_gap = std::max(
            report.max_eigenvalue_gap, std::abs(wb.eigenvalue(j) - gb.eigenvalue(j) / g.n));
    }

    const SignedCoeffs xhat = gft(gb, x);
    const SignedCoeffs phat = wft(wb, induced_signal(g, x));
    const double root_n = std::sqrt(static_cast<double>(g.n));
    for (int j : gb.signed_indices())
        report.max_wft_gap =
            std::max(report.max_wft_gap, std::abs(phat.coeff(j) - xhat.coeff(j) / root_n));
    return report;
}

/// Projection of phi onto the span of the eigenfunctions in the cluster.
/// Idempotent and norm-nonincreasing.
inline GraphonSignal subspace_project(const GraphonBasis& basis, const std::vector<int>& cluster,
                                      const GraphonSignal& phi) {
    const SignedCoeffs c = wft(basis, phi);
    SignedCoeffs kept;
    kept.pos = Eigen::VectorXd::Zero(basis.pos_count());
    kept.neg = Eigen::VectorXd::Zero(basis.neg_count());
    for (int j : cluster) {
        if (!basis.has_index(j))
            throw std::invalid_argument("subspace_project: unknown signed index " + std::to_string(j));
        if (j > 0)
            kept.pos[j - 1] = c.pos[j - 1];
        else
            kept.neg[-j - 1] = c.neg[-j - 1];
    }
    return iwft(basis, kept);
}

struct EigengapSet {
    std::vector<int> indices;  // {j : |lambda_j| >= c}
    double min_gap = std::numeric_limits<double>::infinity();
};

/// Indices of eigenvalues with |lambda| >= c plus the minimal gap between
/// adjacent retained eigenvalues (a near-zero gap flags a near-derogatory
/// spectrum).
inline EigengapSet eigengap_set(const GraphonBasis& basis, double c) {
    EigengapSet out;
    std::vector<double> retained;
    for (int j : basis.signed_indices()) {
        if (std::abs(basis.eigenvalue(j)) >= c) {
            out.indices.push_back(j);
            retained.push_back(basis.eigenvalue(j));
        }
    }
    std::sort(retained.begin(), retained.end());
    for (std::size_t i = 1; i < retained.size(); ++i)
        out.min_gap = std::min(out.min_gap, retained[i] - retained[i - 1]);
    return out;
}

// ---------------------------------------------------------------------------
// Grid-estimated projection operators (subspace convergence checks)
// ---------------------------------------------------------------------------

namespace spectral_detail {

/// Orthonormalizes the columns under the quadrature inner product and returns
/// the projector matrix P = (1/N) Q Q^T acting on grid vectors.
inline Eigen::MatrixXd quadrature_projector(Eigen::MatrixXd funcs, int resolution) {
    const Eigen::Index k = funcs.cols();
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            const double dot = funcs.col(i).dot(funcs.col(j)) / resolution;
            funcs.col(j) -= dot * funcs.col(i);
        }
        const double norm = std::sqrt(funcs.col(j).squaredNorm() / resolution);
        if (norm < 1e-14)
            throw std::runtime_error("quadrature_projector: degenerate function set");
        funcs.col(j) /= norm;
    }
    return funcs * funcs.transpose() / resolution;
}

} // namespace spectral_detail

/// Operator-norm distance, estimated on the grid, between the graphon
/// projector onto the given cluster and the corresponding projector of the
/// graph's induced graphon with nodes sorted by latent label.
inline double subspace_projection_distance(const GraphonBasis& graphon_basis,
                                           const std::vector<int>& cluster, const Graph& g,
                                           const LatentLabels& labels) {
    const int N = graphon_basis.resolution;
    Eigen::MatrixXd wfuncs(N, static_cast<Eigen::Index>(cluster.size()));
    for (std::size_t k = 0; k < cluster.size(); ++k)
        wfuncs.col(static_cast<Eigen::Index>(k)) = graphon_basis.eigenfunction(cluster[k]);

    // Sort nodes by label so the induced step functions live on the same axis
    // as the graphon (the implementable counterpart of the alignment
    // permutations).
    std::vector<int> order(static_cast<std::size_t>(g.n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return labels.u[a] < labels.u[b]; });
    Eigen::MatrixXd sorted(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) sorted(i, j) = g.S(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);

    const SpectralBasis gb = eigendecompose(Graph::from_adjacency(sorted));
    Eigen::MatrixXd gfuncs(N, static_cast<Eigen::Index>(cluster.size()));
    const double root_n = std::sqrt(static_cast<double>(g.n));
    for (std::size_t k = 0; k < cluster.size(); ++k) {
        const Eigen::VectorXd v = gb.eigenvector(cluster[k]);
        for (int i = 0; i < N; ++i)
            gfuncs(i, static_cast<Eigen::Index>(k)) =
                root_n * v[graphon_detail::regular_block((i + 0.5) / N, g.n)];
    }

    const Eigen::MatrixXd diff = spectral_detail::quadrature_projector(std::move(wfuncs), N) -
                                 spectral_detail::quadrature_projector(std::move(gfuncs), N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline void save_basis_csv(const GraphonBasis& basis, const std::string& path,
                           bool dump_eigenfunctions = false) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# schema=v1\n# resolution=" << basis.resolution << "\nindex,eigenvalue\n";
    for (int j : basis.signed_indices())
        out << j << "," << format_double(basis.eigenvalue(j)) << "\n";
    if (dump_eigenfunctions) {
        out << "# eigenfunction grid values, columns ordered as indices above\n";
        for (int i = 0; i < basis.resolution; ++i) {
            bool first = true;
            for (int j : basis.signed_indices()) {
                if (!first) out << ",";
                out << format_double(basis.eigenfunction(j)[i]);
                first = false;
            }
            out << "\n";
        }
    }
}

inline void save_graphon_signal_csv(const GraphonSignal& phi, int resolution,
                                    const std::string& path) {
    write_vector_csv(path, phi.grid_values(resolution),
                     "# schema=v1\n# resolution=" + std::to_string(resolution));
}

} // namespace gsp
