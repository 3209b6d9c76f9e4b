#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsp/csv.hpp"
#include "gsp/graphon.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Graphs and graph signals
// ---------------------------------------------------------------------------

/// Finite undirected graph represented by its shift operator (adjacency
/// matrix). S must be exactly symmetric with entries in [0,1].
struct Graph {
    int n = 0;
    Eigen::MatrixXd S;

    static Graph from_adjacency(Eigen::MatrixXd s) {
        if (s.rows() == 0 || s.rows() != s.cols())
            throw std::invalid_argument("graph: adjacency must be square and nonempty");
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j) {
                const double v = s(i, j);
                if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v))
                    throw std::invalid_argument("graph: entries must lie in [0,1]");
                if (v != s(j, i))
                    throw std::invalid_argument("graph: adjacency must be symmetric");
            }
        Graph g;
        g.n = static_cast<int>(s.rows());
        g.S = std::move(s);
        return g;
    }
};

using GraphSignal = Eigen::VectorXd;

inline Graph sample_graph(const Graphon& w, const LatentLabels& labels, SampleMode mode, Rng& rng) {
    return Graph::from_adjacency(sample_adjacency(w, labels, mode, rng));
}

/// Step graphon induced by a graph on the regular n-block partition:
/// W_G(u,v) = S_jk for u in I_j, v in I_k.
inline Graphon induced_graphon(const Graph& g) {
    return Graphon::step(g.S);
}

// ---------------------------------------------------------------------------
// Signed-index spectral decomposition
//
// Eigenvalues are indexed j in {+-1, +-2, ...}: nonnegative eigenvalues get
// positive indices in decreasing order, negative eigenvalues get negative
// indices in decreasing order of |value|, so that
// lambda_1 >= lambda_2 >= ... >= 0 >= ... >= lambda_{-2} >= lambda_{-1}.
// Zero eigenvalues sit in the positive-index tail.
// ---------------------------------------------------------------------------

/// GFT/WFT coefficients laid out by signed index. pos[k] is the coefficient
/// at index +(k+1), neg[k] at index -(k+1).
struct SignedCoeffs {
    Eigen::VectorXd pos;
    Eigen::VectorXd neg;

    double coeff(int j) const {
        if (j > 0 && j <= pos.size()) return pos[j - 1];
        if (j < 0 && -j <= neg.size()) return neg[-j - 1];
        throw std::invalid_argument("coeff: unknown signed index " + std::to_string(j));
    }

    double squared_norm() const { return pos.squaredNorm() + neg.squaredNorm(); }
    double norm() const { return std::sqrt(squared_norm()); }
};

struct SpectralBasis {
    int n = 0;
    Eigen::VectorXd pos_vals;  // descending, all >= 0
    Eigen::VectorXd neg_vals;  // neg_vals[k] = lambda_{-(k+1)}, ascending values
    Eigen::MatrixXd pos_vecs;  // n x pos_count, unit columns
    Eigen::MatrixXd neg_vecs;  // n x neg_count

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

    Eigen::VectorXd eigenvector(int j) const {
        if (j > 0 && j <= pos_count()) return pos_vecs.col(j - 1);
        if (j < 0 && -j <= neg_count()) return neg_vecs.col(-j - 1);
        throw std::invalid_argument("eigenvector: unknown signed index " + std::to_string(j));
    }

    /// Indices in canonical order: +1..+P then -1..-M.
    std::vector<int> signed_indices() const {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(n));
        for (int j = 1; j <= pos_count(); ++j) idx.push_back(j);
        for (int j = 1; j <= neg_count(); ++j) idx.push_back(-j);
        return idx;
    }
};

namespace spectral_detail {

/// Canonical eigenvector sign: the largest-magnitude component (first such
/// index on ties) is made positive.
inline void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index best = 0;
    double best_mag = std::abs(v[0]);
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        const double m = std::abs(v[i]);
        if (m > best_mag) {
            best_mag = m;
            best = i;
        }
    }
    if (v[best] < 0.0) v = -v;
}

inline bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

struct EigPair {
    double val;
    Eigen::VectorXd vec;
};

} // namespace spectral_detail

/// Full symmetric eigendecomposition with the signed-index ordering and the
/// canonical eigenvector sign. Exact eigenvalue ties are broken by
/// lexicographic comparison of the (sign-fixed) eigenvectors.
inline SpectralBasis eigendecompose(const Graph& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.S);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecompose: solver failed to converge (n=" +
                                 std::to_string(g.n) + ")");

    std::vector<spectral_detail::EigPair> pos, neg;
    for (int i = 0; i < g.n; ++i) {
        spectral_detail::EigPair p{solver.eigenvalues()[i], solver.eigenvectors().col(i)};
        spectral_detail::canonicalize_sign(p.vec);
        (p.val < 0.0 ? neg : pos).push_back(std::move(p));
    }
    auto by_desc = [](const auto& a, const auto& b) {
        if (a.val != b.val) return a.val > b.val;
        return spectral_detail::lex_less(a.vec, b.vec);
    };
    auto by_asc = [](const auto& a, const auto& b) {
        if (a.val != b.val) return a.val < b.val;
        return spectral_detail::lex_less(a.vec, b.vec);
    };
    std::sort(pos.begin(), pos.end(), by_desc);
    std::sort(neg.begin(), neg.end(), by_asc);

    SpectralBasis basis;
    basis.n = g.n;
    basis.pos_vals.resize(static_cast<Eigen::Index>(pos.size()));
    basis.neg_vals.resize(static_cast<Eigen::Index>(neg.size()));
    basis.pos_vecs.resize(g.n, static_cast<Eigen::Index>(pos.size()));
    basis.neg_vecs.resize(g.n, static_cast<Eigen::Index>(neg.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) {
        basis.pos_vals[static_cast<Eigen::Index>(k)] = pos[k].val;
        basis.pos_vecs.col(static_cast<Eigen::Index>(k)) = pos[k].vec;
    }
    for (std::size_t k = 0; k < neg.size(); ++k) {
        basis.neg_vals[static_cast<Eigen::Index>(k)] = neg[k].val;
        basis.neg_vecs.col(static_cast<Eigen::Index>(k)) = neg[k].vec;
    }
    return basis;
}

/// Eigenvalues only, signed-ordered; no eigenvectors are formed.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> signed_eigenvalues(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("signed_eigenvalues: solver failed to converge");
    std::vector<double> pos, neg;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double v = solver.eigenvalues()[i];
        (v < 0.0 ? neg : pos).push_back(v);
    }
    std::sort(pos.begin(), pos.end(), std::greater<double>());
    std::sort(neg.begin(), neg.end());
    Eigen::VectorXd pv = Eigen::Map<Eigen::VectorXd>(pos.data(), static_cast<Eigen::Index>(pos.size()));
    Eigen::VectorXd nv = Eigen::Map<Eigen::VectorXd>(neg.data(), static_cast<Eigen::Index>(neg.size()));
    return {pv, nv};
}

inline SignedCoeffs gft(const SpectralBasis& basis, const GraphSignal& x) {
    if (x.size() != basis.n)
        throw std::invalid_argument("gft: signal length does not match basis dimension");
    SignedCoeffs c;
    c.pos = basis.pos_vecs.transpose() * x;
    c.neg = basis.neg_vecs.transpose() * x;
    return c;
}

inline GraphSignal igft(const SpectralBasis& basis, const SignedCoeffs& c) {
    if (c.pos.size() != basis.pos_count() || c.neg.size() != basis.neg_count())
        throw std::invalid_argument("igft: coefficient layout does not match basis");
    return basis.pos_vecs * c.pos + basis.neg_vecs * c.neg;
}

// ---------------------------------------------------------------------------
// File round-trips: CSV adjacency, edge-list text, one-column signal CSV.
// ---------------------------------------------------------------------------

inline void save_adjacency_csv(const Graph& g, const std::string& path) {
    write_matrix_csv(path, g.S);
}

inline Graph load_graph_csv(const std::string& path) {
    return Graph::from_adjacency(read_matrix_csv(path));
}

/// Edge list: "# n=<count>" header, then one "i,j,w" line per unordered pair
/// with nonzero weight, 0-based.
inline void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# n=" << g.n << "\n";
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.S(i, j) != 0.0) out << i << "," << j << "," << format_double(g.S(i, j)) << "\n";
}

inline Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    int n = -1;
    std::vector<std::tuple<int, int, double>> edges;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find("n=");
            if (eq != std::string::npos) n = std::stoi(line.substr(eq + 2));
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected i,j,w");
        edges.emplace_back(std::stoi(a), std::stoi(b), std::stod(c));
    }
    if (n < 0) {
        for (const auto& [i, j, w] : edges) n = std::max({n, i + 1, j + 1});
        if (n < 1) throw std::runtime_error(path + ": empty edge list without node count header");
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j, w] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw std::runtime_error(path + ": edge endpoint out of range");
        s(i, j) = w;
        s(j, i) = w;
    }
    return Graph::from_adjacency(std::move(s));
}

inline void save_signal_csv(const GraphSignal& x, const std::string& path) {
    write_vector_csv(path, x);
}

inline GraphSignal load_signal_csv(const std::string& path) { return read_vector_csv(path); }

} // namespace gsp
