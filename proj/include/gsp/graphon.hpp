#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gsp/csv.hpp"
#include "gsp/rng.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Graphon families
//
// A graphon is a symmetric kernel W:[0,1]^2 -> [0,1]. Supported families:
// constant (Erdos-Renyi), stochastic block model with arbitrary community
// boundaries, exponential-distance kernels, regular-partition step functions
// and grid-sampled kernels. Step and grid-sampled kernels use the regular
// partition I_j = [(j-1)/n, j/n), right-open except the last block, so
// evaluation is total on [0,1].
// ---------------------------------------------------------------------------

namespace graphon_detail {

inline void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " outside [0,1]");
}

inline void check_kernel_matrix(const Eigen::MatrixXd& B, const char* what) {
    if (B.rows() == 0 || B.rows() != B.cols())
        throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            const double v = B(i, j);
            if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(what) + ": entries must lie in [0,1]");
            if (B(i, j) != B(j, i))
                throw std::invalid_argument(std::string(what) + ": matrix must be symmetric");
        }
}

/// Block index for the regular partition of [0,1] into n blocks.
inline int regular_block(double u, int n) {
    int j = static_cast<int>(u * n);
    if (j >= n) j = n - 1; // u == 1 belongs to the last (closed) block
    return j;
}

} // namespace graphon_detail

struct ConstantGraphon {
    double p;
};

struct SbmGraphon {
    std::vector<double> boundaries; // strictly increasing, last == 1
    Eigen::MatrixXd block_probs;    // symmetric, entries in [0,1]
};

/// W(u,v) = exp(-beta (u-v)^2) when squared, exp(-beta |u-v|) otherwise.
struct ExpDistanceGraphon {
    double beta;
    bool squared = true;
};

struct StepGraphon {
    Eigen::MatrixXd values; // n_blocks x n_blocks, regular partition
};

struct GridSampledGraphon {
    Eigen::MatrixXd values; // N x N samples at regular-grid midpoints
};

class Graphon {
public:
    using Variant = std::variant<ConstantGraphon, SbmGraphon, ExpDistanceGraphon, StepGraphon,
                                 GridSampledGraphon>;

    static Graphon constant(double p) {
        graphon_detail::check_unit(p, "constant graphon probability");
        return Graphon(ConstantGraphon{p});
    }

    static Graphon sbm(std::vector<double> boundaries, Eigen::MatrixXd block_probs) {
        if (boundaries.empty())
            throw std::invalid_argument("sbm: boundaries must be nonempty");
        double prev = 0.0;
        for (double b : boundaries) {
            if (!(b > prev) || b > 1.0)
                throw std::invalid_argument("sbm: boundaries must be strictly increasing in (0,1]");
            prev = b;
        }
        if (boundaries.back() != 1.0)
            throw std::invalid_argument("sbm: last boundary must be 1");
        graphon_detail::check_kernel_matrix(block_probs, "sbm block_probs");
        if (static_cast<std::size_t>(block_probs.rows()) != boundaries.size())
            throw std::invalid_argument("sbm: block_probs size must match boundary count");
        return Graphon(SbmGraphon{std::move(boundaries), std::move(block_probs)});
    }

    static Graphon exp_distance(double beta, bool squared = true) {
        if (!(beta >= 0.0))
            throw std::invalid_argument("exp_distance: beta must be >= 0");
        return Graphon(ExpDistanceGraphon{beta, squared});
    }

    static Graphon step(Eigen::MatrixXd values) {
        graphon_detail::check_kernel_matrix(values, "step graphon");
        return Graphon(StepGraphon{std::move(values)});
    }

    static Graphon grid_sampled(Eigen::MatrixXd values) {
        graphon_detail::check_kernel_matrix(values, "grid-sampled graphon");
        return Graphon(GridSampledGraphon{std::move(values)});
    }

    /// W(u,v). Throws if u or v is outside [0,1].
    double eval(double u, double v) const {
        if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("graphon eval: arguments must lie in [0,1]");
        return std::visit(
            [&](const auto& g) -> double {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, ConstantGraphon>) {
                    return g.p;
                } else if constexpr (std::is_same_v<T, SbmGraphon>) {
                    return g.block_probs(sbm_block(g, u), sbm_block(g, v));
                } else if constexpr (std::is_same_v<T, ExpDistanceGraphon>) {
                    const double d = std::abs(u - v);
                    return std::exp(-g.beta * (g.squared ? d * d : d));
                } else if constexpr (std::is_same_v<T, StepGraphon>) {
                    const int n = static_cast<int>(g.values.rows());
                    return g.values(graphon_detail::regular_block(u, n),
                                    graphon_detail::regular_block(v, n));
                } else {
                    const int n = static_cast<int>(g.values.rows());
                    return g.values(graphon_detail::regular_block(u, n),
                                    graphon_detail::regular_block(v, n));
                }
            },
            v_);
    }

    const Variant& variant() const { return v_; }

    bool is_block_family() const {
        return std::holds_alternative<ConstantGraphon>(v_) || std::holds_alternative<SbmGraphon>(v_) ||
               std::holds_alternative<StepGraphon>(v_) || std::holds_alternative<GridSampledGraphon>(v_);
    }

private:
    explicit Graphon(Variant v) : v_(std::move(v)) {}

    static int sbm_block(const SbmGraphon& g, double u) {
        const int k = static_cast<int>(g.boundaries.size());
        for (int i = 0; i < k - 1; ++i)
            if (u < g.boundaries[i]) return i;
        return k - 1;
    }

    Variant v_;
};

// ---------------------------------------------------------------------------
// Latent labels and sampling
// ---------------------------------------------------------------------------

enum class LatentMode { uniform_iid, regular_grid };

struct LatentLabels {
    Eigen::VectorXd u;
    LatentMode mode;
};

inline LatentLabels sample_latents(int n, LatentMode mode, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_latents: n must be >= 1");
    Eigen::VectorXd u(n);
    if (mode == LatentMode::regular_grid) {
        for (int i = 0; i < n; ++i) u[i] = (i + 0.5) / n;
    } else {
        for (int i = 0; i < n; ++i) u[i] = rng.uniform();
    }
    return LatentLabels{std::move(u), mode};
}

enum class SampleMode { weighted, bernoulli };

/// Adjacency of a graph sampled from W at the given labels. Each unordered
/// pair is drawn once and mirrored; the diagonal is zero (no self-loops).
inline Eigen::MatrixXd sample_adjacency(const Graphon& w, const LatentLabels& labels,
                                        SampleMode mode, Rng& rng) {
    const int n = static_cast<int>(labels.u.size());
    if (n == 0) throw std::invalid_argument("sample_adjacency: labels must be nonempty");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double p = w.eval(labels.u[i], labels.u[j]);
            const double v = (mode == SampleMode::weighted) ? p : (rng.bernoulli(p) ? 1.0 : 0.0);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

/// W evaluated at regular-grid midpoints; upper triangle evaluated once and
/// mirrored so the result is symmetric by construction.
inline Eigen::MatrixXd discretize_matrix(const Graphon& w, int resolution) {
    if (resolution < 2) throw std::invalid_argument("discretize: resolution must be >= 2");
    const int n = resolution;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        const double ui = (i + 0.5) / n;
        for (int j = i; j < n; ++j) {
            const double v = w.eval(ui, (j + 0.5) / n);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

inline Graphon discretize(const Graphon& w, int resolution) {
    return Graphon::grid_sampled(discretize_matrix(w, resolution));
}

/// Midpoint-rule estimate of the double integral of W over the unit square.
inline double integral_estimate(const Graphon& w, int resolution = 400) {
    return discretize_matrix(w, resolution).mean();
}

// ---------------------------------------------------------------------------
// Spec strings and CSV round-trips
//
// Mini-language: er:p | sbm:b1,..,bk;p11,..,p1k;..;pk1,..,pkk |
// exp:beta | expabs:beta | step:file.csv | grid:file.csv
// ---------------------------------------------------------------------------

namespace graphon_detail {

inline std::vector<double> parse_number_list(const std::string& s, const std::string& ctx) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::invalid_argument(ctx + ": bad number '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace graphon_detail

inline Graphon parse_graphon_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("graphon spec: expected family:params, got '" + spec + "'");
    const std::string family = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (family == "er") {
        auto v = graphon_detail::parse_number_list(rest, "er");
        if (v.size() != 1) throw std::invalid_argument("er: expected one probability");
        return Graphon::constant(v[0]);
    }
    if (family == "exp" || family == "expabs") {
        auto v = graphon_detail::parse_number_list(rest, family);
        if (v.size() != 1) throw std::invalid_argument(family + ": expected one rate");
        return Graphon::exp_distance(v[0], family == "exp");
    }
    if (family == "sbm") {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            std::size_t semi = rest.find(';', start);
            parts.push_back(rest.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
            if (semi == std::string::npos) break;
            start = semi + 1;
        }
        if (parts.size() < 2) throw std::invalid_argument("sbm: expected boundaries;row1;..;rowk");
        auto boundaries = graphon_detail::parse_number_list(parts[0], "sbm boundaries");
        const std::size_t k = boundaries.size();
        if (parts.size() != k + 1)
            throw std::invalid_argument("sbm: expected " + std::to_string(k) + " probability rows");
        Eigen::MatrixXd probs(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            auto row = graphon_detail::parse_number_list(parts[i + 1], "sbm row");
            if (row.size() != k) throw std::invalid_argument("sbm: ragged probability row");
            for (std::size_t j = 0; j < k; ++j) probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        return Graphon::sbm(std::move(boundaries), std::move(probs));
    }
    if (family == "step") return Graphon::step(read_matrix_csv(rest));
    if (family == "grid") return Graphon::grid_sampled(read_matrix_csv(rest));
    throw std::invalid_argument("graphon spec: unknown family '" + family + "'");
}

/// Canonical spec string for closed-form families. Step and grid-sampled
/// graphons round-trip through CSV matrix files instead (save_step_csv).
inline std::string graphon_spec_string(const Graphon& w) {
    return std::visit(
        [](const auto& g) -> std::string {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantGraphon>) {
                return "er:" + format_double(g.p);
            } else if constexpr (std::is_same_v<T, ExpDistanceGraphon>) {
                return (g.squared ? std::string("exp:") : std::string("expabs:")) + format_double(g.beta);
            } else if constexpr (std::is_same_v<T, SbmGraphon>) {
                std::string s = "sbm:";
                for (std::size_t i = 0; i < g.boundaries.size(); ++i)
                    s += (i ? "," : "") + format_double(g.boundaries[i]);
                for (Eigen::Index i = 0; i < g.block_probs.rows(); ++i) {
                    s += ";";
                    for (Eigen::Index j = 0; j < g.block_probs.cols(); ++j)
                        s += (j ? "," : "") + format_double(g.block_probs(i, j));
                }
                return s;
            } else {
                throw std::invalid_argument("spec string for step/grid graphons requires a CSV file");
            }
        },
        w.variant());
}

inline void save_step_csv(const Graphon& w, const std::string& path) {
    if (const auto* s = std::get_if<StepGraphon>(&w.variant())) {
        write_matrix_csv(path, s->values);
    } else if (const auto* g = std::get_if<GridSampledGraphon>(&w.variant())) {
        write_matrix_csv(path, g->values);
    } else {
        throw std::invalid_argument("save_step_csv: graphon has no block matrix");
    }
}

} // namespace gsp
