#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsp/filters.hpp"
#include "gsp/graph.hpp"
#include "gsp/graphon.hpp"
#include "gsp/rng.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Reports: per-cell rows plus nearest-rank quantile summaries
// ---------------------------------------------------------------------------

struct ReportRow {
    int n = 0;
    int rep = 0;
    int j = 0;  // signed eigenvalue index where applicable, 0 otherwise
    double value = 0.0;
};

struct SummaryRow {
    int n = 0;
    int j = 0;
    double mean = 0.0;
    double median = 0.0;
    double q68 = 0.0;
    double q95 = 0.0;
    double q997 = 0.0;
};

/// Nearest-rank empirical quantile of a sorted sample.
inline double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const auto m = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m)));
    rank = std::clamp<std::size_t>(rank, 1, m);
    return sorted[rank - 1];
}

struct ConvergenceReport {
    bool has_j = false;
    std::vector<ReportRow> rows;

    std::vector<SummaryRow> summarize() const {
        std::map<std::pair<int, int>, std::vector<double>> groups;  // (j, n) -> values
        for (const auto& r : rows) groups[{r.j, r.n}].push_back(r.value);
        std::vector<SummaryRow> out;
        for (auto& [key, vals] : groups) {
            std::sort(vals.begin(), vals.end());
            SummaryRow s;
            s.j = key.first;
            s.n = key.second;
            double sum = 0.0;
            for (double v : vals) sum += v;
            s.mean = sum / static_cast<double>(vals.size());
            s.median = nearest_rank_quantile(vals, 0.5);
            s.q68 = nearest_rank_quantile(vals, 0.68);
            s.q95 = nearest_rank_quantile(vals, 0.95);
            s.q997 = nearest_rank_quantile(vals, 0.997);
            out.push_back(s);
        }
        return out;
    }

    /// Aggregated metric per n for one index, in the order of n_list.
    std::vector<double> curve(const std::vector<int>& n_list, int j, bool use_median) const {
        std::vector<double> out;
        for (int n : n_list) {
            std::vector<double> vals;
            for (const auto& r : rows)
                if (r.n == n && r.j == j) vals.push_back(r.value);
            if (vals.empty())
                throw std::invalid_argument("curve: no rows for n=" + std::to_string(n));
            std::sort(vals.begin(), vals.end());
            if (use_median) {
                out.push_back(nearest_rank_quantile(vals, 0.5));
            } else {
                double sum = 0.0;
                for (double v : vals) sum += v;
                out.push_back(sum / static_cast<double>(vals.size()));
            }
        }
        return out;
    }

    void write_rows_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << "# schema=v1\n";
        out << (has_j ? "n,seed,j,metric\n" : "n,seed,metric\n");
        for (const auto& r : rows) {
            out << r.n << "," << r.rep << ",";
            if (has_j) out << r.j << ",";
            out << format_double(r.value) << "\n";
        }
    }

    void write_summary_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << "# schema=v1\n";
        out << (has_j ? "n,j,mean,median,q68,q95,q997\n" : "n,mean,median,q68,q95,q997\n");
        for (const auto& s : summarize()) {
            out << s.n << ",";
            if (has_j) out << s.j << ",";
            out << format_double(s.mean) << "," << format_double(s.median) << ","
                << format_double(s.q68) << "," << format_double(s.q95) << ","
                << format_double(s.q997) << "\n";
        }
    }
};

/// Monte Carlo trend guard: the curve must be nonincreasing across
/// consecutive entries, allowing at most max_violations upticks of at most
/// rel_slack relative size.
inline bool check_nonincreasing(const std::vector<double>& values, int max_violations = 1,
                                double rel_slack = 0.10) {
    int violations = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1]) {
            if (values[i] > values[i - 1] * (1.0 + rel_slack)) return false;
            ++violations;
        }
    }
    return violations <= max_violations;
}

// ---------------------------------------------------------------------------
// Experiment configuration and the (n, rep) cell runner
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    Graphon graphon = Graphon::constant(0.4);
    std::string graphon_spec = "er:0.4";
    std::vector<int> n_list;
    int reps = 10;
    int resolution = 2000;          // grid for graphon-side operators
    int subspace_resolution = 500;  // grid for projector distance estimates
    std::uint64_t master_seed = 1;
    int threads = 1;
    double sigma = 0.2;  // pollution signal spread
    double a0 = 1.0;     // GMRF scale
    double a = 0.0;      // GMRF diffusion; <= 0 selects 0.9 / lambda_max
    bool align_by_magnitude = false;
    std::string signal_source = "pollution";  // transfer experiment: pollution | gmrf
    std::optional<SpectralFilterFn> filter;
    int k_kept = 20;

    void validate() const {
        if (n_list.empty()) throw std::invalid_argument("config: n_list must be nonempty");
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            if (n_list[i] < 1) throw std::invalid_argument("config: n must be >= 1");
            if (i && n_list[i] <= n_list[i - 1])
                throw std::invalid_argument("config: n_list must be sorted ascending");
        }
        if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
        if (resolution < 2) throw std::invalid_argument("config: resolution must be >= 2");
        if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
        if (!(sigma > 0.0)) throw std::invalid_argument("config: sigma must be > 0");
    }
};

namespace exp_detail {

/// Runs fn(n, rep, cell_seed) for every cell, possibly in parallel. Results
/// land in a slot per cell, so the concatenated output is independent of
/// scheduling.
template <typename Fn>
std::vector<ReportRow> run_cells(const ExperimentConfig& cfg, Fn&& fn) {
    struct Cell {
        int n;
        int rep;
    };
    std::vector<Cell> cells;
    for (int n : cfg.n_list)
        for (int rep = 0; rep < cfg.reps; ++rep) cells.push_back({n, rep});

    std::vector<std::vector<ReportRow>> slots(cells.size());
    auto work = [&](std::size_t idx) {
        const auto& c = cells[idx];
        slots[idx] = fn(c.n, c.rep,
                        derive_seed(cfg.master_seed, static_cast<std::uint64_t>(c.n),
                                    static_cast<std::uint64_t>(c.rep)));
    };

    if (cfg.threads <= 1 || cells.size() < 2) {
        for (std::size_t i = 0; i < cells.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        const int workers = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
        std::vector<std::future<void>> jobs;
        for (int t = 0; t < workers; ++t)
            jobs.push_back(std::async(std::launch::async, [&]() {
                for (std::size_t i = cursor.fetch_add(1); i < cells.size(); i = cursor.fetch_add(1))
                    work(i);
            }));
        for (auto& j : jobs) j.get();
    }

    std::vector<ReportRow> rows;
    for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
    return rows;
}

/// Nearest-cell lookup of a grid signal at arbitrary labels (step semantics).
inline Eigen::VectorXd interp_at(const Eigen::VectorXd& grid, const Eigen::VectorXd& labels) {
    const int n = static_cast<int>(grid.size());
    Eigen::VectorXd out(labels.size());
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        out[i] = grid[graphon_detail::regular_block(labels[i], n)];
    return out;
}

inline double dominant_eigenvalue(const Eigen::MatrixXd& s) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(s.rows(), 1.0 / std::sqrt(static_cast<double>(s.rows())));
    double lambda = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        Eigen::VectorXd w = s * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        const double next = w.dot(s * w);
        const bool done = std::abs(next - lambda) <= 1e-13 * std::max(1.0, std::abs(next));
        lambda = next;
        v = std::move(w);
        if (done) break;
    }
    return lambda;
}

} // namespace exp_detail

// ---------------------------------------------------------------------------
// Pollution-dispersion GFT convergence
// ---------------------------------------------------------------------------

/// Cross-wind pollutant concentration at normalized coordinate u, with the
/// source at 0: exp(-u^2 / (2 sigma^2)).
inline double pollution_signal(double u, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("pollution_signal: sigma must be > 0");
    return std::exp(-u * u / (2.0 * sigma * sigma));
}

/// Distance between two GFT coefficient maps. Signed-index alignment resolves
/// the per-coefficient sign (eigenvectors are canonical only up to the
/// sampling of the graphs); magnitude mode compares sorted absolute spectra.
inline double gft_alignment_distance(const SignedCoeffs& a, const SignedCoeffs& b,
                                     bool by_magnitude) {
    if (by_magnitude) {
        std::vector<double> av, bv;
        for (Eigen::Index i = 0; i < a.pos.size(); ++i) av.push_back(std::abs(a.pos[i]));
        for (Eigen::Index i = 0; i < a.neg.size(); ++i) av.push_back(std::abs(a.neg[i]));
        for (Eigen::Index i = 0; i < b.pos.size(); ++i) bv.push_back(std::abs(b.pos[i]));
        for (Eigen::Index i = 0; i < b.neg.size(); ++i) bv.push_back(std::abs(b.neg[i]));
        std::sort(av.begin(), av.end(), std::greater<double>());
        std::sort(bv.begin(), bv.end(), std::greater<double>());
        const std::size_t m = std::max(av.size(), bv.size());
        av.resize(m, 0.0);
        bv.resize(m, 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
        return std::sqrt(acc);
    }
    double acc = 0.0;
    const auto side = [&acc](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const Eigen::Index common = std::min(x.size(), y.size());
        for (Eigen::Index i = 0; i < common; ++i) {
            const double d = std::min(std::abs(x[i] - y[i]), std::abs(x[i] + y[i]));
            acc += d * d;
        }
        for (Eigen::Index i = common; i < x.size(); ++i) acc += x[i] * x[i];
        for (Eigen::Index i = common; i < y.size(); ++i) acc += y[i] * y[i];
    };
    side(a.pos, b.pos);
    side(a.neg, b.neg);
    return std::sqrt(acc);
}

/// Samples two independent graphs per cell, evaluates the pollution signal at
/// each graph's labels and reports the normalized aligned GFT difference.
inline ConvergenceReport exp_pollution(const ExperimentConfig& cfg) {
    cfg.validate();
    ConvergenceReport report;
    report.rows = exp_detail::run_cells(cfg, [&](int n, int rep, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<ReportRow> rows;
        const LatentLabels l1 = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g1 = sample_graph(cfg.graphon, l1, SampleMode::bernoulli, rng);
        const LatentLabels l2 = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g2 = sample_graph(cfg.graphon, l2, SampleMode::bernoulli, rng);
        GraphSignal s1(n), s2(n);
        for (int i = 0; i < n; ++i) {
            s1[i] = pollution_signal(l1.u[i], cfg.sigma);
            s2[i] = pollution_signal(l2.u[i], cfg.sigma);
        }
        const SignedCoeffs c1 = gft(eigendecompose(g1), s1);
        const SignedCoeffs c2 = gft(eigendecompose(g2), s2);
        const double metric = gft_alignment_distance(c1, c2, cfg.align_by_magnitude) / c1.norm();
        rows.push_back({n, rep, 0, metric});
        return rows;
    });
    return report;
}

// ---------------------------------------------------------------------------
// GMRF diffusion
// ---------------------------------------------------------------------------

/// Sigma_x = |a0|^2 (I - aS)^{-1} [(I - aS)^{-1}]^T. Requires |a| lambda_max < 1.
inline Eigen::MatrixXd gmrf_covariance(const Eigen::MatrixXd& s, double a0, double a) {
    if (s.rows() != s.cols()) throw std::invalid_argument("gmrf_covariance: S must be square");
    const double lmax = std::abs(exp_detail::dominant_eigenvalue(s));
    if (std::abs(a) * lmax >= 1.0 - 1e-12)
        throw std::invalid_argument("gmrf_covariance: (I - aS) not safely invertible, |a| lambda_max = " +
                                    format_double(std::abs(a) * lmax));
    const Eigen::Index n = s.rows();
    const Eigen::MatrixXd inv =
        (Eigen::MatrixXd::Identity(n, n) - a * s).partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd cov = (a0 * a0) * (inv * inv.transpose());
    cov = ((cov + cov.transpose()) / 2.0).eval();  // scrub roundoff asymmetry
    return cov;
}

/// Cholesky-based Gaussian sampler; the factor is computed once and shared.
class GmrfSampler {
public:
    explicit GmrfSampler(const Eigen::MatrixXd& covariance) : llt_(covariance) {
        if (llt_.info() != Eigen::Success) {
            // a0 = 0 gives a legitimate zero covariance; map it to zero draws
            if (covariance.lpNorm<Eigen::Infinity>() == 0.0) {
                zero_ = true;
                n_ = covariance.rows();
                return;
            }
            throw std::runtime_error("gmrf sampler: covariance is not positive definite");
        }
        n_ = covariance.rows();
    }

    Eigen::VectorXd sample(Rng& rng) const {
        Eigen::VectorXd z(n_);
        for (Eigen::Index i = 0; i < n_; ++i) z[i] = rng.normal();
        if (zero_) return Eigen::VectorXd::Zero(n_);
        return llt_.matrixL() * z;
    }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::Index n_ = 0;
    bool zero_ = false;
};

inline Eigen::VectorXd gmrf_sample(const Eigen::MatrixXd& covariance, Rng& rng) {
    return GmrfSampler(covariance).sample(rng);
}

/// Diffuses a graphon GMRF through the normalized discretized shift S_W/N and
/// compares against the n-normalized diffusion of sampled graph signals.
inline ConvergenceReport exp_gmrf(const ExperimentConfig& cfg) {
    cfg.validate();
    const Eigen::MatrixXd shift =
        discretize_matrix(cfg.graphon, cfg.resolution) / static_cast<double>(cfg.resolution);
    const double lmax = std::abs(exp_detail::dominant_eigenvalue(shift));
    if (lmax == 0.0) throw std::invalid_argument("exp_gmrf: zero graphon has no diffusion");
    const double a = cfg.a > 0.0 ? cfg.a : 0.9 / lmax;
    const GmrfSampler sampler(gmrf_covariance(shift, cfg.a0, a));

    ConvergenceReport report;
    report.rows = exp_detail::run_cells(cfg, [&](int n, int rep, std::uint64_t seed) {
        Rng rng(seed);
        const Eigen::VectorXd x_w = sampler.sample(rng);
        const Eigen::VectorXd y_w = shift * x_w;
        const LatentLabels labels = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g = sample_graph(cfg.graphon, labels, SampleMode::bernoulli, rng);
        const Eigen::VectorXd x_n = exp_detail::interp_at(x_w, labels.u);
        const Eigen::VectorXd y_n = (g.S * x_n) / static_cast<double>(n);
        const Eigen::VectorXd y_ref = exp_detail::interp_at(y_w, labels.u);
        const double denom = y_ref.norm();
        const double metric = denom > 0.0 ? (y_n - y_ref).norm() / denom : (y_n - y_ref).norm();
        return std::vector<ReportRow>{{n, rep, 0, metric}};
    });
    return report;
}

// ---------------------------------------------------------------------------
// Eigenvalue convergence
// ---------------------------------------------------------------------------

/// |lambda_j(S_n)/n - lambda_j(T_W)| per cell for the requested signed
/// indices. The graphon reference comes from the configured discretization
/// resolution; indices beyond either spectrum count as eigenvalue 0.
inline ConvergenceReport exp_eigconv(const ExperimentConfig& cfg, const std::vector<int>& js = {1, 2, 3}) {
    cfg.validate();
    if (js.empty()) throw std::invalid_argument("exp_eigconv: empty index set");
    auto [ref_pos, ref_neg] = graphon_eigenvalues(cfg.graphon, cfg.resolution);
    auto ref_at = [&p = ref_pos, &q = ref_neg](int j) -> double {
        if (j > 0) return j <= p.size() ? p[j - 1] : 0.0;
        return -j <= q.size() ? q[-j - 1] : 0.0;
    };

    ConvergenceReport report;
    report.has_j = true;
    report.rows = exp_detail::run_cells(cfg, [&](int n, int rep, std::uint64_t seed) {
        Rng rng(seed);
        const LatentLabels labels = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g = sample_graph(cfg.graphon, labels, SampleMode::bernoulli, rng);
        auto [pos, neg] = signed_eigenvalues(g.S);
        std::vector<ReportRow> rows;
        for (int j : js) {
            double lambda_n = 0.0;
            if (j > 0 && j <= pos.size()) lambda_n = pos[j - 1];
            if (j < 0 && -j <= neg.size()) lambda_n = neg[-j - 1];
            rows.push_back({n, rep, j, std::abs(lambda_n / n - ref_at(j))});
        }
        return rows;
    });
    return report;
}

// ---------------------------------------------------------------------------
// Filter transfer
// ---------------------------------------------------------------------------

/// Fixes a graphon signal, filters it on the graphon and on sampled graphs
/// with the same spectral filter, and reports the normalized vertex-domain
/// difference at the sampled labels.
inline ConvergenceReport exp_filter_transfer(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.filter) throw std::invalid_argument("exp_filter_transfer: no filter configured");
    const SpectralFilterFn& h = *cfg.filter;
    const int n_grid = cfg.resolution;
    const GraphonBasis basis = graphon_eigs(cfg.graphon, n_grid, cfg.k_kept);

    GraphonSignal phi = [&]() {
        if (cfg.signal_source == "pollution") {
            const double sigma = cfg.sigma;
            return GraphonSignal::closed_form(
                [sigma](double u) { return pollution_signal(u, sigma); }, "pollution");
        }
        if (cfg.signal_source == "gmrf") {
            const Eigen::MatrixXd shift =
                discretize_matrix(cfg.graphon, n_grid) / static_cast<double>(n_grid);
            const double lmax = std::abs(exp_detail::dominant_eigenvalue(shift));
            const double a = cfg.a > 0.0 ? cfg.a : 0.9 / lmax;
            Rng rng(derive_seed(cfg.master_seed, 0, 0));
            return GraphonSignal::grid(GmrfSampler(gmrf_covariance(shift, cfg.a0, a)).sample(rng));
        }
        throw std::invalid_argument("exp_filter_transfer: unknown signal source '" +
                                    cfg.signal_source + "'");
    }();

    const Eigen::VectorXd gamma = apply_graphon_filter(basis, h, phi).grid_values(n_grid);
    const Eigen::VectorXd phi_grid = phi.grid_values(n_grid);

    ConvergenceReport report;
    report.rows = exp_detail::run_cells(cfg, [&](int n, int rep, std::uint64_t seed) {
        Rng rng(seed);
        const LatentLabels labels = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g = sample_graph(cfg.graphon, labels, SampleMode::bernoulli, rng);
        const Eigen::VectorXd x_n = exp_detail::interp_at(phi_grid, labels.u);
        const GraphSignal y_n = apply_spectral_graph_filter(eigendecompose(g), h, x_n);
        const Eigen::VectorXd y_ref = exp_detail::interp_at(gamma, labels.u);
        const double denom = y_ref.norm();
        const double metric = denom > 0.0 ? (y_n - y_ref).norm() / denom : (y_n - y_ref).norm();
        return std::vector<ReportRow>{{n, rep, 0, metric}};
    });
    return report;
}

// ---------------------------------------------------------------------------
// Eigenspace (projection) convergence
// ---------------------------------------------------------------------------

/// Grid-estimated operator-norm distance between the graphon projector onto
/// the clustered eigenvalues and the sampled graphs' induced projectors.
inline ConvergenceReport exp_subspace(const ExperimentConfig& cfg, const std::vector<int>& cluster) {
    cfg.validate();
    if (cluster.empty()) throw std::invalid_argument("exp_subspace: empty cluster");
    int k_needed = 1;
    for (int j : cluster) k_needed = std::max(k_needed, std::abs(j));
    const GraphonBasis basis = graphon_eigs(cfg.graphon, cfg.subspace_resolution, k_needed);

    ConvergenceReport report;
    report.rows = exp_detail::run_cells(cfg, [&](int n, int rep, std::uint64_t seed) {
        Rng rng(seed);
        const LatentLabels labels = sample_latents(n, LatentMode::uniform_iid, rng);
        const Graph g = sample_graph(cfg.graphon, labels, SampleMode::bernoulli, rng);
        const double dist = subspace_projection_distance(basis, cluster, g, labels);
        return std::vector<ReportRow>{{n, rep, 0, dist}};
    });
    return report;
}

} // namespace gsp
