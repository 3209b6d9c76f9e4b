#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gsp/csv.hpp"
#include "gsp/filters.hpp"
#include "gsp/graph.hpp"
#include "gsp/rng.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Ratings ingestion (MovieLens u.data format)
// ---------------------------------------------------------------------------

struct RatingEntry {
    int user = 0;   // 0-based internally; files are 1-based
    int movie = 0;
    double rating = 0.0;
};

struct RatingMatrix {
    int n_users = 0;
    int n_movies = 0;
    std::vector<RatingEntry> entries;        // unique (user, movie), sorted
    std::vector<std::vector<int>> by_user;   // entry indices per user
    int duplicate_count = 0;                 // resolved last-write-wins

    void rebuild_index() {
        by_user.assign(static_cast<std::size_t>(n_users), {});
        for (std::size_t i = 0; i < entries.size(); ++i)
            by_user[static_cast<std::size_t>(entries[i].user)].push_back(static_cast<int>(i));
    }
};

/// Parses tab-separated "user item rating timestamp" lines with 1-based ids.
/// Duplicate (user, movie) pairs resolve last-write-wins and are counted.
inline RatingMatrix parse_ratings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ratings file: " + path);
    std::map<std::pair<int, int>, double> latest;
    int duplicates = 0;
    int max_user = 0, max_movie = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        long long user, movie, timestamp;
        double rating;
        if (!(ss >> user >> movie >> rating >> timestamp))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'user movie rating timestamp'");
        std::string trailing;
        if (ss >> trailing)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing fields");
        if (user < 1 || movie < 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ids must be >= 1");
        if (!(rating >= 1.0 && rating <= 5.0))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": rating " +
                                     format_double(rating) + " outside [1,5]");
        const std::pair<int, int> key{static_cast<int>(user - 1), static_cast<int>(movie - 1)};
        if (latest.count(key)) ++duplicates;
        latest[key] = rating;
        max_user = std::max(max_user, static_cast<int>(user));
        max_movie = std::max(max_movie, static_cast<int>(movie));
    }
    if (latest.empty()) throw std::runtime_error(path + ": no ratings found");

    RatingMatrix r;
    r.n_users = max_user;
    r.n_movies = max_movie;
    r.duplicate_count = duplicates;
    r.entries.reserve(latest.size());
    for (const auto& [key, rating] : latest) r.entries.push_back({key.first, key.second, rating});
    r.rebuild_index();
    return r;
}

inline void serialize_ratings(const RatingMatrix& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& e : r.entries)
        out << (e.user + 1) << "\t" << (e.movie + 1) << "\t" << format_double(e.rating) << "\t0\n";
}

// ---------------------------------------------------------------------------
// User-similarity network
// ---------------------------------------------------------------------------

enum class Symmetrize { max, mean };

struct UserNetwork {
    Graph graph;               // over the selected users, weights in [0,1]
    std::vector<int> users;    // global user ids, in graph row order
    int k_nn = 0;
};

/// Pearson correlation per user pair over co-rated movies, negatives clamped
/// to zero, top-k_nn kept per user, symmetrized and rescaled into [0,1] by
/// the global maximum. Pairs with fewer than two co-rated movies get 0.
inline UserNetwork build_user_network(const RatingMatrix& r, const std::vector<int>& user_subset,
                                      int k_nn = 40, Symmetrize sym = Symmetrize::max) {
    const int n = static_cast<int>(user_subset.size());
    if (n < 2) throw std::invalid_argument("build_user_network: need at least 2 users");
    if (k_nn < 1) throw std::invalid_argument("build_user_network: k_nn must be >= 1");

    // movie -> rating maps per selected user
    std::vector<std::vector<std::pair<int, double>>> rated(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int u = user_subset[static_cast<std::size_t>(i)];
        if (u < 0 || u >= r.n_users)
            throw std::invalid_argument("build_user_network: user id out of range");
        for (int idx : r.by_user[static_cast<std::size_t>(u)])
            rated[static_cast<std::size_t>(i)].emplace_back(r.entries[static_cast<std::size_t>(idx)].movie,
                                                            r.entries[static_cast<std::size_t>(idx)].rating);
        std::sort(rated[static_cast<std::size_t>(i)].begin(), rated[static_cast<std::size_t>(i)].end());
    }

    Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& a = rated[static_cast<std::size_t>(i)];
            const auto& b = rated[static_cast<std::size_t>(j)];
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            int m = 0;
            std::size_t p = 0, q = 0;
            while (p < a.size() && q < b.size()) {
                if (a[p].first < b[q].first) {
                    ++p;
                } else if (a[p].first > b[q].first) {
                    ++q;
                } else {
                    const double x = a[p].second, y = b[q].second;
                    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
                    ++m; ++p; ++q;
                }
            }
            if (m < 2) continue;
            const double cov = sxy - sx * sy / m;
            const double vx = sxx - sx * sx / m;
            const double vy = syy - sy * sy / m;
            if (vx <= 0.0 || vy <= 0.0) continue;  // constant co-ratings: undefined, treat as 0
            const double corr = cov / std::sqrt(vx * vy);
            sim(i, j) = std::max(0.0, corr);
            sim(j, i) = sim(i, j);
        }
    }

    // keep each user's top-k_nn neighbours (ties broken by lower index)
    Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(n, n);
    const int k = std::min(k_nn, n - 1);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
            return a < b;
        });
        int taken = 0;
        for (int cand : order) {
            if (cand == i) continue;
            if (taken == k || sim(i, cand) <= 0.0) break;
            kept(i, cand) = sim(i, cand);
            ++taken;
        }
    }

    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s(i, j) = sym == Symmetrize::max ? std::max(kept(i, j), kept(j, i))
                                             : 0.5 * (kept(i, j) + kept(j, i));
    const double peak = s.maxCoeff();
    if (peak > 0.0) s /= peak;

    UserNetwork net;
    net.graph = Graph::from_adjacency(std::move(s));
    net.users = user_subset;
    net.k_nn = k_nn;
    return net;
}

// ---------------------------------------------------------------------------
// Filter training and evaluation
//
// Inputs to the graph filter are always the train-split ratings; the target
// entry of a movie's rating vector is zeroed before shifting, which keeps
// the features of entry (u, m) equal to [S^k x]_u - x_u [S^k]_uu.
// ---------------------------------------------------------------------------

struct RatingSplit {
    std::vector<int> train;  // entry indices
    std::vector<int> eval;
};

inline RatingSplit split_ratings(const RatingMatrix& r, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw std::invalid_argument("split_ratings: eval fraction must be in (0,1)");
    std::vector<int> idx(r.entries.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);
    const std::size_t n_eval = std::max<std::size_t>(1, static_cast<std::size_t>(idx.size() * eval_fraction));
    RatingSplit split;
    split.eval.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_eval));
    split.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_eval), idx.end());
    std::sort(split.eval.begin(), split.eval.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

/// Dense users x movies matrix holding only the selected entries.
inline Eigen::MatrixXd rating_input_matrix(const RatingMatrix& r, const std::vector<int>& entry_idx) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(r.n_users, r.n_movies);
    for (int i : entry_idx) {
        const auto& e = r.entries[static_cast<std::size_t>(i)];
        x(e.user, e.movie) = e.rating;
    }
    return x;
}

namespace movielens_detail {

struct FeatureContext {
    std::vector<Eigen::MatrixXd> shifted;  // S^k X_local for k = 0..K
    std::vector<Eigen::VectorXd> diag_sk;  // diag(S^k)
    std::unordered_map<int, int> local;    // global user -> row
};

inline FeatureContext make_features(const UserNetwork& net, const Eigen::MatrixXd& inputs, int k_taps) {
    const int n = net.graph.n;
    FeatureContext ctx;
    for (int i = 0; i < n; ++i) ctx.local[net.users[static_cast<std::size_t>(i)]] = i;

    Eigen::MatrixXd x_local(n, inputs.cols());
    for (int i = 0; i < n; ++i) x_local.row(i) = inputs.row(net.users[static_cast<std::size_t>(i)]);

    ctx.shifted.push_back(x_local);
    for (int k = 1; k <= k_taps; ++k) ctx.shifted.push_back(net.graph.S * ctx.shifted.back());

    ctx.diag_sk.push_back(Eigen::VectorXd::Ones(n));
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= k_taps; ++k) {
        power = (power * net.graph.S).eval();
        ctx.diag_sk.push_back(power.diagonal());
    }
    return ctx;
}

inline Eigen::VectorXd entry_features(const FeatureContext& ctx, int local_user, int movie, int k_taps) {
    Eigen::VectorXd f(k_taps + 1);
    const double own = ctx.shifted[0](local_user, movie);
    for (int k = 0; k <= k_taps; ++k)
        f[k] = ctx.shifted[static_cast<std::size_t>(k)](local_user, movie) -
               own * ctx.diag_sk[static_cast<std::size_t>(k)][local_user];
    return f;
}

} // namespace movielens_detail

struct TapsFit {
    PolyFilter taps{Eigen::VectorXd::Zero(1)};
    bool degenerate = false;  // all-zero design (e.g. empty graph with K = 0)
};

/// Ridge least-squares fit of h_0..h_K over the target entries whose user
/// belongs to the network.
inline TapsFit fit_filter_taps(const UserNetwork& net, const Eigen::MatrixXd& inputs,
                               const RatingMatrix& r, const std::vector<int>& target_entries,
                               int k_taps, double lambda_reg) {
    if (k_taps < 0 || k_taps > 64)
        throw std::invalid_argument("fit_filter_taps: K must be in 0..64");
    if (!(lambda_reg >= 0.0))
        throw std::invalid_argument("fit_filter_taps: lambda_reg must be >= 0");
    const auto ctx = movielens_detail::make_features(net, inputs, k_taps);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k_taps + 1, k_taps + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k_taps + 1);
    for (int idx : target_entries) {
        const auto& e = r.entries[static_cast<std::size_t>(idx)];
        const auto it = ctx.local.find(e.user);
        if (it == ctx.local.end()) continue;
        const Eigen::VectorXd f = movielens_detail::entry_features(ctx, it->second, e.movie, k_taps);
        gram.noalias() += f * f.transpose();
        rhs.noalias() += f * e.rating;
    }

    TapsFit fit;
    fit.degenerate = gram.lpNorm<Eigen::Infinity>() < 1e-12;
    const Eigen::MatrixXd reg =
        gram + lambda_reg * Eigen::MatrixXd::Identity(k_taps + 1, k_taps + 1);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("fit_filter_taps: singular normal equations; increase lambda_reg");
    Eigen::VectorXd taps = ldlt.solve(rhs);
    if (!taps.allFinite())
        throw std::runtime_error("fit_filter_taps: singular normal equations; increase lambda_reg");
    fit.taps = PolyFilter::from_taps(std::move(taps));
    return fit;
}

inline double rmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths) {
    if (predictions.size() != truths.size() || predictions.size() == 0)
        throw std::invalid_argument("rmse: size mismatch or empty");
    return std::sqrt((predictions - truths).squaredNorm() / static_cast<double>(predictions.size()));
}

/// RMSE of the filter's predictions over the eval entries, clamped to [1,5].
inline double predict_and_rmse(const UserNetwork& net, const PolyFilter& taps,
                               const Eigen::MatrixXd& inputs, const RatingMatrix& r,
                               const std::vector<int>& eval_entries) {
    const int k_taps = static_cast<int>(taps.taps.size()) - 1;
    const auto ctx = movielens_detail::make_features(net, inputs, k_taps);
    std::vector<double> preds, truths;
    preds.reserve(eval_entries.size());
    for (int idx : eval_entries) {
        const auto& e = r.entries[static_cast<std::size_t>(idx)];
        const auto it = ctx.local.find(e.user);
        if (it == ctx.local.end()) continue;
        const Eigen::VectorXd f = movielens_detail::entry_features(ctx, it->second, e.movie, k_taps);
        preds.push_back(std::clamp(taps.taps.dot(f), 1.0, 5.0));
        truths.push_back(e.rating);
    }
    if (preds.empty()) throw std::invalid_argument("predict_and_rmse: no scorable eval entries");
    return rmse(Eigen::Map<Eigen::VectorXd>(preds.data(), static_cast<Eigen::Index>(preds.size())),
                Eigen::Map<Eigen::VectorXd>(truths.data(), static_cast<Eigen::Index>(truths.size())));
}

// ---------------------------------------------------------------------------
// Transfer experiment: filters trained on disjoint random subnetworks are
// applied to the full network; reported as relative RMSE difference vs the
// filter trained on the full network.
// ---------------------------------------------------------------------------

struct MovieTransferTable {
    std::vector<int> k_list;
    std::vector<int> n_list;
    std::map<int, double> base_rmse;                    // per K
    std::map<std::pair<int, int>, double> rel_diff;     // (K, n) -> mean relative diff

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << "# schema=v1\nK";
        for (int n : n_list) out << ",n" << n;
        out << ",base_rmse\n";
        for (int k : k_list) {
            out << k;
            for (int n : n_list) out << "," << format_double(rel_diff.at({k, n}));
            out << "," << format_double(base_rmse.at(k)) << "\n";
        }
    }
};

struct MovieExperimentConfig {
    std::vector<int> n_list{50, 100, 200, 400, 600, 800};
    std::vector<int> k_list{1, 2, 3};
    int k_nn = 40;
    double lambda_reg = 1e-3;
    double eval_fraction = 0.1;
    std::uint64_t seed = 1;
    Symmetrize symmetrize = Symmetrize::max;
};

inline MovieTransferTable exp_movie(const RatingMatrix& r, const MovieExperimentConfig& cfg) {
    MovieTransferTable table;
    table.k_list = cfg.k_list;
    for (int n : cfg.n_list)
        if (n <= r.n_users) table.n_list.push_back(n);
    if (table.n_list.empty())
        throw std::invalid_argument("exp_movie: no usable n (dataset has " +
                                    std::to_string(r.n_users) + " users)");

    const RatingSplit split = split_ratings(r, cfg.eval_fraction, cfg.seed);
    const Eigen::MatrixXd inputs = rating_input_matrix(r, split.train);

    std::vector<int> all_users(static_cast<std::size_t>(r.n_users));
    std::iota(all_users.begin(), all_users.end(), 0);
    const UserNetwork full_net = build_user_network(r, all_users, cfg.k_nn, cfg.symmetrize);

    for (int k : cfg.k_list) {
        const TapsFit base = fit_filter_taps(full_net, inputs, r, split.train, k, cfg.lambda_reg);
        table.base_rmse[k] = predict_and_rmse(full_net, base.taps, inputs, r, split.eval);
    }

    for (int n : table.n_list) {
        const int n_groups = std::max(1, r.n_users / n);
        // users are picked at random into disjoint groups
        std::vector<int> shuffled = all_users;
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n), 0));
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);

        for (int k : cfg.k_list) {
            double acc = 0.0;
            for (int g = 0; g < n_groups; ++g) {
                std::vector<int> group(shuffled.begin() + static_cast<std::ptrdiff_t>(g) * n,
                                       shuffled.begin() + static_cast<std::ptrdiff_t>(g + 1) * n);
                std::sort(group.begin(), group.end());
                const UserNetwork subnet =
                    build_user_network(r, group, std::min(cfg.k_nn, n - 1), cfg.symmetrize);
                const TapsFit fit =
                    fit_filter_taps(subnet, inputs, r, split.train, k, cfg.lambda_reg);
                const double group_rmse =
                    predict_and_rmse(full_net, fit.taps, inputs, r, split.eval);
                acc += (group_rmse - table.base_rmse[k]) / table.base_rmse[k];
            }
            table.rel_diff[{k, n}] = acc / n_groups;
        }
    }
    return table;
}

} // namespace gsp
