#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "gsp/experiments.hpp"
#include "gsp/movielens.hpp"

using namespace gsp;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
    const std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << contents;
    return path;
}

/// Five users with hand-checkable pairwise correlations (see the assertions).
RatingMatrix five_user_fixture() {
    const std::string path = temp_file("gsp_five_users.data",
                                       "1\t1\t5\t0\n1\t2\t4\t0\n1\t3\t3\t0\n1\t4\t2\t0\n"
                                       "2\t1\t4\t0\n2\t2\t3\t0\n2\t3\t2\t0\n2\t4\t1\t0\n"
                                       "3\t1\t1\t0\n3\t2\t2\t0\n3\t3\t3\t0\n3\t4\t4\t0\n"
                                       "4\t1\t5\t0\n4\t2\t1\t0\n4\t4\t4\t0\n4\t5\t2\t0\n"
                                       "5\t5\t3\t0\n5\t6\t4\t0\n");
    RatingMatrix r = parse_ratings(path);
    std::filesystem::remove(path);
    return r;
}

UserNetwork circulant_network(int n) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        s(i, (i + 1) % n) = 0.5;
        s((i + 1) % n, i) = 0.5;
    }
    UserNetwork net;
    net.graph = Graph::from_adjacency(std::move(s));
    net.users.resize(static_cast<std::size_t>(n));
    std::iota(net.users.begin(), net.users.end(), 0);
    net.k_nn = 2;
    return net;
}

/// Every movie's rating vector is constant, so S x = x exactly on the
/// row-stochastic circulant shift.
RatingMatrix constant_movie_fixture(int n_users, int n_movies) {
    std::string text;
    for (int u = 1; u <= n_users; ++u)
        for (int m = 1; m <= n_movies; ++m)
            text += std::to_string(u) + "\t" + std::to_string(m) + "\t" +
                    std::to_string(1 + (m - 1) % 5) + "\t0\n";
    const std::string path = temp_file("gsp_constant_movies.data", text);
    RatingMatrix r = parse_ratings(path);
    std::filesystem::remove(path);
    return r;
}

std::vector<int> all_entries(const RatingMatrix& r) {
    std::vector<int> idx(r.entries.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

} // namespace

TEST_CASE("parse_ratings: basics and validation") {
    const std::string ok = temp_file("gsp_ok.data", "1\t10\t5\t100\n2\t10\t3\t101\n2\t11\t1\t102\n");
    const RatingMatrix r = parse_ratings(ok);
    CHECK(r.entries.size() == 3);
    CHECK(r.n_users == 2);
    CHECK(r.n_movies == 11);
    CHECK(r.entries[0].user == 0);
    CHECK(r.entries[0].movie == 9);
    CHECK(r.entries[0].rating == 5.0);
    std::filesystem::remove(ok);

    const std::string bad_rating = temp_file("gsp_bad_rating.data", "1\t1\t7\t100\n");
    CHECK_THROWS_WITH_AS(parse_ratings(bad_rating), doctest::Contains("outside [1,5]"),
                         std::runtime_error);
    std::filesystem::remove(bad_rating);

    const std::string malformed = temp_file("gsp_malformed.data", "1\t1\t4\t100\nnot a line\n");
    CHECK_THROWS_WITH_AS(parse_ratings(malformed), doctest::Contains(":2:"), std::runtime_error);
    std::filesystem::remove(malformed);

    const std::string empty = temp_file("gsp_empty.data", "\n\n");
    CHECK_THROWS_AS(parse_ratings(empty), std::runtime_error);
    std::filesystem::remove(empty);

    const std::string dup = temp_file("gsp_dup.data", "1\t1\t4\t100\n1\t1\t2\t101\n2\t1\t3\t99\n");
    const RatingMatrix rd = parse_ratings(dup);
    CHECK(rd.duplicate_count == 1);
    CHECK(rd.entries[0].rating == 2.0);  // last write wins
    std::filesystem::remove(dup);
}

TEST_CASE("fixture file parses to the documented shape") {
    const RatingMatrix r = parse_ratings(std::string(GSP_FIXTURE_DIR) + "/synthetic_u.data");
    CHECK(r.entries.size() == 200);
    CHECK(r.n_users == 20);
    CHECK(r.n_movies == 15);
    CHECK(r.duplicate_count == 0);
}

TEST_CASE("ingestion round-trip is identity on the sparse set") {
    const RatingMatrix r = parse_ratings(std::string(GSP_FIXTURE_DIR) + "/synthetic_u.data");
    const std::string path = temp_file("gsp_roundtrip.data", "");
    serialize_ratings(r, path);
    const RatingMatrix back = parse_ratings(path);
    REQUIRE(back.entries.size() == r.entries.size());
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        CHECK(back.entries[i].user == r.entries[i].user);
        CHECK(back.entries[i].movie == r.entries[i].movie);
        CHECK(back.entries[i].rating == r.entries[i].rating);
    }
    std::filesystem::remove(path);
}

TEST_CASE("user network from the five-user fixture") {
    const RatingMatrix r = five_user_fixture();
    const UserNetwork net = build_user_network(r, {0, 1, 2, 3, 4}, 4);
    const Eigen::MatrixXd& s = net.graph.S;

    // users 0 and 1 rate the same movies linearly: correlation 1, and it is
    // the global maximum, so the rescaled weight stays 1
    CHECK(s(0, 1) == doctest::Approx(1.0));

    // users 0 and 2 are perfectly anticorrelated: clamped to 0
    CHECK(s(0, 2) == 0.0);

    // users 0 and 3 share movies 1, 2, 4 with ratings (5,4,2) vs (5,1,4):
    // centered dot = 1/3, variances 42/9 and 78/9, so corr = 3/sqrt(3276)
    const double expected = 3.0 / std::sqrt(3276.0);
    CHECK(s(0, 3) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s(1, 3) == doctest::Approx(expected).epsilon(1e-12));

    // user 4 co-rates at most one movie with anyone: isolated
    for (int i = 0; i < 4; ++i) CHECK(s(i, 4) == 0.0);

    // spreadsheet-style oracle over all pairs
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) {
            std::map<int, double> mi, mj;
            for (int idx : r.by_user[static_cast<std::size_t>(i)])
                mi[r.entries[static_cast<std::size_t>(idx)].movie] = r.entries[static_cast<std::size_t>(idx)].rating;
            for (int idx : r.by_user[static_cast<std::size_t>(j)])
                mj[r.entries[static_cast<std::size_t>(idx)].movie] = r.entries[static_cast<std::size_t>(idx)].rating;
            std::vector<double> xs, ys;
            for (const auto& [m, x] : mi)
                if (mj.count(m)) {
                    xs.push_back(x);
                    ys.push_back(mj[m]);
                }
            double expect = 0.0;
            if (xs.size() >= 2) {
                const auto n = static_cast<double>(xs.size());
                double sx = 0, sy = 0;
                for (std::size_t t = 0; t < xs.size(); ++t) {
                    sx += xs[t];
                    sy += ys[t];
                }
                double cov = 0, vx = 0, vy = 0;
                for (std::size_t t = 0; t < xs.size(); ++t) {
                    cov += (xs[t] - sx / n) * (ys[t] - sy / n);
                    vx += (xs[t] - sx / n) * (xs[t] - sx / n);
                    vy += (ys[t] - sy / n) * (ys[t] - sy / n);
                }
                if (vx > 0 && vy > 0) expect = std::max(0.0, cov / std::sqrt(vx * vy));
            }
            CHECK(s(i, j) == doctest::Approx(expect).epsilon(1e-12));  // global max is 1 here
        }
    }

    CHECK_THROWS_AS(build_user_network(r, {0}, 4), std::invalid_argument);
}

TEST_CASE("build_user_network is permutation-equivariant") {
    const RatingMatrix r = five_user_fixture();
    const UserNetwork base = build_user_network(r, {0, 1, 2, 3, 4}, 4);

    const std::vector<int> perm{2, 0, 4, 1, 3};  // new id of old user u
    std::string text;
    for (const auto& e : r.entries)
        text += std::to_string(perm[static_cast<std::size_t>(e.user)] + 1) + "\t" +
                std::to_string(e.movie + 1) + "\t" + format_double(e.rating) + "\t0\n";
    const std::string path = temp_file("gsp_perm.data", text);
    const RatingMatrix rp = parse_ratings(path);
    std::filesystem::remove(path);
    const UserNetwork permuted = build_user_network(rp, {0, 1, 2, 3, 4}, 4);

    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(permuted.graph.S(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) ==
                  doctest::Approx(base.graph.S(i, j)).epsilon(1e-12));
}

TEST_CASE("split is deterministic, disjoint and covering") {
    const RatingMatrix r = parse_ratings(std::string(GSP_FIXTURE_DIR) + "/synthetic_u.data");
    const RatingSplit s1 = split_ratings(r, 0.1, 7);
    const RatingSplit s2 = split_ratings(r, 0.1, 7);
    CHECK(s1.train == s2.train);
    CHECK(s1.eval == s2.eval);
    CHECK(s1.train.size() + s1.eval.size() == r.entries.size());
    std::vector<int> merged = s1.train;
    merged.insert(merged.end(), s1.eval.begin(), s1.eval.end());
    std::sort(merged.begin(), merged.end());
    for (std::size_t i = 0; i < merged.size(); ++i) CHECK(merged[i] == static_cast<int>(i));
}

TEST_CASE("taps recovery on a constructed shift-eigenvector fixture") {
    const int n = 8;
    const RatingMatrix r = constant_movie_fixture(n, 8);
    const UserNetwork net = circulant_network(n);
    const Eigen::MatrixXd inputs = rating_input_matrix(r, all_entries(r));
    const TapsFit fit = fit_filter_taps(net, inputs, r, all_entries(r), 1, 1e-10);
    CHECK_FALSE(fit.degenerate);
    CHECK(std::abs(fit.taps.taps[0]) <= 1e-6);
    CHECK(fit.taps.taps[1] == doctest::Approx(1.0).epsilon(1e-6));

    // and the recovered taps predict perfectly
    const double err = predict_and_rmse(net, fit.taps, inputs, r, all_entries(r));
    CHECK(err <= 1e-6);
}

TEST_CASE("degenerate fit on an empty graph is flagged") {
    const int n = 4;
    const RatingMatrix r = constant_movie_fixture(n, 3);
    UserNetwork net;
    net.graph = Graph::from_adjacency(Eigen::MatrixXd::Zero(n, n));
    net.users = {0, 1, 2, 3};
    net.k_nn = 1;
    const Eigen::MatrixXd inputs = rating_input_matrix(r, all_entries(r));
    const TapsFit fit = fit_filter_taps(net, inputs, r, all_entries(r), 0, 1e-3);
    CHECK(fit.degenerate);
    CHECK(fit.taps.taps[0] == doctest::Approx(0.0));
}

TEST_CASE("a K=1 fit beats the trivial spread of the ratings") {
    const RatingMatrix r = parse_ratings(std::string(GSP_FIXTURE_DIR) + "/synthetic_u.data");
    const RatingSplit split = split_ratings(r, 0.1, 5);
    const Eigen::MatrixXd inputs = rating_input_matrix(r, split.train);
    std::vector<int> users(static_cast<std::size_t>(r.n_users));
    std::iota(users.begin(), users.end(), 0);
    const UserNetwork net = build_user_network(r, users, 10);
    const TapsFit fit = fit_filter_taps(net, inputs, r, split.train, 1, 1e-3);
    CHECK_FALSE(fit.degenerate);
    const double train_rmse = predict_and_rmse(net, fit.taps, inputs, r, split.train);

    Eigen::VectorXd train_ratings(static_cast<Eigen::Index>(split.train.size()));
    for (std::size_t i = 0; i < split.train.size(); ++i)
        train_ratings[static_cast<Eigen::Index>(i)] = r.entries[static_cast<std::size_t>(split.train[i])].rating;
    const double spread =
        std::sqrt((train_ratings.array() - train_ratings.mean()).square().sum() /
                  static_cast<double>(train_ratings.size()));
    CHECK(train_rmse < spread);
}

TEST_CASE("rmse identities and clamping") {
    Eigen::VectorXd truths(4);
    truths << 1, 2, 4, 5;
    const double mean = truths.mean();
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(4, mean);
    const double expected_std = std::sqrt((truths.array() - mean).square().sum() / 4.0);
    CHECK(rmse(constant, truths) == doctest::Approx(expected_std).epsilon(1e-12));
    CHECK(rmse(truths, truths) == 0.0);
    CHECK_THROWS_AS(rmse(constant, Eigen::VectorXd::Zero(3)), std::invalid_argument);

    // enormous taps still land inside [1,5] after clamping
    const int n = 6;
    const RatingMatrix r = constant_movie_fixture(n, 4);
    const UserNetwork net = circulant_network(n);
    const Eigen::MatrixXd inputs = rating_input_matrix(r, all_entries(r));
    Eigen::VectorXd huge(2);
    huge << 0.0, 1e6;
    const double err = predict_and_rmse(net, PolyFilter::from_taps(huge), inputs, r, all_entries(r));
    CHECK(err <= 4.0);
}

TEST_CASE("transfer experiment on the synthetic fixture") {
    const RatingMatrix r = parse_ratings(std::string(GSP_FIXTURE_DIR) + "/synthetic_u.data");
    MovieExperimentConfig cfg;
    cfg.n_list = {5, 10, 20};
    cfg.k_list = {1, 2};
    cfg.seed = 3;
    const MovieTransferTable table = exp_movie(r, cfg);

    for (int k : cfg.k_list) {
        // full-size training is the baseline itself
        CHECK(table.rel_diff.at({k, 20}) == doctest::Approx(0.0));
        CHECK(table.base_rmse.at(k) > 0.0);
        std::vector<double> curve;
        for (int n : table.n_list) curve.push_back(table.rel_diff.at({k, n}));
        CHECK(check_nonincreasing(curve, 1, 0.20));
    }

    // deterministic rerun
    const MovieTransferTable again = exp_movie(r, cfg);
    for (int k : cfg.k_list)
        for (int n : table.n_list)
            CHECK(again.rel_diff.at({k, n}) == table.rel_diff.at({k, n}));

    // n beyond the user count is dropped rather than fatal
    MovieExperimentConfig big = cfg;
    big.n_list = {5, 500};
    CHECK(exp_movie(r, big).n_list == std::vector<int>{5});

    const auto csv = (std::filesystem::temp_directory_path() / "gsp_movie_table.csv").string();
    table.write_csv(csv);
    std::ifstream in(csv);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# schema=v1");
    std::filesystem::remove(csv);
}
