#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gsp/graph.hpp"
#include "gsp/rng.hpp"

using namespace gsp;

namespace {

Graph random_weighted_graph(int n, Rng& rng) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            s(i, j) = rng.uniform();
            s(j, i) = s(i, j);
        }
    return Graph::from_adjacency(std::move(s));
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("two-node path: closed-form eigenpairs") {
    Eigen::MatrixXd s(2, 2);
    s << 0, 1, 1, 0;
    const SpectralBasis b = eigendecompose(Graph::from_adjacency(s));
    REQUIRE(b.pos_count() == 1);
    REQUIRE(b.neg_count() == 1);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(b.eigenvalue(1) == doctest::Approx(1.0));
    CHECK(b.eigenvalue(-1) == doctest::Approx(-1.0));
    CHECK(b.eigenvector(1)[0] == doctest::Approx(r));
    CHECK(b.eigenvector(1)[1] == doctest::Approx(r));
    CHECK(b.eigenvector(-1)[0] == doctest::Approx(r));
    CHECK(b.eigenvector(-1)[1] == doctest::Approx(-r));
}

TEST_CASE("zero matrix: all eigenvalues on the positive side") {
    const SpectralBasis b = eigendecompose(Graph::from_adjacency(Eigen::MatrixXd::Zero(4, 4)));
    CHECK(b.pos_count() == 4);
    CHECK(b.neg_count() == 0);
    for (int j = 1; j <= 4; ++j) CHECK(b.eigenvalue(j) == 0.0);
}

TEST_CASE("complete graph K_3 spectrum {2, -1, -1}") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
    const SpectralBasis b = eigendecompose(Graph::from_adjacency(s));
    REQUIRE(b.pos_count() == 1);
    REQUIRE(b.neg_count() == 2);
    CHECK(b.eigenvalue(1) == doctest::Approx(2.0));
    CHECK(b.eigenvalue(-1) == doctest::Approx(-1.0));
    CHECK(b.eigenvalue(-2) == doctest::Approx(-1.0));
}

TEST_CASE("basis invariants on random graphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 39);
        const Graph g = random_weighted_graph(n, rng);
        const SpectralBasis b = eigendecompose(g);

        // signed ordering
        for (int k = 1; k < b.pos_count(); ++k) CHECK(b.pos_vals[k] <= b.pos_vals[k - 1]);
        for (int k = 0; k < b.pos_count(); ++k) CHECK(b.pos_vals[k] >= 0.0);
        for (int k = 1; k < b.neg_count(); ++k) CHECK(b.neg_vals[k] >= b.neg_vals[k - 1]);
        for (int k = 0; k < b.neg_count(); ++k) CHECK(b.neg_vals[k] < 0.0);

        // orthonormality and reconstruction
        Eigen::MatrixXd v(n, n);
        Eigen::VectorXd lam(n);
        int col = 0;
        for (int j : b.signed_indices()) {
            v.col(col) = b.eigenvector(j);
            lam[col] = b.eigenvalue(j);
            ++col;
        }
        CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
        const Eigen::MatrixXd recon = v * lam.asDiagonal() * v.transpose();
        CHECK((g.S - recon).norm() <= 1e-8 * std::max(1.0, g.S.norm()));

        // trace and Frobenius identities
        CHECK(std::abs(lam.sum() - g.S.trace()) <= 1e-9);
        CHECK(std::abs(lam.squaredNorm() - g.S.squaredNorm()) <=
              1e-9 * std::max(1.0, g.S.squaredNorm()));

        // determinism
        const SpectralBasis again = eigendecompose(g);
        CHECK(again.pos_vals == b.pos_vals);
        CHECK(again.neg_vals == b.neg_vals);
        CHECK(again.pos_vecs == b.pos_vecs);
        CHECK(again.neg_vecs == b.neg_vecs);
    }
}

TEST_CASE("gft basics") {
    Rng rng(5);
    const Graph g = random_weighted_graph(8, rng);
    const SpectralBasis b = eigendecompose(g);

    const SignedCoeffs unit = gft(b, b.eigenvector(1));
    CHECK(unit.coeff(1) == doctest::Approx(1.0));
    double off = 0.0;
    for (int j : b.signed_indices())
        if (j != 1) off = std::max(off, std::abs(unit.coeff(j)));
    CHECK(off <= 1e-10);

    const SignedCoeffs zero = gft(b, Eigen::VectorXd::Zero(8));
    CHECK(zero.squared_norm() == 0.0);

    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x[i] = rng.normal();
    const GraphSignal back = igft(b, gft(b, x));
    CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-10);

    CHECK_THROWS_AS(gft(b, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("igft from explicit coefficients") {
    Eigen::MatrixXd s(2, 2);
    s << 0, 1, 1, 0;
    const SpectralBasis b = eigendecompose(Graph::from_adjacency(s));
    SignedCoeffs c;
    c.pos = Eigen::VectorXd::Zero(1);
    c.neg = Eigen::VectorXd::Zero(1);
    c.neg[0] = 1.0;
    const GraphSignal x = igft(b, c);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(x[0] == doctest::Approx(r));
    CHECK(x[1] == doctest::Approx(-r));

    SignedCoeffs zeros;
    zeros.pos = Eigen::VectorXd::Zero(1);
    zeros.neg = Eigen::VectorXd::Zero(1);
    CHECK(igft(b, zeros).cwiseAbs().maxCoeff() == 0.0);

    SignedCoeffs bad;
    bad.pos = Eigen::VectorXd::Zero(2);
    bad.neg = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(igft(b, bad), std::invalid_argument);
}

TEST_CASE("Parseval for 100 random signals") {
    Rng rng(17);
    const Graph g = random_weighted_graph(12, rng);
    const SpectralBasis b = eigendecompose(g);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x(12);
        for (int i = 0; i < 12; ++i) x[i] = rng.normal();
        const SignedCoeffs c = gft(b, x);
        CHECK(std::abs(c.squared_norm() - x.squaredNorm()) <=
              1e-10 * std::max(1.0, x.squaredNorm()));
    }
}

TEST_CASE("graph validation") {
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 0.5, 0.4, 0;
    CHECK_THROWS_AS(Graph::from_adjacency(asym), std::invalid_argument);
    Eigen::MatrixXd range(2, 2);
    range << 0, 1.5, 1.5, 0;
    CHECK_THROWS_AS(Graph::from_adjacency(range), std::invalid_argument);
}

TEST_CASE("file round-trips") {
    Rng rng(31);
    Graph g = random_weighted_graph(6, rng);
    g.S(2, 5) = 0.0;  // make the edge list sparse-ish
    g.S(5, 2) = 0.0;
    const Graph g2 = Graph::from_adjacency(g.S);

    const std::string adj = temp_path("gsp_adj.csv");
    save_adjacency_csv(g2, adj);
    CHECK(load_graph_csv(adj).S == g2.S);

    const std::string el = temp_path("gsp_edges.txt");
    save_edge_list(g2, el);
    CHECK(load_edge_list(el).S == g2.S);

    Eigen::VectorXd x(6);
    for (int i = 0; i < 6; ++i) x[i] = rng.normal();
    const std::string sig = temp_path("gsp_signal.csv");
    save_signal_csv(x, sig);
    CHECK(load_signal_csv(sig) == x);

    // isolated last node survives the edge-list round-trip via the header
    Eigen::MatrixXd iso = Eigen::MatrixXd::Zero(4, 4);
    iso(0, 1) = iso(1, 0) = 0.7;
    const Graph gi = Graph::from_adjacency(iso);
    save_edge_list(gi, el);
    CHECK(load_edge_list(el).n == 4);

    std::filesystem::remove(adj);
    std::filesystem::remove(el);
    std::filesystem::remove(sig);
}
