#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

// ---------------------------------------------------------------------------
// Polynomial (shift-invariant) filters
// ---------------------------------------------------------------------------

struct PolyFilter {
    Eigen::VectorXd taps;  // h_0 .. h_K

    static PolyFilter from_taps(Eigen::VectorXd taps) {
        if (taps.size() < 1 || taps.size() > 65)
            throw std::invalid_argument("poly filter: need 1..65 taps (K <= 64)");
        if (!taps.allFinite()) throw std::invalid_argument("poly filter: taps must be finite");
        return PolyFilter{std::move(taps)};
    }
};

/// y = sum_k h_k S^k x, computed by iterated shifts; S^k is never formed.
inline GraphSignal apply_poly(const Graph& g, const PolyFilter& f, const GraphSignal& x) {
    if (x.size() != g.n)
        throw std::invalid_argument("apply_poly: signal length does not match graph");
    GraphSignal shifted = x;
    GraphSignal y = f.taps[0] * x;
    for (Eigen::Index k = 1; k < f.taps.size(); ++k) {
        shifted = g.S * shifted;
        y += f.taps[k] * shifted;
    }
    return y;
}

/// Horner evaluation of h(lambda) = sum_k h_k lambda^k.
inline double poly_freq_response(const PolyFilter& f, double lambda) {
    double acc = 0.0;
    for (Eigen::Index k = f.taps.size() - 1; k >= 0; --k) acc = acc * lambda + f.taps[k];
    return acc;
}

// ---------------------------------------------------------------------------
// Spectral filter functions on [-1, 1]
//
// Graph-side filters consume normalized eigenvalues lambda/n; graphon-side
// filters consume raw graphon eigenvalues. Adjacency shift operators have
// negative eigenvalues, so the domain is the symmetric interval [-1,1].
// ---------------------------------------------------------------------------

struct LipschitzCheck {
    bool ok = true;
    double max_ratio = 0.0;  // worst |dh| / |dlambda| over adjacent grid pairs
};

class SpectralFilterFn {
public:
    static SpectralFilterFn polynomial(Eigen::VectorXd taps,
                                       std::optional<double> lipschitz = std::nullopt) {
        SpectralFilterFn h;
        h.v_ = Poly{PolyFilter::from_taps(std::move(taps))};
        h.set_lipschitz(lipschitz);
        return h;
    }

    /// Piecewise-linear in lambda; constant extension beyond the outermost
    /// breakpoints keeps it evaluable on all of [-1,1].
    static SpectralFilterFn piecewise_linear(std::vector<std::pair<double, double>> points,
                                             std::optional<double> lipschitz = std::nullopt) {
        if (points.size() < 2)
            throw std::invalid_argument("piecewise_linear: need at least two breakpoints");
        std::sort(points.begin(), points.end());
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].first == points[i - 1].first)
                throw std::invalid_argument("piecewise_linear: duplicate breakpoint");
        SpectralFilterFn h;
        h.v_ = Pwl{std::move(points)};
        h.set_lipschitz(lipschitz);
        return h;
    }

    /// Ideal lowpass with a linear rolloff: 1 for |lambda| <= cutoff, linear
    /// down to 0 at cutoff + width, 0 beyond. Lipschitz constant 1/width.
    static SpectralFilterFn lowpass_rolloff(double cutoff, double width) {
        if (!(cutoff >= 0.0) || !(width > 0.0))
            throw std::invalid_argument("lowpass_rolloff: need cutoff >= 0 and width > 0");
        SpectralFilterFn h;
        h.v_ = Lowpass{cutoff, width};
        h.set_lipschitz(1.0 / width);
        return h;
    }

    double operator()(double lambda) const {
        if (!(lambda >= -1.0 - 1e-12 && lambda <= 1.0 + 1e-12))
            throw std::domain_error("spectral filter: lambda outside [-1,1]");
        return std::visit(
            [&](const auto& g) -> double {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Poly>) {
                    return poly_freq_response(g.f, lambda);
                } else if constexpr (std::is_same_v<T, Lowpass>) {
                    const double a = std::abs(lambda);
                    if (a <= g.cutoff) return 1.0;
                    if (a >= g.cutoff + g.width) return 0.0;
                    return 1.0 - (a - g.cutoff) / g.width;
                } else {
                    const auto& pts = g.points;
                    if (lambda <= pts.front().first) return pts.front().second;
                    if (lambda >= pts.back().first) return pts.back().second;
                    std::size_t hi = 1;
                    while (pts[hi].first < lambda) ++hi;
                    const auto& [x0, y0] = pts[hi - 1];
                    const auto& [x1, y1] = pts[hi];
                    return y0 + (y1 - y0) * (lambda - x0) / (x1 - x0);
                }
            },
            v_);
    }

    std::optional<double> lipschitz() const { return lipschitz_; }

    std::string describe() const {
        return std::visit(
            [&](const auto& g) -> std::string {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Poly>) {
                    std::string s = "polynomial:";
                    for (Eigen::Index k = 0; k < g.f.taps.size(); ++k)
                        s += (k ? "," : "") + format_double(g.f.taps[k]);
                    return s;
                } else if constexpr (std::is_same_v<T, Lowpass>) {
                    return "lowpass:" + format_double(g.cutoff) + "," + format_double(g.width);
                } else {
                    std::string s = "piecewise_linear:";
                    for (std::size_t i = 0; i < g.points.size(); ++i)
                        s += (i ? "," : "") + format_double(g.points[i].first) + ":" +
                             format_double(g.points[i].second);
                    return s;
                }
            },
            v_);
    }

private:
    struct Poly {
        PolyFilter f;
    };
    struct Pwl {
        std::vector<std::pair<double, double>> points;
    };
    struct Lowpass {
        double cutoff;
        double width;
    };

    void set_lipschitz(std::optional<double> lipschitz);

    std::variant<Poly, Pwl, Lowpass> v_;
    std::optional<double> lipschitz_;
};

/// Audits |h(a)-h(b)| <= L|a-b| over adjacent pairs of a uniform grid on
/// [-1,1]; 1e-9 slack absorbs roundoff.
inline LipschitzCheck lipschitz_verify(const SpectralFilterFn& h, double l, int grid_points = 10001) {
    if (grid_points < 2) throw std::invalid_argument("lipschitz_verify: need >= 2 grid points");
    LipschitzCheck out;
    double prev_x = -1.0;
    double prev_y = h(prev_x);
    for (int i = 1; i < grid_points; ++i) {
        const double x = -1.0 + 2.0 * i / (grid_points - 1);
        const double y = h(x);
        out.max_ratio = std::max(out.max_ratio, std::abs(y - prev_y) / (x - prev_x));
        prev_x = x;
        prev_y = y;
    }
    out.ok = out.max_ratio <= l + 1e-9;
    return out;
}

inline void SpectralFilterFn::set_lipschitz(std::optional<double> lipschitz) {
    if (lipschitz) {
        if (!(*lipschitz >= 0.0))
            throw std::invalid_argument("spectral filter: Lipschitz constant must be >= 0");
        const LipschitzCheck check = lipschitz_verify(*this, *lipschitz);
        if (!check.ok)
            throw std::invalid_argument("spectral filter: declared Lipschitz constant violated (ratio " +
                                        format_double(check.max_ratio) + ")");
    }
    lipschitz_ = lipschitz;
}

// ---------------------------------------------------------------------------
// Filter application
// ---------------------------------------------------------------------------

/// y = sum_j h(lambda_j(S)/n) x^_j v_j. Eigenvalues are normalized by n
/// before h is applied; for S in [0,1]^{n x n} they always land in [-1,1].
inline GraphSignal apply_spectral_graph_filter(const SpectralBasis& basis,
                                               const SpectralFilterFn& h, const GraphSignal& x) {
    SignedCoeffs c = gft(basis, x);
    const double n = static_cast<double>(basis.n);
    for (Eigen::Index k = 0; k < c.pos.size(); ++k) c.pos[k] *= h(basis.pos_vals[k] / n);
    for (Eigen::Index k = 0; k < c.neg.size(); ++k) c.neg[k] *= h(basis.neg_vals[k] / n);
    return igft(basis, c);
}

/// gamma = sum_j h(lambda_j(T_W)) phi^_j phi_j, acting pointwise in the WFT
/// domain. Signal energy outside the retained eigenpairs belongs to
/// eigenvalues below the retention cut (exactly zero for block kernels) and
/// passes through as h(0) * residual rather than being dropped.
inline GraphonSignal apply_graphon_filter(const GraphonBasis& basis, const SpectralFilterFn& h,
                                          const GraphonSignal& phi) {
    SignedCoeffs c = wft(basis, phi);
    const Eigen::VectorXd phi_grid = phi.grid_values(basis.resolution);
    const Eigen::VectorXd retained = iwft(basis, c).grid_values(basis.resolution);
    for (Eigen::Index k = 0; k < c.pos.size(); ++k) c.pos[k] *= h(basis.pos_vals[k]);
    for (Eigen::Index k = 0; k < c.neg.size(); ++k) c.neg[k] *= h(basis.neg_vals[k]);
    return GraphonSignal::grid(iwft(basis, c).grid_values(basis.resolution) +
                               h(0.0) * (phi_grid - retained));
}

/// Zeroes every coefficient whose eigenvalue satisfies |lambda_j| < c.
inline GraphonSignal bandlimit(const GraphonBasis& basis, double c, const GraphonSignal& phi) {
    SignedCoeffs coeffs = wft(basis, phi);
    for (Eigen::Index k = 0; k < coeffs.pos.size(); ++k)
        if (std::abs(basis.pos_vals[k]) < c) coeffs.pos[k] = 0.0;
    for (Eigen::Index k = 0; k < coeffs.neg.size(); ++k)
        if (std::abs(basis.neg_vals[k]) < c) coeffs.neg[k] = 0.0;
    return iwft(basis, coeffs);
}

/// Graph-side bandlimiting; thresholds on the normalized values lambda_j/n so
/// the bandwidth is comparable with the graphon-side one.
inline GraphSignal bandlimit(const SpectralBasis& basis, double c, const GraphSignal& x) {
    SignedCoeffs coeffs = gft(basis, x);
    const double n = static_cast<double>(basis.n);
    for (Eigen::Index k = 0; k < coeffs.pos.size(); ++k)
        if (std::abs(basis.pos_vals[k] / n) < c) coeffs.pos[k] = 0.0;
    for (Eigen::Index k = 0; k < coeffs.neg.size(); ++k)
        if (std::abs(basis.neg_vals[k] / n) < c) coeffs.neg[k] = 0.0;
    return igft(basis, coeffs);
}

/// Splitting threshold c = (1-|h0|) / (L (2||phi|| / eps + 1)) separating the
/// Lipschitz-controlled part of the spectrum from the residual.
inline double critical_bandwidth(double h0, double l, double signal_norm, double eps) {
    if (!(l > 0.0)) throw std::invalid_argument("critical_bandwidth: L must be > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("critical_bandwidth: eps must be > 0");
    if (!(signal_norm >= 0.0))
        throw std::invalid_argument("critical_bandwidth: signal norm must be >= 0");
    if (std::abs(h0) >= 1.0)
        throw std::invalid_argument("critical_bandwidth: |h0| must be < 1");
    return (1.0 - std::abs(h0)) / (l * (2.0 * signal_norm / eps + 1.0));
}

/// h normalized to unit sup norm on [-1,1] (grid-estimated); explicit opt-in.
inline SpectralFilterFn normalize_filter(const SpectralFilterFn& h, int grid_points = 10001) {
    double peak = 0.0;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        const double x = -1.0 + 2.0 * i / (grid_points - 1);
        const double y = h(x);
        peak = std::max(peak, std::abs(y));
        pts.emplace_back(x, y);
    }
    if (peak == 0.0) throw std::invalid_argument("normalize_filter: filter is identically zero");
    for (auto& [x, y] : pts) y /= peak;
    std::optional<double> l;
    if (h.lipschitz()) l = *h.lipschitz() / peak;
    return SpectralFilterFn::piecewise_linear(std::move(pts), l);
}

// ---------------------------------------------------------------------------
// Filter spec strings: polynomial:h0,h1,... | lowpass:cutoff,width |
// piecewise_linear:x0:y0,x1:y1,... with optional trailing ";L=<const>"
// ---------------------------------------------------------------------------

inline SpectralFilterFn parse_filter_spec(const std::string& spec) {
    std::string body = spec;
    std::optional<double> lipschitz;
    if (const auto semi = body.rfind(";L="); semi != std::string::npos) {
        lipschitz = std::stod(body.substr(semi + 3));
        body = body.substr(0, semi);
    }
    const auto colon = body.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("filter spec: expected family:params, got '" + spec + "'");
    const std::string family = body.substr(0, colon);
    const std::string rest = body.substr(colon + 1);
    if (family == "polynomial" || family == "taps") {
        auto vals = graphon_detail::parse_number_list(rest, "filter taps");
        Eigen::VectorXd taps = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        return SpectralFilterFn::polynomial(std::move(taps), lipschitz);
    }
    if (family == "lowpass") {
        auto vals = graphon_detail::parse_number_list(rest, "lowpass params");
        if (vals.size() != 2) throw std::invalid_argument("lowpass: expected cutoff,width");
        return SpectralFilterFn::lowpass_rolloff(vals[0], vals[1]);
    }
    if (family == "piecewise_linear") {
        std::vector<std::pair<double, double>> pts;
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            std::string tok = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            const auto mid = tok.find(':');
            if (mid == std::string::npos)
                throw std::invalid_argument("piecewise_linear: expected x:y pairs");
            pts.emplace_back(std::stod(tok.substr(0, mid)), std::stod(tok.substr(mid + 1)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return SpectralFilterFn::piecewise_linear(std::move(pts), lipschitz);
    }
    throw std::invalid_argument("filter spec: unknown family '" + family + "'");
}

} // namespace gsp
