// Command-line frontend: graph sampling, spectra, filtering and the
// convergence/transfer experiment harness with reproducible seeds.
//
// Exit codes: 0 success, 1 numeric failure, 2 usage error, 3 missing data.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gsp/experiments.hpp"
#include "gsp/filters.hpp"
#include "gsp/graph.hpp"
#include "gsp/graphon.hpp"
#include "gsp/homdensity.hpp"
#include "gsp/movielens.hpp"
#include "gsp/spectral.hpp"
#include "gsp/svg.hpp"

namespace fs = std::filesystem;

namespace {

struct MissingDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void write_config_snapshot(const fs::path& dir,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(dir / "config.txt");
    if (!out) throw std::runtime_error("cannot write config snapshot in " + dir.string());
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config file: expected key=value, got '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

gsp::SpectralFilterFn load_filter_file(const std::string& path) {
    auto kv = read_kv_file(path);
    const auto family = kv.find("family");
    if (family == kv.end()) throw std::invalid_argument(path + ": missing 'family'");
    std::string spec = family->second + ":";
    if (family->second == "polynomial") {
        spec += kv.at("taps");
    } else if (family->second == "lowpass") {
        spec += kv.at("cutoff") + "," + kv.at("width");
    } else if (family->second == "piecewise_linear") {
        spec += kv.at("breakpoints");
    } else {
        throw std::invalid_argument(path + ": unknown family '" + family->second + "'");
    }
    if (kv.count("L")) spec += ";L=" + kv.at("L");
    return gsp::parse_filter_spec(spec);
}

// --------------------------------------------------------------------------
// sample
// --------------------------------------------------------------------------

struct SampleArgs {
    std::string graphon = "er:0.4";
    int n = 100;
    std::string mode = "bernoulli";
    std::string latents = "uniform";
    std::uint64_t seed = 1;
    std::string out = "out/sample";
};

int run_sample(const SampleArgs& a) {
    const gsp::Graphon w = gsp::parse_graphon_spec(a.graphon);
    gsp::Rng rng(a.seed);
    const gsp::LatentLabels labels = gsp::sample_latents(
        a.n, a.latents == "grid" ? gsp::LatentMode::regular_grid : gsp::LatentMode::uniform_iid, rng);
    const gsp::SampleMode mode =
        a.mode == "weighted" ? gsp::SampleMode::weighted : gsp::SampleMode::bernoulli;
    const gsp::Graph g = gsp::sample_graph(w, labels, mode, rng);

    fs::create_directories(a.out);
    gsp::save_adjacency_csv(g, (fs::path(a.out) / "adjacency.csv").string());
    gsp::write_vector_csv((fs::path(a.out) / "labels.csv").string(), labels.u, "# schema=v1");
    write_config_snapshot(a.out, {{"command", "sample"},
                                  {"graphon", a.graphon},
                                  {"n", std::to_string(a.n)},
                                  {"mode", a.mode},
                                  {"latents", a.latents},
                                  {"seed", std::to_string(a.seed)}});
    const double density = a.n > 1 ? g.S.sum() / (static_cast<double>(a.n) * (a.n - 1)) : 0.0;
    std::cout << "edge_density=" << gsp::format_double(density) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// spectrum
// --------------------------------------------------------------------------

struct SpectrumArgs {
    std::string graph_file;
    std::string graphon;
    int k = 20;
    int resolution = 2000;
    std::string out;
    bool dump_eigenfunctions = false;
};

int run_spectrum(const SpectrumArgs& a) {
    std::ostringstream csv;
    csv << "# schema=v1\n";
    if (!a.graph_file.empty()) {
        const gsp::Graph g = gsp::load_graph_csv(a.graph_file);
        auto [pos, neg] = gsp::signed_eigenvalues(g.S);
        csv << "index,eigenvalue,normalized\n";
        for (Eigen::Index i = 0; i < pos.size(); ++i)
            csv << (i + 1) << "," << gsp::format_double(pos[i]) << ","
                << gsp::format_double(pos[i] / g.n) << "\n";
        for (Eigen::Index i = 0; i < neg.size(); ++i)
            csv << -(i + 1) << "," << gsp::format_double(neg[i]) << ","
                << gsp::format_double(neg[i] / g.n) << "\n";
    } else if (!a.graphon.empty()) {
        const gsp::Graphon w = gsp::parse_graphon_spec(a.graphon);
        const gsp::GraphonBasis basis = gsp::graphon_eigs(w, a.resolution, a.k);
        if (a.dump_eigenfunctions) {
            if (a.out.empty())
                throw std::invalid_argument("spectrum: --dump-eigenfunctions requires --out");
            gsp::save_basis_csv(basis, a.out, true);
            return 0;
        }
        csv << "index,eigenvalue\n";
        for (int j : basis.signed_indices())
            csv << j << "," << gsp::format_double(basis.eigenvalue(j)) << "\n";
    } else {
        throw std::invalid_argument("spectrum: need --graph or --graphon");
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(a.out);
        out << csv.str();
    }
    return 0;
}

// --------------------------------------------------------------------------
// density
// --------------------------------------------------------------------------

struct DensityArgs {
    std::string motif = "edge";  // edge | cycle:k | path:k | complete:k | file path
    std::string graph_file;
    std::string graphon;
    std::string method = "exact";  // exact | mc
    int samples = 100000;
    std::uint64_t seed = 1;
    std::string out;
};

gsp::Motif resolve_motif(const std::string& spec) {
    if (spec == "edge") return gsp::motif_edge();
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string family = spec.substr(0, colon);
        const int k = std::stoi(spec.substr(colon + 1));
        if (family == "cycle") return gsp::motif_cycle(k);
        if (family == "path") return gsp::motif_path(k);
        if (family == "complete") return gsp::motif_complete(k);
    }
    return gsp::load_motif(spec);  // treat as an edge-list file
}

int run_density(const DensityArgs& a) {
    const gsp::Motif motif = resolve_motif(a.motif);
    std::ostringstream csv;
    csv << "# schema=v1\nmotif,n,seed,value,stderr\n";
    if (!a.graph_file.empty()) {
        const gsp::Graph g = gsp::load_graph_csv(a.graph_file);
        csv << a.motif << "," << g.n << ",," << gsp::format_double(gsp::hom_density_graph(motif, g))
            << ",0\n";
    } else if (!a.graphon.empty()) {
        const gsp::Graphon w = gsp::parse_graphon_spec(a.graphon);
        gsp::DensityEstimate est;
        if (a.method == "mc") {
            gsp::Rng rng(a.seed);
            est = gsp::hom_density_graphon_mc(motif, w, a.samples, rng);
        } else {
            est = gsp::hom_density_graphon_exact(motif, w);
        }
        csv << a.motif << ",," << a.seed << "," << gsp::format_double(est.value) << ","
            << gsp::format_double(est.std_error) << "\n";
    } else {
        throw std::invalid_argument("density: need --graph or --graphon");
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(a.out);
        out << csv.str();
    }
    return 0;
}

// --------------------------------------------------------------------------
// filter
// --------------------------------------------------------------------------

struct FilterArgs {
    std::string graph_file;
    std::string signal_file;
    std::string mode = "poly";
    std::string taps;
    std::string filter_spec;
    std::string filter_file;
    std::string out;
    bool check_agreement = false;
};

gsp::SpectralFilterFn resolve_filter(const std::string& taps, const std::string& spec,
                                     const std::string& file) {
    if (!file.empty()) return load_filter_file(file);
    if (!spec.empty()) return gsp::parse_filter_spec(spec);
    if (!taps.empty()) return gsp::parse_filter_spec("polynomial:" + taps);
    throw std::invalid_argument("filter: need --taps, --filter or --filter-file");
}

int run_filter(const FilterArgs& a) {
    const gsp::Graph g = gsp::load_graph_csv(a.graph_file);
    const gsp::GraphSignal x = gsp::load_signal_csv(a.signal_file);

    gsp::GraphSignal y;
    if (a.mode == "poly") {
        if (a.taps.empty()) throw std::invalid_argument("filter --mode poly requires --taps");
        auto vals = gsp::graphon_detail::parse_number_list(a.taps, "taps");
        const gsp::PolyFilter f = gsp::PolyFilter::from_taps(
            Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
        y = gsp::apply_poly(g, f, x);
    } else if (a.mode == "spectral") {
        const gsp::SpectralFilterFn h = resolve_filter(a.taps, a.filter_spec, a.filter_file);
        y = gsp::apply_spectral_graph_filter(gsp::eigendecompose(g), h, x);
    } else {
        throw std::invalid_argument("filter: mode must be poly or spectral");
    }

    if (a.check_agreement) {
        // poly taps h on the raw shift equal the spectral filter sum h_k (n l)^k
        if (a.taps.empty()) throw std::invalid_argument("--check-agreement requires --taps");
        auto vals = gsp::graphon_detail::parse_number_list(a.taps, "taps");
        const gsp::PolyFilter f = gsp::PolyFilter::from_taps(
            Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
        const gsp::GraphSignal y_poly = gsp::apply_poly(g, f, x);
        const gsp::SpectralBasis basis = gsp::eigendecompose(g);
        gsp::SignedCoeffs c = gsp::gft(basis, x);
        for (Eigen::Index i = 0; i < c.pos.size(); ++i)
            c.pos[i] *= gsp::poly_freq_response(f, basis.pos_vals[i]);
        for (Eigen::Index i = 0; i < c.neg.size(); ++i)
            c.neg[i] *= gsp::poly_freq_response(f, basis.neg_vals[i]);
        const double gap = (gsp::igft(basis, c) - y_poly).norm();
        std::cout << "poly_vs_spectral_gap=" << gsp::format_double(gap) << "\n";
    }

    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + a.out);
    out << "# schema=v1\n# mode=" << a.mode << "\n# normalization="
        << (a.mode == "spectral" ? "lambda/n" : "raw-shift") << "\n";
    for (Eigen::Index i = 0; i < y.size(); ++i) out << gsp::format_double(y[i]) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// experiment
// --------------------------------------------------------------------------

struct ExperimentArgs {
    std::string name;
    std::string config_file;
    std::string graphon;
    std::string n_list;
    int reps = -1;
    std::uint64_t seed = 1;
    int resolution = -1;
    int threads = 1;
    double sigma = 0.2;
    double a0 = 1.0;
    double a = 0.0;
    std::string align = "signed";
    std::string filter_spec;
    std::string filter_file;
    std::string taps;
    std::string signal_source = "pollution";
    std::string js = "1,2,3";
    std::string out = "out/experiment";
    bool assert_trend = false;
    bool svg = false;
    // movie
    std::string data_path = "data/ml-100k/u.data";
    std::string k_list = "1,2,3";
    double lambda_reg = 1e-3;
    double eval_fraction = 0.1;
    std::string symmetrize = "max";
};

void apply_config_file(ExperimentArgs& a) {
    if (a.config_file.empty()) return;
    for (const auto& [key, value] : read_kv_file(a.config_file)) {
        if (key == "graphon") { if (a.graphon.empty()) a.graphon = value; }
        else if (key == "n_list") { if (a.n_list.empty()) a.n_list = value; }
        else if (key == "reps") { if (a.reps < 0) a.reps = std::stoi(value); }
        else if (key == "seed") a.seed = std::stoull(value);
        else if (key == "resolution") { if (a.resolution < 0) a.resolution = std::stoi(value); }
        else if (key == "sigma") a.sigma = std::stod(value);
        else if (key == "a0") a.a0 = std::stod(value);
        else if (key == "a") a.a = std::stod(value);
        else if (key == "filter") a.filter_spec = value;
        else if (key == "signal_source") a.signal_source = value;
        else if (key == "threads") a.threads = std::stoi(value);
        else if (key == "align") a.align = value;
        else if (key == "js") a.js = value;
        else if (key == "data") a.data_path = value;
        else if (key == "k_list") a.k_list = value;
        else if (key == "lambda_reg") a.lambda_reg = std::stod(value);
        else throw std::invalid_argument("config file: unknown key '" + key + "'");
    }
}

gsp::ExperimentConfig base_config(const ExperimentArgs& a, const std::string& default_graphon,
                                  const std::string& default_n_list, int default_reps,
                                  int default_resolution) {
    gsp::ExperimentConfig cfg;
    cfg.graphon_spec = a.graphon.empty() ? default_graphon : a.graphon;
    cfg.graphon = gsp::parse_graphon_spec(cfg.graphon_spec);
    cfg.n_list = parse_int_list(a.n_list.empty() ? default_n_list : a.n_list);
    cfg.reps = a.reps < 0 ? default_reps : a.reps;
    cfg.resolution = a.resolution < 0 ? default_resolution : a.resolution;
    cfg.master_seed = a.seed;
    cfg.threads = a.threads;
    cfg.sigma = a.sigma;
    cfg.a0 = a.a0;
    cfg.a = a.a;
    cfg.align_by_magnitude = a.align == "magnitude";
    cfg.signal_source = a.signal_source;
    cfg.validate();
    return cfg;
}

void emit_report(const gsp::ConvergenceReport& report, const gsp::ExperimentConfig& cfg,
                 const fs::path& dir, const std::string& tag, bool svg, bool use_median) {
    report.write_rows_csv((dir / (tag + "_rows.csv")).string());
    report.write_summary_csv((dir / (tag + "_summary.csv")).string());
    if (svg) {
        std::vector<gsp::PlotSeries> series;
        std::vector<int> js{0};
        if (report.has_j) {
            js.clear();
            for (const auto& s : report.summarize())
                if (std::find(js.begin(), js.end(), s.j) == js.end()) js.push_back(s.j);
        }
        for (int j : js) {
            gsp::PlotSeries s;
            s.name = report.has_j ? ("j=" + std::to_string(j)) : tag;
            for (int n : cfg.n_list) s.x.push_back(n);
            const auto curve = report.curve(cfg.n_list, j, use_median);
            s.y = curve;
            series.push_back(std::move(s));
        }
        gsp::write_svg_plot((dir / (tag + ".svg")).string(), tag, series, true);
    }
}

bool report_trend_ok(const gsp::ConvergenceReport& report, const gsp::ExperimentConfig& cfg,
                     bool use_median) {
    std::vector<int> js{0};
    if (report.has_j) {
        js.clear();
        for (const auto& s : report.summarize())
            if (std::find(js.begin(), js.end(), s.j) == js.end()) js.push_back(s.j);
    }
    for (int j : js)
        if (!gsp::check_nonincreasing(report.curve(cfg.n_list, j, use_median))) return false;
    return true;
}

int run_experiment(ExperimentArgs& a) {
    apply_config_file(a);
    fs::create_directories(a.out);
    const fs::path dir(a.out);
    bool trend_ok = true;

    std::vector<std::pair<std::string, std::string>> snapshot{
        {"command", "experiment"}, {"name", a.name}, {"seed", std::to_string(a.seed)},
        {"threads", std::to_string(a.threads)}};

    if (a.name == "pollution") {
        auto cfg = base_config(a, "expabs:2.3", "5,10,20,50,100,200", 50, 2000);
        snapshot.insert(snapshot.end(), {{"graphon", cfg.graphon_spec},
                                         {"n_list", join_ints(cfg.n_list)},
                                         {"reps", std::to_string(cfg.reps)},
                                         {"sigma", gsp::format_double(cfg.sigma)},
                                         {"align", a.align}});
        const auto report = gsp::exp_pollution(cfg);
        emit_report(report, cfg, dir, "pollution", a.svg, true);
        if (a.assert_trend) trend_ok = report_trend_ok(report, cfg, true);
    } else if (a.name == "gmrf") {
        std::vector<std::pair<std::string, std::string>> models;
        if (!a.graphon.empty())
            models = {{"custom", a.graphon}};
        else
            models = {{"er", "er:0.4"}, {"sbm", "sbm:0.5,1;0.8,0.2;0.2,0.8"}, {"exp", "exp:2.3"}};
        for (const auto& [tag, spec] : models) {
            ExperimentArgs one = a;
            one.graphon = spec;
            auto cfg = base_config(one, spec, "50,100,200,400,800", 10, 2000);
            snapshot.emplace_back("graphon_" + tag, spec);
            snapshot.emplace_back("n_list", join_ints(cfg.n_list));
            snapshot.emplace_back("reps", std::to_string(cfg.reps));
            snapshot.emplace_back("a0", gsp::format_double(cfg.a0));
            snapshot.emplace_back("a", cfg.a > 0 ? gsp::format_double(cfg.a) : "auto");
            snapshot.emplace_back("resolution", std::to_string(cfg.resolution));
            const auto report = gsp::exp_gmrf(cfg);
            emit_report(report, cfg, dir, "gmrf_" + tag, a.svg, true);
            if (a.assert_trend && !report_trend_ok(report, cfg, true)) trend_ok = false;
        }
    } else if (a.name == "eigconv") {
        auto cfg = base_config(a, "er:0.4", "50,100,200,400", 10, 2000);
        snapshot.insert(snapshot.end(), {{"graphon", cfg.graphon_spec},
                                         {"n_list", join_ints(cfg.n_list)},
                                         {"reps", std::to_string(cfg.reps)},
                                         {"resolution", std::to_string(cfg.resolution)},
                                         {"js", a.js}});
        const auto report = gsp::exp_eigconv(cfg, parse_int_list(a.js));
        emit_report(report, cfg, dir, "eigconv", a.svg, false);
        if (a.assert_trend) trend_ok = report_trend_ok(report, cfg, false);
    } else if (a.name == "transfer") {
        auto cfg = base_config(a, "sbm:0.5,1;0.8,0.2;0.2,0.8", "100,200,400,800", 10, 2000);
        if (a.filter_spec.empty() && a.filter_file.empty() && a.taps.empty())
            a.filter_spec = "lowpass:0.25,0.75";
        cfg.filter = resolve_filter(a.taps, a.filter_spec, a.filter_file);
        snapshot.insert(snapshot.end(), {{"graphon", cfg.graphon_spec},
                                         {"n_list", join_ints(cfg.n_list)},
                                         {"reps", std::to_string(cfg.reps)},
                                         {"resolution", std::to_string(cfg.resolution)},
                                         {"filter", cfg.filter->describe()},
                                         {"signal_source", cfg.signal_source}});
        if (cfg.filter->lipschitz()) {
            const gsp::GraphonSignal phi = gsp::GraphonSignal::closed_form(
                [&cfg](double u) { return gsp::pollution_signal(u, cfg.sigma); }, "pollution");
            const double h0 = (*cfg.filter)(0.0);
            if (std::abs(h0) < 1.0) {
                const double c = gsp::critical_bandwidth(h0, *cfg.filter->lipschitz(),
                                                         phi.quadrature_norm(cfg.resolution), 0.1);
                snapshot.emplace_back("critical_bandwidth_eps0.1", gsp::format_double(c));
            }
        }
        const auto report = gsp::exp_filter_transfer(cfg);
        emit_report(report, cfg, dir, "transfer", a.svg, true);
        if (a.assert_trend) trend_ok = report_trend_ok(report, cfg, true);
    } else if (a.name == "movie") {
        if (!fs::exists(a.data_path))
            throw MissingDataError(
                "ratings file not found: " + a.data_path +
                "\nFetch the MovieLens 100k dataset first (scripts/fetch_movielens.sh), or pass "
                "--data <path-to-u.data>. A synthetic fixture ships in tests/fixtures/.");
        const gsp::RatingMatrix ratings = gsp::parse_ratings(a.data_path);
        gsp::MovieExperimentConfig mcfg;
        if (!a.n_list.empty()) mcfg.n_list = parse_int_list(a.n_list);
        mcfg.k_list = parse_int_list(a.k_list);
        mcfg.lambda_reg = a.lambda_reg;
        mcfg.eval_fraction = a.eval_fraction;
        mcfg.seed = a.seed;
        mcfg.symmetrize = a.symmetrize == "mean" ? gsp::Symmetrize::mean : gsp::Symmetrize::max;
        snapshot.insert(snapshot.end(), {{"data", a.data_path},
                                         {"n_list", join_ints(mcfg.n_list)},
                                         {"k_list", join_ints(mcfg.k_list)},
                                         {"lambda_reg", gsp::format_double(mcfg.lambda_reg)},
                                         {"eval_fraction", gsp::format_double(mcfg.eval_fraction)},
                                         {"symmetrize", a.symmetrize}});
        const auto table = gsp::exp_movie(ratings, mcfg);
        table.write_csv((dir / "movie_table.csv").string());
        if (a.assert_trend)
            for (int k : table.k_list) {
                std::vector<double> curve;
                for (int n : table.n_list) curve.push_back(table.rel_diff.at({k, n}));
                if (!gsp::check_nonincreasing(curve, 1, 0.20)) trend_ok = false;
            }
    } else {
        throw std::invalid_argument("unknown experiment '" + a.name + "'");
    }

    write_config_snapshot(dir, snapshot);
    if (!trend_ok) {
        std::cerr << "trend assertion failed\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph & graphon signal processing toolkit"};
    app.require_subcommand(1);

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "sample a graph from a graphon");
    sample->add_option("--graphon", sa.graphon, "graphon spec (er:p, sbm:..., exp:beta, expabs:beta, step:file.csv)");
    sample->add_option("--n", sa.n, "node count")->check(CLI::PositiveNumber);
    sample->add_option("--mode", sa.mode)->check(CLI::IsMember({"bernoulli", "weighted"}));
    sample->add_option("--latents", sa.latents)->check(CLI::IsMember({"uniform", "grid"}));
    sample->add_option("--seed", sa.seed);
    sample->add_option("--out", sa.out, "output directory");

    SpectrumArgs pa;
    auto* spectrum = app.add_subcommand("spectrum", "signed-index eigenvalues of a graph or graphon");
    spectrum->add_option("--graph", pa.graph_file, "adjacency CSV");
    spectrum->add_option("--graphon", pa.graphon, "graphon spec");
    spectrum->add_option("--k", pa.k, "eigenpairs per sign (graphon input)");
    spectrum->add_option("--resolution", pa.resolution)->check(CLI::Range(2, 100000));
    spectrum->add_option("--out", pa.out, "output CSV (default stdout)");
    spectrum->add_flag("--dump-eigenfunctions", pa.dump_eigenfunctions,
                       "also dump the eigenfunction grid (graphon input, needs --out)");

    DensityArgs da;
    auto* density = app.add_subcommand("density", "homomorphism density of a motif");
    density->add_option("--motif", da.motif, "edge | cycle:k | path:k | complete:k | edge-list file");
    density->add_option("--graph", da.graph_file, "adjacency CSV");
    density->add_option("--graphon", da.graphon, "graphon spec");
    density->add_option("--method", da.method)->check(CLI::IsMember({"exact", "mc"}));
    density->add_option("--samples", da.samples)->check(CLI::PositiveNumber);
    density->add_option("--seed", da.seed);
    density->add_option("--out", da.out, "output CSV (default stdout)");

    FilterArgs fa;
    auto* filter = app.add_subcommand("filter", "apply a polynomial or spectral filter");
    filter->add_option("--graph", fa.graph_file)->required();
    filter->add_option("--signal", fa.signal_file)->required();
    filter->add_option("--mode", fa.mode)->check(CLI::IsMember({"poly", "spectral"}));
    filter->add_option("--taps", fa.taps, "inline taps h0,h1,...");
    filter->add_option("--filter", fa.filter_spec, "filter spec string");
    filter->add_option("--filter-file", fa.filter_file, "filter config file");
    filter->add_option("--out", fa.out)->required();
    filter->add_flag("--check-agreement", fa.check_agreement,
                     "report vertex-vs-spectral application gap");

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "run a convergence/transfer experiment");
    experiment->add_option("name", ea.name, "pollution|gmrf|eigconv|transfer|movie")->required();
    experiment->add_option("--config", ea.config_file, "key=value config file");
    experiment->add_option("--graphon", ea.graphon);
    experiment->add_option("--n-list", ea.n_list, "comma-separated node counts");
    experiment->add_option("--reps", ea.reps, "repetitions per n");
    experiment->add_option("--seed", ea.seed);
    experiment->add_option("--resolution", ea.resolution);
    experiment->add_option("--threads", ea.threads)->check(CLI::PositiveNumber);
    experiment->add_option("--sigma", ea.sigma);
    experiment->add_option("--a0", ea.a0);
    experiment->add_option("--a", ea.a);
    experiment->add_option("--align", ea.align)->check(CLI::IsMember({"signed", "magnitude"}));
    experiment->add_option("--filter", ea.filter_spec);
    experiment->add_option("--filter-file", ea.filter_file);
    experiment->add_option("--taps", ea.taps);
    experiment->add_option("--signal-source", ea.signal_source)
        ->check(CLI::IsMember({"pollution", "gmrf"}));
    experiment->add_option("--js", ea.js, "signed eigenvalue indices (eigconv)");
    experiment->add_option("--out", ea.out);
    experiment->add_flag("--assert-trend", ea.assert_trend, "exit 1 unless metrics trend down");
    experiment->add_flag("--svg", ea.svg, "also write an SVG line plot");
    experiment->add_option("--data", ea.data_path, "MovieLens u.data path");
    experiment->add_option("--k-list", ea.k_list, "filter orders (movie)");
    experiment->add_option("--lambda-reg", ea.lambda_reg);
    experiment->add_option("--eval-fraction", ea.eval_fraction);
    experiment->add_option("--symmetrize", ea.symmetrize)->check(CLI::IsMember({"max", "mean"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*sample) return run_sample(sa);
        if (*spectrum) return run_spectrum(pa);
        if (*density) return run_density(da);
        if (*filter) return run_filter(fa);
        if (*experiment) return run_experiment(ea);
    } catch (const MissingDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
