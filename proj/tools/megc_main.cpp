// SPDX-License-Identifier: Apache-2.0
//
// megc: batch command-line front end for minimum-entropy Granger causality
// analysis.  Subcommands: simulate | fit | measure | permtest | roc | plot.
// Exit codes: 0 success, 1 usage, 2 numeric failure, 3 I/O.

#include <megc/all_pairs.hpp>
#include <megc/causality.hpp>
#include <megc/inference.hpp>
#include <megc/networks.hpp>
#include <megc/series.hpp>
#include <megc/state_space.hpp>
#include <megc/var.hpp>

#include "svg_plot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace megc;

namespace {

unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
    return j;
}

json bool_matrix_to_json(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c) ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<MeasureKind> parse_kinds(const std::string& arg) {
    std::vector<MeasureKind> kinds;
    std::string cur;
    std::vector<std::string> parts;
    for (char ch : arg) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    for (auto& p : parts)
        if (!p.empty()) kinds.push_back(parse_measure_kind(p));
    if (kinds.empty()) throw UsageError("no measure kinds given");
    return kinds;
}

std::pair<double, double> parse_band(const std::string& arg) {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw UsageError("--band expects LO,HI");
    try {
        const double lo = std::stod(arg.substr(0, comma));
        const double hi = std::stod(arg.substr(comma + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw UsageError("--band expects two numbers LO,HI");
    }
}

/// Resolve the VAR order from --order / --criterion {aic,bic,fixed}.
int resolve_order(const MultivariateSeries& s, int order, const std::string& criterion,
                  int pmax) {
    if (criterion == "fixed") {
        if (order < 1) throw UsageError("--order must be >= 1 with --criterion fixed");
        return order;
    }
    return select_order(s, pmax, parse_criterion(criterion));
}

MultivariateSeries load_input(const std::string& path, bool standardize_flag) {
    MultivariateSeries s = load_csv(path);
    return standardize_flag ? standardize(s) : s;
}

void write_curves_csv(const fs::path& path, const Eigen::VectorXd& thetas,
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "theta";
    for (const auto& [name, values] : columns) out << "," << name;
    out << "\n";
    char buf[64];
    for (Eigen::Index i = 0; i < thetas.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", thetas(i));
        out << buf;
        for (const auto& [name, values] : columns) {
            std::snprintf(buf, sizeof(buf), "%.17g", values(i));
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string topology = "ring";
    std::string adjacency_file;
    int n = 9;
    double lambda_max = 0.85;
    int samples = 120;
    int trials = 1;
    long burn_in = 1000;
    double diag = 2.0, offdiag = 1.0;
    bool no_self_loops = false;
    std::uint64_t seed = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    if (a.trials < 1) throw UsageError("--trials must be >= 1");
    Eigen::MatrixXd adjacency;
    if (a.topology == "ring") {
        adjacency = ring(a.n, !a.no_self_loops);
    } else if (a.topology == "star") {
        adjacency = star(a.n, !a.no_self_loops);
    } else if (a.topology == "custom") {
        if (a.adjacency_file.empty()) throw UsageError("--topology custom requires --adjacency");
        adjacency = load_adjacency_csv(a.adjacency_file);
    } else {
        throw UsageError("unknown topology '" + a.topology + "' (ring, star or custom)");
    }

    NetworkSpec spec{adjacency, a.lambda_max,
                     compound_symmetry(static_cast<int>(adjacency.rows()), a.diag, a.offdiag)};
    VarModel model = build_model(spec);

    fs::create_directories(a.out);
    std::vector<std::string> labels;
    for (Eigen::Index c = 0; c < adjacency.rows(); ++c)
        labels.push_back("ch" + std::to_string(c + 1));

    json files = json::array();
    for (int t = 0; t < a.trials; ++t) {
        auto s = simulate_var(model, a.samples, a.burn_in,
                              mix_seed(a.seed, 0x7472ULL, static_cast<std::uint64_t>(t)), labels);
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%03d.csv", t);
        save_csv(s, fs::path(a.out) / name);
        files.push_back(name);
    }

    json manifest;
    manifest["command"] = "simulate";
    manifest["seed"] = a.seed;
    manifest["config"] = {{"topology", a.topology}, {"n", adjacency.rows()},
                          {"lambda_max", a.lambda_max}, {"T", a.samples},
                          {"trials", a.trials},       {"burn_in", a.burn_in},
                          {"self_loops", !a.no_self_loops}, {"diag", a.diag},
                          {"offdiag", a.offdiag}};
    manifest["labels"] = labels;
    manifest["truth"] = matrix_to_json(adjacency);
    manifest["model"] = to_json(model);
    manifest["files"] = files;
    write_json_file(fs::path(a.out) / "manifest.json", manifest);
    std::cout << "simulated " << a.trials << " trial(s) of " << a.samples << " samples into "
              << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    int order = 1;
    std::string criterion = "fixed";
    int pmax = 10;
    bool standardize_flag = false;
    std::string out;
};

int run_fit(const FitArgs& a) {
    auto s = load_input(a.input, a.standardize_flag);
    const int p = resolve_order(s, a.order, a.criterion, a.pmax);
    VarModel model = fit_var(s, p);

    fs::create_directories(a.out);
    write_json_file(fs::path(a.out) / "model.json", to_json(model));

    json summary;
    summary["command"] = "fit";
    summary["config"] = {{"input", a.input}, {"order", a.order}, {"criterion", a.criterion},
                         {"pmax", a.pmax},   {"standardize", a.standardize_flag}};
    summary["labels"] = s.labels;
    summary["selected_order"] = p;
    summary["spectral_radius"] = spectral_radius(model);
    summary["logdet_omega"] = log_det_spd(model.omega, "fit");
    write_json_file(fs::path(a.out) / "fit.json", summary);
    std::cout << "order: " << p << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// measure
// ---------------------------------------------------------------------------

struct MeasureArgs {
    std::string input;
    std::string kinds = "GCM";
    int order = 1;
    std::string criterion = "fixed";
    int pmax = 10;
    int grid = 512;
    std::string band = "0,1.5707963267948966";
    unsigned threads = default_threads();
    bool standardize_flag = false;
    std::string out;
};

int run_measure(const MeasureArgs& a) {
    auto s = load_input(a.input, a.standardize_flag);
    auto kinds = parse_kinds(a.kinds);
    const auto [band_lo, band_hi] = parse_band(a.band);
    const int p = resolve_order(s, a.order, a.criterion, a.pmax);

    VarModel model = fit_var(s, p);
    StateSpaceModel ss = var_to_ss(model);

    AllPairsOptions opt;
    opt.grid = uniform_grid(a.grid);
    opt.band_lo = band_lo;
    opt.band_hi = band_hi;
    opt.threads = a.threads;
    opt.with_curves = true;

    auto results = compute_pairwise_measures(ss, kinds, opt);
    fs::create_directories(a.out);

    const json config = {{"input", a.input},   {"order", a.order},
                         {"criterion", a.criterion}, {"pmax", a.pmax},
                         {"selected_order", p},  {"grid", a.grid},
                         {"band", {band_lo, band_hi}}, {"standardize", a.standardize_flag}};
    for (const auto& [kind, r] : results) {
        const std::string name = to_string(kind);
        json j;
        j["command"] = "measure";
        j["kind"] = name;
        j["config"] = config;
        j["labels"] = s.labels;
        j["band"] = {band_lo, band_hi};
        j["matrix"] = matrix_to_json(r.values);
        if (!r.errors.empty()) j["errors"] = r.errors;
        write_json_file(fs::path(a.out) / ("measures_" + name + ".json"), j);

        if (is_frequency_kind(kind)) {
            std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
            for (const auto& [pr, curve] : r.curves) {
                const auto& [tgt, src] = pr;
                columns.emplace_back(s.labels[static_cast<std::size_t>(src)] + "->" +
                                         s.labels[static_cast<std::size_t>(tgt)],
                                     curve);
            }
            write_curves_csv(fs::path(a.out) / ("curves_" + name + ".csv"), r.thetas, columns);
        }
        for (const auto& e : r.errors) std::cerr << name << " " << e << "\n";
    }
    std::cout << "order: " << p << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// permtest
// ---------------------------------------------------------------------------

struct PermtestArgs {
    std::string input;
    std::string kinds = "GCM";
    int nperm = 1000;
    double alpha = 0.05;
    std::string method = "bonferroni";
    std::uint64_t seed = 0;
    int order = 1;
    std::string criterion = "fixed";
    int pmax = 10;
    int grid = 512;
    std::string band = "0,1.5707963267948966";
    std::string permute = "source";
    std::string estimator = "addone";
    unsigned threads = default_threads();
    bool standardize_flag = false;
    std::string out;
};

int run_permtest(const PermtestArgs& a) {
    auto s = load_input(a.input, a.standardize_flag);
    auto kinds = parse_kinds(a.kinds);
    const auto [band_lo, band_hi] = parse_band(a.band);
    const Correction method = parse_correction(a.method);
    if (a.permute != "source" && a.permute != "target")
        throw UsageError("--permute expects source or target");
    if (a.alpha <= 0.0 || a.alpha >= 1.0) throw UsageError("--alpha must lie in (0,1)");

    PermTestOptions opt;
    opt.order = resolve_order(s, a.order, a.criterion, a.pmax);
    opt.n_perm = a.nperm;
    opt.seed = a.seed;
    opt.grid = uniform_grid(a.grid);
    opt.band_lo = band_lo;
    opt.band_hi = band_hi;
    opt.permute_target = (a.permute == "target");
    opt.estimator = parse_pvalue_estimator(a.estimator);
    opt.threads = a.threads;

    auto res = permutation_test(s, kinds, opt);
    fs::create_directories(a.out);

    const json config = {{"input", a.input},       {"order", opt.order},
                         {"criterion", a.criterion}, {"n_perm", a.nperm},
                         {"alpha", a.alpha},       {"method", a.method},
                         {"seed", a.seed},         {"grid", a.grid},
                         {"band", {band_lo, band_hi}}, {"permute", a.permute},
                         {"estimator", a.estimator}, {"standardize", a.standardize_flag}};

    for (MeasureKind kind : kinds) {
        const std::string name = to_string(kind);
        auto dm = correct(res.p_values.at(kind), method, a.alpha);

        json pv;
        pv["command"] = "permtest";
        pv["kind"] = name;
        pv["config"] = config;
        pv["labels"] = s.labels;
        pv["observed"] = matrix_to_json(res.observed.at(kind));
        pv["p_values"] = matrix_to_json(res.p_values.at(kind));
        write_json_file(fs::path(a.out) / ("pvalues_" + name + ".json"), pv);

        json dec;
        dec["command"] = "permtest";
        dec["kind"] = name;
        dec["config"] = config;
        dec["labels"] = s.labels;
        dec["decisions"] = bool_matrix_to_json(dm.decisions);
        write_json_file(fs::path(a.out) / ("decisions_" + name + ".json"), dec);

        json rejected = json::array();
        int count = 0;
        for (Eigen::Index i = 0; i < dm.decisions.rows(); ++i)
            for (Eigen::Index j = 0; j < dm.decisions.cols(); ++j)
                if (i != j && dm.decisions(i, j)) {
                    ++count;
                    rejected.push_back({{"target", s.labels[static_cast<std::size_t>(i)]},
                                        {"source", s.labels[static_cast<std::size_t>(j)]},
                                        {"p", res.p_values.at(kind)(i, j)}});
                }
        json summary;
        summary["command"] = "permtest";
        summary["kind"] = name;
        summary["config"] = config;
        summary["rejections"] = count;
        summary["rejected_pairs"] = rejected;
        summary["dropped_draws"] = res.dropped_draws;
        write_json_file(fs::path(a.out) / ("summary_" + name + ".json"), summary);
        std::cout << name << ": " << count << " rejection(s) at alpha " << a.alpha << " ("
                  << a.method << ")\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// roc
// ---------------------------------------------------------------------------

struct RocArgs {
    std::string manifest;
    std::string inputs;
    std::string out;
};

int run_roc(const RocArgs& a) {
    json manifest = read_json_file(a.manifest);
    if (!manifest.contains("truth")) throw IoError("manifest lacks a 'truth' adjacency");
    Eigen::MatrixXd adjacency = matrix_from_json(manifest.at("truth"));
    auto truth = truth_edges(adjacency);

    std::map<std::string, std::vector<Eigen::MatrixXd>> by_kind;
    std::vector<fs::path> files;
    if (!fs::exists(a.inputs)) throw IoError("input directory '" + a.inputs + "' does not exist");
    for (const auto& entry : fs::recursive_directory_iterator(a.inputs)) {
        if (!entry.is_regular_file()) continue;
        const std::string fname = entry.path().filename().string();
        if (fname.rfind("pvalues_", 0) == 0 && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        json j = read_json_file(f);
        by_kind[j.at("kind").get<std::string>()].push_back(matrix_from_json(j.at("p_values")));
    }
    if (by_kind.empty()) throw UsageError("empty trial set: no pvalues_*.json under " + a.inputs);

    fs::create_directories(a.out);
    megc_cli::SvgPlot plot("false positive rate", "true positive rate");
    plot.add_diagonal();
    plot.set_metadata("megc roc manifest=" + a.manifest + " in=" + a.inputs);
    json out_json;
    out_json["command"] = "roc";
    out_json["config"] = {{"manifest", a.manifest}, {"inputs", a.inputs}};
    for (const auto& [kind, mats] : by_kind) {
        auto curve = roc_pooled(mats, truth, /*higher_is_positive=*/false);
        std::ofstream csv(fs::path(a.out) / ("roc_" + kind + ".csv"));
        if (!csv) throw IoError("cannot write roc CSV");
        csv << "fpr,tpr\n";
        char buf[64];
        megc_cli::PlotSeries series;
        series.name = kind;
        for (const auto& pt : curve.points) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g", pt.fpr, pt.tpr);
            csv << buf << "\n";
            series.x.push_back(pt.fpr);
            series.y.push_back(pt.tpr);
        }
        plot.add(std::move(series));
        out_json["kinds"][kind] = {{"auc", curve.auc}, {"trials", mats.size()}};
        std::cout << kind << ": AUC " << curve.auc << " over " << mats.size() << " trial(s)\n";
    }
    write_json_file(fs::path(a.out) / "roc.json", out_json);
    plot.write(fs::path(a.out) / "roc.svg");
    return 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PlotArgs {
    std::vector<std::string> inputs;
    double sample_interval = 0.0;  // 0 = radians axis
    std::string out;
};

int run_plot(const PlotArgs& a) {
    if (a.inputs.empty()) throw UsageError("plot: no input curves");
    megc_cli::SvgPlot plot(a.sample_interval > 0.0 ? "frequency [Hz]" : "theta [rad]", "measure");
    {
        std::string meta = "megc plot sample_interval=" + std::to_string(a.sample_interval) + " inputs=";
        for (std::size_t i = 0; i < a.inputs.size(); ++i) meta += (i ? "," : "") + a.inputs[i];
        plot.set_metadata(meta);
    }
    std::vector<double> reference_theta;
    for (const auto& file : a.inputs) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot open '" + file + "'");
        std::string line;
        if (!std::getline(in, line)) throw IoError("'" + file + "': empty file");
        auto headers = megc::detail::split_csv_line(line);
        if (headers.size() < 2 || headers[0] != "theta")
            throw IoError("'" + file + "': expected a 'theta' column followed by curves");
        std::vector<std::vector<double>> cols(headers.size());
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = megc::detail::split_csv_line(line);
            if (toks.size() != headers.size())
                throw IoError("'" + file + "': ragged row " + std::to_string(lineno));
            for (std::size_t c = 0; c < toks.size(); ++c) {
                double v;
                if (!megc::detail::parse_double(toks[c], v))
                    throw IoError("'" + file + "': bad number at row " + std::to_string(lineno));
                cols[c].push_back(v);
            }
        }
        if (cols[0].empty()) throw IoError("'" + file + "': no data rows");
        if (reference_theta.empty()) {
            reference_theta = cols[0];
        } else if (reference_theta != cols[0]) {
            throw UsageError("mismatched grids across curve files");
        }
        std::vector<double> x = cols[0];
        if (a.sample_interval > 0.0)
            for (double& v : x) v = v / (2.0 * kPi * a.sample_interval);
        for (std::size_t c = 1; c < headers.size(); ++c)
            plot.add(megc_cli::PlotSeries{headers[c], x, cols[c]});
    }
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    plot.write(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-entropy Granger causality toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "simulate network VAR trials");
    c_sim->add_option("--topology", sim.topology, "ring | star | custom");
    c_sim->add_option("--adjacency", sim.adjacency_file, "0/1 adjacency CSV for custom topology");
    c_sim->add_option("--n", sim.n, "number of nodes");
    c_sim->add_option("--lambda", sim.lambda_max, "spectral radius of the transition matrix");
    c_sim->add_option("--T", sim.samples, "samples per trial");
    c_sim->add_option("--trials", sim.trials, "number of independent trials");
    c_sim->add_option("--burnin", sim.burn_in, "burn-in samples to discard");
    c_sim->add_option("--diag", sim.diag, "innovation covariance diagonal");
    c_sim->add_option("--offdiag", sim.offdiag, "innovation covariance off-diagonal");
    c_sim->add_flag("--no-self-loops", sim.no_self_loops, "omit self connections");
    c_sim->add_option("--seed", sim.seed, "random seed");
    c_sim->add_option("--out", sim.out, "output directory")->required();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "fit a VAR model to a series");
    c_fit->add_option("--input", fit.input, "input CSV")->required();
    c_fit->add_option("--order", fit.order, "VAR order (with --criterion fixed)");
    c_fit->add_option("--criterion", fit.criterion, "aic | bic | fixed");
    c_fit->add_option("--pmax", fit.pmax, "maximum candidate order");
    c_fit->add_flag("--standardize", fit.standardize_flag, "standardize channels first");
    c_fit->add_option("--out", fit.out, "output directory")->required();

    MeasureArgs meas;
    auto* c_meas = app.add_subcommand("measure", "compute measure matrices and curves");
    c_meas->add_option("--input", meas.input, "input CSV")->required();
    c_meas->add_option("--kinds", meas.kinds, "comma-separated measure kinds");
    c_meas->add_option("--order", meas.order, "VAR order (with --criterion fixed)");
    c_meas->add_option("--criterion", meas.criterion, "aic | bic | fixed");
    c_meas->add_option("--pmax", meas.pmax, "maximum candidate order");
    c_meas->add_option("--grid", meas.grid, "frequency grid points on [0, pi]");
    c_meas->add_option("--band", meas.band, "frequency band LO,HI for averaging");
    c_meas->add_option("--threads", meas.threads, "worker threads");
    c_meas->add_flag("--standardize", meas.standardize_flag, "standardize channels first");
    c_meas->add_option("--out", meas.out, "output directory")->required();

    PermtestArgs perm;
    auto* c_perm = app.add_subcommand("permtest", "permutation test for measure matrices");
    c_perm->add_option("--input", perm.input, "input CSV")->required();
    c_perm->add_option("--kinds", perm.kinds, "comma-separated measure kinds");
    c_perm->add_option("--nperm", perm.nperm, "number of permutations");
    c_perm->add_option("--alpha", perm.alpha, "significance level");
    c_perm->add_option("--method", perm.method, "bonferroni | bh | none");
    c_perm->add_option("--seed", perm.seed, "random seed");
    c_perm->add_option("--order", perm.order, "VAR order (with --criterion fixed)");
    c_perm->add_option("--criterion", perm.criterion, "aic | bic | fixed");
    c_perm->add_option("--pmax", perm.pmax, "maximum candidate order");
    c_perm->add_option("--grid", perm.grid, "frequency grid points on [0, pi]");
    c_perm->add_option("--band", perm.band, "frequency band LO,HI");
    c_perm->add_option("--permute", perm.permute, "permute the source or the target channel");
    c_perm->add_option("--estimator", perm.estimator, "p-value estimator: addone | plain");
    c_perm->add_option("--threads", perm.threads, "worker threads");
    c_perm->add_flag("--standardize", perm.standardize_flag, "standardize channels first");
    c_perm->add_option("--out", perm.out, "output directory")->required();

    RocArgs roc;
    auto* c_roc = app.add_subcommand("roc", "pool permutation p-values into ROC curves");
    c_roc->add_option("--manifest", roc.manifest, "simulation manifest with the truth")->required();
    c_roc->add_option("--in", roc.inputs, "directory scanned for pvalues_*.json")->required();
    c_roc->add_option("--out", roc.out, "output directory")->required();

    PlotArgs plt;
    auto* c_plot = app.add_subcommand("plot", "render curve CSVs as an SVG line plot");
    c_plot->add_option("--inputs", plt.inputs, "curve CSV files")->required()->expected(-1);
    c_plot->add_option("--sample-interval", plt.sample_interval,
                       "sampling interval in seconds; rescales theta to Hz");
    c_plot->add_option("--out", plt.out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_fit->parsed()) return run_fit(fit);
        if (c_meas->parsed()) return run_measure(meas);
        if (c_perm->parsed()) return run_permtest(perm);
        if (c_roc->parsed()) return run_roc(roc);
        if (c_plot->parsed()) return run_plot(plt);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
