#pragma once

// Command-line front end. run() is the whole program; tools/nkcomm.cpp only
// forwards argv. Exit codes: 0 success, 2 usage or parse error, 3 capacity,
// 4 internal invariant violation.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "community.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "nk_model.hpp"
#include "sweep.hpp"
#include "trait_stats.hpp"

namespace nkcomm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitInternal = 4;

/// Worker count: hardware concurrency, capped by NKCOMM_THREADS when set.
inline std::size_t worker_count()
{
    std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NKCOMM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ParameterError("NKCOMM_THREADS must be a positive integer");
        workers = std::min(workers, static_cast<std::size_t>(v));
    }
    return workers;
}

// Accepts "0..9", "0,1,2" or a mix such as "0..3,7".
inline std::vector<std::size_t> parse_k_list(const std::string& text)
{
    std::vector<std::size_t> ks;
    std::stringstream ss(text);
    std::string part;
    auto number = [&](const std::string& s) -> std::size_t {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ParameterError("--k-values: '" + text + "' is not a list of integers");
        return static_cast<std::size_t>(std::stoul(s));
    };
    while (std::getline(ss, part, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            ks.push_back(number(part));
        } else {
            const auto lo = number(part.substr(0, dots));
            const auto hi = number(part.substr(dots + 2));
            if (hi < lo) throw ParameterError("--k-values: empty range '" + part + "'");
            for (auto k = lo; k <= hi; ++k) ks.push_back(k);
        }
    }
    if (ks.empty()) throw ParameterError("--k-values must not be empty");
    return ks;
}

inline std::vector<EpistasisMode> parse_mode_list(const std::string& text)
{
    std::vector<EpistasisMode> modes;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto m = parse_epistasis_mode(part);
        if (!m) throw ParameterError("--modes: unknown mode '" + part + "' (adjacent, random)");
        modes.push_back(*m);
    }
    if (modes.empty()) throw ParameterError("--modes must not be empty");
    return modes;
}

class OutputFile {
public:
    OutputFile(const std::string& path, std::ostream& fallback, bool binary = false)
    {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
            return;
        }
        file_.open(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
        if (!file_) throw ParameterError("cannot open '" + path + "' for writing");
        stream_ = &file_;
    }

    std::ostream& get() { return *stream_; }

    void close()
    {
        stream_->flush();
        if (!*stream_) throw InvariantError("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open '" + path + "' for reading");
    return in;
}

struct ModelFlags {
    std::size_t n = 0;
    std::size_t k = 0;
    std::string mode = "random";
    std::uint64_t seed = 0;
    std::string table_mode = "materialized";
    std::string model_json;

    void add_to(CLI::App& app, bool required)
    {
        auto* n_opt = app.add_option("--n", n, "number of genes");
        auto* k_opt = app.add_option("--k", k, "epistatic genes per trait");
        if (required) {
            n_opt->required();
            k_opt->required();
        }
        app.add_option("--mode", mode, "adjacent | random")->capture_default_str();
        app.add_option("--seed", seed, "landscape seed")->capture_default_str();
        app.add_option("--table-mode", table_mode, "materialized | on_the_fly")->capture_default_str();
    }

    ModelDescriptor descriptor() const
    {
        if (!model_json.empty()) {
            auto in = open_input(model_json);
            try {
                return model_descriptor_from_json(json::parse(in));
            } catch (const json::exception& e) {
                throw ParseError(std::string("--model: ") + e.what());
            }
        }
        ModelDescriptor d;
        if (n < 1) throw ParameterError("--n: n must be >= 1");
        if (n > kMaxGenes) throw ParameterError("--n: n must be <= 64");
        if (k > n - 1) throw ParameterError("--k: k must be <= n-1");
        if (k > kMaxDegree) throw ParameterError("--k: k must be <= 39");
        const auto m = parse_epistasis_mode(mode);
        if (!m) throw ParameterError("--mode: expected adjacent or random, got '" + mode + "'");
        const auto tm = parse_table_mode(table_mode);
        if (!tm) throw ParameterError("--table-mode: expected materialized or on_the_fly, got '" + table_mode + "'");
        d.n = n;
        d.k = k;
        d.mode = *m;
        d.seed = seed;
        d.table_mode = *tm;
        return d;
    }
};

inline WeightMode weight_flag(const std::string& s)
{
    const auto w = parse_weight_mode(s);
    if (!w) throw ParameterError("--weight: expected abs, squared or clip_positive, got '" + s + "'");
    return *w;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"NK landscape correlation networks and community detection", "nkcomm"};
    app.require_subcommand(1);

    // model
    ModelFlags model_flags;
    std::string model_out, tables_json, tables_bin;
    auto* model_cmd = app.add_subcommand("model", "write a model descriptor and optional table dumps");
    model_flags.add_to(*model_cmd, true);
    model_cmd->add_option("--out", model_out, "descriptor JSON path (default stdout)");
    model_cmd->add_option("--tables-json", tables_json, "dump links and tables as JSON");
    model_cmd->add_option("--tables-bin", tables_bin, "dump tables as little-endian doubles");

    // correlate
    ModelFlags corr_flags;
    std::string corr_csv, corr_json;
    std::size_t max_n = 28;
    std::uint64_t sample = 0;
    std::uint64_t sample_seed = 0;
    auto* corr_cmd = app.add_subcommand("correlate", "correlation matrix of the trait functions");
    corr_flags.add_to(*corr_cmd, false);
    corr_cmd->add_option("--model", corr_flags.model_json, "model descriptor JSON (instead of --n/--k/...)");
    corr_cmd->add_option("--out-csv", corr_csv, "correlation CSV path (default stdout)");
    corr_cmd->add_option("--out-json", corr_json, "also write the matrix as JSON");
    corr_cmd->add_option("--max-n", max_n, "exhaustive enumeration cap")->capture_default_str();
    corr_cmd->add_option("--sample", sample, "APPROXIMATE: use this many sampled genotypes instead of enumerating");
    corr_cmd->add_option("--sample-seed", sample_seed, "seed for --sample");

    // detect
    std::string detect_in, detect_weight = "abs", detect_net, detect_clu;
    double detect_eps = kDefaultEdgeThreshold;
    std::uint64_t detect_seed = 0;
    auto* detect_cmd = app.add_subcommand("detect", "Louvain communities of a correlation CSV");
    detect_cmd->add_option("--in-csv", detect_in, "correlation CSV")->required();
    detect_cmd->add_option("--weight", detect_weight, "abs | squared | clip_positive")->capture_default_str();
    detect_cmd->add_option("--epsilon", detect_eps, "drop edges with weight <= epsilon")->capture_default_str();
    detect_cmd->add_option("--seed", detect_seed, "node order seed")->capture_default_str();
    detect_cmd->add_option("--out-net", detect_net, "Pajek network file");
    detect_cmd->add_option("--out-clu", detect_clu, "Pajek partition file");

    // sweep
    std::string sweep_config, sweep_k, sweep_modes, sweep_weight, sweep_csv, sweep_summary;
    std::size_t sweep_n = 10, sweep_reps = 20, sweep_threads = 0;
    std::uint64_t sweep_seed = 0;
    double sweep_eps = kDefaultEdgeThreshold;
    bool no_timing = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "community statistics over k, mode and replicates");
    sweep_cmd->add_option("--config", sweep_config, "JSON config; explicit flags override its fields");
    auto* o_n = sweep_cmd->add_option("--n", sweep_n, "number of genes (default 10)");
    auto* o_k = sweep_cmd->add_option("--k-values", sweep_k, "e.g. 0..9 or 0,2,4 (default 0..n-1)");
    auto* o_modes = sweep_cmd->add_option("--modes", sweep_modes, "adjacent,random (default both)");
    auto* o_reps = sweep_cmd->add_option("--replicates", sweep_reps, "replicates per cell (default 20)");
    auto* o_seed = sweep_cmd->add_option("--base-seed", sweep_seed, "base seed (default 0)");
    auto* o_weight = sweep_cmd->add_option("--weight", sweep_weight, "abs | squared | clip_positive (default abs)");
    auto* o_eps = sweep_cmd->add_option("--epsilon", sweep_eps, "edge threshold (default 1e-12)");
    sweep_cmd->add_option("--threads", sweep_threads, "concurrent cells (default: all cores, capped by NKCOMM_THREADS)");
    sweep_cmd->add_option("--out-csv", sweep_csv, "records CSV path (default stdout)");
    sweep_cmd->add_option("--out-summary", sweep_summary, "summary JSON path");
    sweep_cmd->add_flag("--no-timing", no_timing, "write wall_ms as 0 for byte-stable output");

    // plot
    std::string plot_in, plot_metric = "nc", plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "SVG chart of a sweep CSV");
    plot_cmd->add_option("--in-csv", plot_in, "sweep CSV")->required();
    plot_cmd->add_option("--metric", plot_metric, "nc | q | msc")->capture_default_str();
    plot_cmd->add_option("--out-svg", plot_out, "SVG path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*model_cmd) {
            const auto d = model_flags.descriptor();
            const auto model = d.build();
            OutputFile o(model_out, out);
            o.get() << to_json(d).dump(2) << '\n';
            o.close();
            if (!tables_json.empty()) {
                OutputFile t(tables_json, out);
                t.get() << tables_to_json(model).dump() << '\n';
                t.close();
            }
            if (!tables_bin.empty()) {
                OutputFile t(tables_bin, out, true);
                write_tables_binary(t.get(), model);
                t.close();
            }
            return kExitOk;
        }

        if (*corr_cmd) {
            if (corr_flags.model_json.empty() && (corr_cmd->count("--n") == 0 || corr_cmd->count("--k") == 0))
                throw ParameterError("correlate needs --model or both --n and --k");
            const auto d = corr_flags.descriptor();
            const auto model = d.build();
            TraitMoments moments;
            if (sample > 0) {
                err << "warning: --sample gives an approximate correlation matrix\n";
                moments = sample_moments(model, sample, sample_seed);
            } else {
                EnumerationOptions opts;
                opts.max_genes = max_n;
                opts.threads = worker_count();
                moments = enumerate_moments(model, opts);
            }
            const auto c = correlation(moments);
            OutputFile o(corr_csv, out);
            write_correlation_csv(o.get(), c);
            o.close();
            if (!corr_json.empty()) {
                OutputFile j(corr_json, out);
                j.get() << correlation_to_json(c).dump(2) << '\n';
                j.close();
            }
            return kExitOk;
        }

        if (*detect_cmd) {
            const auto weight = weight_flag(detect_weight);
            if (!(detect_eps >= 0.0)) throw ParameterError("--epsilon must be >= 0");
            auto in = open_input(detect_in);
            const auto c = read_correlation_csv(in);
            const auto graph = graph_from_correlation(c, weight, detect_eps);
            const auto partition = louvain(graph, detect_seed);
            if (!detect_net.empty()) {
                OutputFile f(detect_net, out);
                write_pajek_net(f.get(), graph);
                f.close();
            }
            if (!detect_clu.empty()) {
                OutputFile f(detect_clu, out);
                write_pajek_clu(f.get(), partition);
                f.close();
            }
            out << "nc=" << partition.nc << " q=" << sig10(partition.q) << '\n';
            return kExitOk;
        }

        if (*sweep_cmd) {
            SweepConfig cfg;
            cfg.k_values.clear();
            if (!sweep_config.empty()) {
                auto in = open_input(sweep_config);
                try {
                    const auto j = json::parse(in);
                    cfg.n = j.value("n", cfg.n);
                    if (j.contains("k_values")) cfg.k_values = j.at("k_values").get<std::vector<std::size_t>>();
                    if (j.contains("modes")) {
                        cfg.modes.clear();
                        for (const auto& m : j.at("modes")) {
                            const auto mode = parse_epistasis_mode(m.get<std::string>());
                            if (!mode) throw ParseError("--config: unknown mode '" + m.get<std::string>() + "'");
                            cfg.modes.push_back(*mode);
                        }
                    }
                    cfg.replicates = j.value("replicates", cfg.replicates);
                    cfg.base_seed = j.value("base_seed", cfg.base_seed);
                    if (j.contains("weight_mode")) cfg.weight_mode = weight_flag(j.at("weight_mode").get<std::string>());
                    cfg.threshold = j.value("epsilon", cfg.threshold);
                } catch (const json::exception& e) {
                    throw ParseError(std::string("--config: ") + e.what());
                }
            }
            if (o_n->count()) cfg.n = sweep_n;
            if (o_k->count()) cfg.k_values = parse_k_list(sweep_k);
            if (o_modes->count()) cfg.modes = parse_mode_list(sweep_modes);
            if (o_reps->count()) cfg.replicates = sweep_reps;
            if (o_seed->count()) cfg.base_seed = sweep_seed;
            if (o_weight->count()) cfg.weight_mode = weight_flag(sweep_weight);
            if (o_eps->count()) cfg.threshold = sweep_eps;
            if (cfg.n < 2) throw ParameterError("--n: n must be >= 2");
            if (cfg.k_values.empty()) cfg.k_values = SweepConfig::all_k(cfg.n);
            cfg.threads = sweep_threads == 0 ? worker_count() : std::min(sweep_threads, worker_count());
            cfg.validate();

            const auto result = run_sweep(cfg);
            OutputFile o(sweep_csv, out);
            write_sweep_csv(o.get(), result.records, !no_timing);
            o.close();
            if (!sweep_summary.empty()) {
                OutputFile s(sweep_summary, out);
                s.get() << summary_to_json(result.summary).dump(2) << '\n';
                s.close();
            }
            int code = kExitOk;
            for (const auto& f : result.failures) {
                err << "cell failed: mode=" << to_string(f.mode) << " k=" << f.k << " replicate=" << f.replicate << ": "
                    << f.message << '\n';
                code = std::max(code, f.exit_code);
            }
            return code;
        }

        if (*plot_cmd) {
            const auto metric = parse_metric(plot_metric);
            if (!metric) throw ParameterError("--metric: expected nc, q or msc, got '" + plot_metric + "'");
            auto in = open_input(plot_in);
            const auto records = read_sweep_csv(in);
            OutputFile o(plot_out, out);
            write_sweep_svg(o.get(), records, *metric);
            o.close();
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}

} // namespace nkcomm::cli
