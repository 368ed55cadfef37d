// Command-line harness: config-driven experiments, sweeps, subset-sampling
// curves, best-fixed-strategy ablation, and synthetic data generation.

#include "dystrat/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

using namespace dystrat;

std::string default_out_root() {
    if (const char* env = std::getenv("DYSTRAT_OUT")) return env;
    return "out";
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    bool force = false;
    int seed = -1;
    int repeats = -1;
    std::string dataset;
    int horizon = -1;
    double train_frac = -1.0;
    std::string csv_path, csv_column;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (ini-style)");
    cmd->add_option("--out", flags.out_dir, "output directory (default $DYSTRAT_OUT/<verb>-<hash>)");
    cmd->add_flag("--force", flags.force, "overwrite a non-empty output directory");
    cmd->add_option("--seed", flags.seed, "base seed override");
    cmd->add_option("--repeats", flags.repeats, "repeat count override");
    cmd->add_option("--dataset", flags.dataset, "dataset override: mackey-glass | lorenz | sine | csv");
    cmd->add_option("--horizon", flags.horizon, "forecast horizon override");
    cmd->add_option("--train-frac", flags.train_frac, "training fraction override");
    cmd->add_option("--csv-path", flags.csv_path, "csv file for --dataset csv");
    cmd->add_option("--csv-column", flags.csv_column, "csv column name or index");
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = load_experiment_config(flags.config_path);
    if (!flags.dataset.empty()) cfg.dataset.kind = dataset_kind_from_string(flags.dataset);
    if (!flags.csv_path.empty()) {
        cfg.dataset.kind = DatasetKind::csv;
        cfg.dataset.csv_path = flags.csv_path;
    }
    if (!flags.csv_column.empty()) cfg.dataset.csv_column = flags.csv_column;
    if (flags.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.repeats >= 1) cfg.repeats = flags.repeats;
    if (flags.horizon >= 1) cfg.horizon = flags.horizon;
    if (flags.train_frac > 0.0) cfg.train_fraction = flags.train_frac;
    return cfg;
}

std::string resolve_out(const CommonFlags& flags, const std::string& verb, const ExperimentConfig& cfg) {
    if (!flags.out_dir.empty()) return flags.out_dir;
    return default_out_root() + "/" + verb + "-" + config_hash_hex(cfg);
}

std::string display_relative(double v) {
    // tables cap large relative errors at ">=10"; raw values stay in the files
    if (!std::isfinite(v)) return "n/a";
    if (v >= 10.0) return ">=10";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void print_run_summary(const RunResult& run) {
    std::printf("dataset=%s H=%d w=%d train_frac=%.2f repeats=%zu/%d\n", to_string(run.config.dataset.kind),
                run.config.horizon, run.config.window(), run.config.train_fraction, run.repeats.size(),
                run.config.repeats);
    std::printf("%-10s %12s %12s %10s %10s\n", "column", "rel_mse", "std", "top1", "mean_mse");
    for (const auto& col : run.aggregate)
        std::printf("%-10s %12s %12.2f %10.3f %10.3e\n", col.name.c_str(), display_relative(col.mean_relative).c_str(),
                    col.std_relative, col.mean_top1, col.mean_loss.at(run.config.metrics.front()));
    for (const auto& f : run.failures) std::printf("FAILED %s\n", f.c_str());
}

int cmd_run(const CommonFlags& flags) {
    const auto cfg = resolve_config(flags);
    auto run = run_experiment(cfg);
    print_run_summary(run);
    const auto dir = resolve_out(flags, "run", cfg);
    const auto files = emit(run, dir, flags.force);
    if (cfg.ablate_gstar) {
        const auto ab = ablate_gstar(run);
        std::printf("ablation (%s): g* %.3f+-%.3f  ablated %.3f+-%.3f  full %.3f+-%.3f\n", ab.selector_name.c_str(),
                    ab.mean_gstar, ab.std_gstar, ab.mean_ablated, ab.std_ablated, ab.mean_full, ab.std_full);
        Json j{{"selector", ab.selector_name},
               {"mean_gstar", ab.mean_gstar},
               {"std_gstar", ab.std_gstar},
               {"mean_ablated", ab.mean_ablated},
               {"std_ablated", ab.std_ablated},
               {"mean_full", ab.mean_full},
               {"std_full", ab.std_full}};
        serialize::write_json_file(j, dir + "/ablation_" + config_hash_hex(cfg) + ".json");
    }
    std::printf("wrote %zu files under %s\n", files.size(), dir.c_str());
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& horizons, const std::string& train_fracs) {
    const auto base = resolve_config(flags);
    std::vector<ExperimentConfig> grid;
    std::vector<int> hs;
    std::vector<double> fracs;
    for (const auto& h : detail::split_list(horizons)) hs.push_back(detail::to_int(h, "--horizons"));
    for (const auto& f : detail::split_list(train_fracs)) fracs.push_back(detail::to_double(f, "--train-fracs"));
    if (hs.empty()) hs.push_back(base.horizon);
    if (fracs.empty()) fracs.push_back(base.train_fraction);
    for (int h : hs)
        for (double f : fracs) {
            ExperimentConfig cfg = base;
            cfg.horizon = h;
            cfg.train_fraction = f;
            grid.push_back(cfg);
        }
    const auto result = sweep(grid);
    const auto dir = resolve_out(flags, "sweep", base);
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_empty(fs::path(dir)) && !flags.force)
        throw IoError(dir + " is not empty; pass --force to overwrite");
    fs::create_directories(dir);
    for (const auto& run : result.runs) {
        const std::string sub = dir + "/H" + std::to_string(run.config.horizon) + "_l" +
                                std::to_string(static_cast<int>(run.config.train_fraction * 100));
        emit(run, sub, true);
        print_run_summary(run);
    }
    {
        std::ofstream out(dir + "/rank_table.csv", std::ios::binary);
        out << "column,mean_task_rank\n";
        for (std::size_t c = 0; c < result.rank_columns.size(); ++c)
            out << result.rank_columns[c] << ',' << detail::fmt_double(result.mean_ranks[c]) << '\n';
    }
    std::printf("cross-task ranks over %zu runs:\n", result.runs.size());
    for (std::size_t c = 0; c < result.rank_columns.size(); ++c)
        std::printf("%-10s %6.2f\n", result.rank_columns[c].c_str(), result.mean_ranks[c]);
    for (const auto& f : result.failures) std::printf("FAILED %s\n", f.c_str());
    return result.runs.empty() ? 1 : 0;
}

int cmd_subset_curve(const CommonFlags& flags, const std::string& sizes_arg, int samples, const std::string& pool) {
    auto cfg = resolve_config(flags);
    if (!sizes_arg.empty()) {
        cfg.subset.sizes.clear();
        for (const auto& s : detail::split_list(sizes_arg)) cfg.subset.sizes.push_back(detail::to_int(s, "--sizes"));
    }
    if (samples >= 1) cfg.subset.samples_per_size = samples;
    if (!pool.empty()) cfg.subset.pool = pool;
    if (cfg.subset.sizes.empty()) throw InvalidParameterError("subset-curve: pass --sizes or a [subset_curve] section");

    const auto result = subset_curve(cfg);
    const auto dir = resolve_out(flags, "subset", cfg);
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_empty(fs::path(dir)) && !flags.force)
        throw IoError(dir + " is not empty; pass --force to overwrite");
    fs::create_directories(dir);
    {
        std::ofstream out(dir + "/subset_curve.csv", std::ios::binary);
        out << "size,median_relative,q25,q75\n";
        for (const auto& s : result.per_size)
            out << s.size << ',' << detail::fmt_double(s.median) << ',' << detail::fmt_double(s.q25) << ','
                << detail::fmt_double(s.q75) << '\n';
        Json raw{{"pool", result.pool}, {"pool_names", result.pool_names}};
        for (const auto& s : result.per_size) raw["samples"][std::to_string(s.size)] = s.relative_errors;
        serialize::write_json_file(raw, dir + "/subset_curve.json");
    }
    std::printf("%-6s %10s %10s %10s   (pool=%s, %d samples/size)\n", "size", "median", "q25", "q75",
                result.pool.c_str(), cfg.subset.samples_per_size);
    for (const auto& s : result.per_size)
        std::printf("%-6d %10.3f %10.3f %10.3f\n", s.size, s.median, s.q25, s.q75);
    return 0;
}

int cmd_ablate(const CommonFlags& flags) {
    const auto cfg = resolve_config(flags);
    const auto run = run_experiment(cfg);
    const auto ab = ablate_gstar(run);
    std::printf("%-8s %-8s %10s %10s %10s\n", "seed", "g*", "rel_g*", "ablated", "full");
    for (const auto& r : ab.repeats)
        std::printf("%-8llu %-8s %10.3f %10.3f %10.3f\n", static_cast<unsigned long long>(r.seed),
                    r.gstar_name.c_str(), r.gstar_relative, r.ablated_relative, r.full_relative);
    std::printf("mean     %-8s %6.3f+-%.3f %5.3f+-%.3f %5.3f+-%.3f\n", ab.selector_name.c_str(), ab.mean_gstar,
                ab.std_gstar, ab.mean_ablated, ab.std_ablated, ab.mean_full, ab.std_full);
    const auto dir = resolve_out(flags, "ablate", cfg);
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_empty(fs::path(dir)) && !flags.force)
        throw IoError(dir + " is not empty; pass --force to overwrite");
    fs::create_directories(dir);
    Json per = Json::array();
    for (const auto& r : ab.repeats)
        per.push_back(Json{{"seed", r.seed},
                           {"gstar", r.gstar_name},
                           {"gstar_relative", r.gstar_relative},
                           {"ablated_relative", r.ablated_relative},
                           {"full_relative", r.full_relative}});
    serialize::write_json_file(Json{{"selector", ab.selector_name},
                                    {"repeats", std::move(per)},
                                    {"mean_gstar", ab.mean_gstar},
                                    {"std_gstar", ab.std_gstar},
                                    {"mean_ablated", ab.mean_ablated},
                                    {"std_ablated", ab.std_ablated},
                                    {"mean_full", ab.mean_full},
                                    {"std_full", ab.std_full}},
                               dir + "/ablation.json");
    std::printf("wrote %s/ablation.json\n", dir.c_str());
    return 0;
}

int cmd_gen_data(const std::string& dataset, int n, int seed, const std::string& out_path,
                 const std::vector<std::string>& params, bool force) {
    DatasetConfig d;
    d.kind = dataset_kind_from_string(dataset);
    d.n = n;
    for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidParameterError("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const double value = detail::to_double(kv.substr(eq + 1), key);
        if (d.kind == DatasetKind::mackey_glass) {
            if (key == "tau") d.mg.tau = value;
            else if (key == "beta") d.mg.beta = value;
            else if (key == "gamma") d.mg.gamma = value;
            else if (key == "exponent") d.mg.exponent = value;
            else if (key == "dt") d.mg.dt = value;
            else if (key == "history_value") d.mg.history_value = value;
            else if (key == "burn_in") d.mg.burn_in = value;
            else throw InvalidParameterError("unknown mackey-glass param '" + key + "'");
        } else if (d.kind == DatasetKind::lorenz) {
            if (key == "sigma") d.lorenz.sigma = value;
            else if (key == "rho") d.lorenz.rho = value;
            else if (key == "beta") d.lorenz.beta = value;
            else if (key == "dt") d.lorenz.dt = value;
            else if (key == "sample_every") d.lorenz.sample_every = static_cast<int>(value);
            else if (key == "burn_in") d.lorenz.burn_in = value;
            else throw InvalidParameterError("unknown lorenz param '" + key + "'");
        } else if (d.kind == DatasetKind::noisy_sine) {
            if (key == "period") d.sine_period = value;
            else if (key == "noise_fraction") d.sine_noise = value;
            else throw InvalidParameterError("unknown sine param '" + key + "'");
        } else {
            throw InvalidParameterError("gen-data supports synthetic datasets only");
        }
    }
    if (std::filesystem::exists(out_path) && !force) throw IoError(out_path + " exists; pass --force to overwrite");
    const auto ts = d.make(static_cast<std::uint64_t>(seed));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << "value\n";
    for (double v : ts.values) out << detail::fmt_double(v) << '\n';
    std::printf("wrote %d values to %s\n", ts.length(), out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-step forecasting strategy lab"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, subset_flags, ablate_flags;
    auto* run_cmd = app.add_subcommand("run", "run one config-driven experiment");
    add_common(run_cmd, run_flags);

    auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of configs and rank columns across tasks");
    add_common(sweep_cmd, sweep_flags);
    std::string horizons, train_fracs;
    sweep_cmd->add_option("--horizons", horizons, "comma list of horizons");
    sweep_cmd->add_option("--train-fracs", train_fracs, "comma list of training fractions");

    auto* subset_cmd = app.add_subcommand("subset-curve", "sample strategy subsets and trace relative error");
    add_common(subset_cmd, subset_flags);
    std::string sizes, pool;
    int samples = -1;
    subset_cmd->add_option("--sizes", sizes, "comma list of subset sizes");
    subset_cmd->add_option("--samples", samples, "samples per size");
    subset_cmd->add_option("--pool", pool, "candidate pool: all | no-recursive | direct-only");

    auto* ablate_cmd = app.add_subcommand("ablate", "remove g* from the pool and compare");
    add_common(ablate_cmd, ablate_flags);

    auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic series as CSV");
    std::string gen_dataset = "mackey-glass", gen_out = "series.csv";
    int gen_n = 10000, gen_seed = 1;
    bool gen_force = false;
    std::vector<std::string> gen_params;
    gen_cmd->add_option("--dataset", gen_dataset, "mackey-glass | lorenz | sine");
    gen_cmd->add_option("--n", gen_n, "sample count");
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    gen_cmd->add_option("--out", gen_out, "output csv path");
    gen_cmd->add_option("--param", gen_params, "generator parameter key=value (repeatable)");
    gen_cmd->add_flag("--force", gen_force, "overwrite an existing file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(run_flags);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, horizons, train_fracs);
        if (subset_cmd->parsed()) return cmd_subset_curve(subset_flags, sizes, samples, pool);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_flags);
        if (gen_cmd->parsed()) return cmd_gen_data(gen_dataset, gen_n, gen_seed, gen_out, gen_params, gen_force);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
