#pragma once

#include "dystrat/config.hpp"
#include "dystrat/eval.hpp"
#include "dystrat/selector.hpp"
#include "dystrat/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dystrat {

struct PhaseTimings {
    double data_s = 0.0;
    double strategies_s = 0.0;
    double labels_s = 0.0;
    double selectors_s = 0.0;
    double eval_s = 0.0;
};

inline std::string selector_column_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::linear: return "DSlinear";
        case ClassifierKind::mlp: return "DSMLP";
        case ClassifierKind::knn: return "DSKNN";
        case ClassifierKind::ts_forest: return "DSTSF";
    }
    return "DS?";
}

/// Everything one seeded repeat produced. Strategy artifacts are kept so that
/// ablation and subset sampling can retrain selectors without retraining models.
struct RepeatOutcome {
    std::uint64_t seed = 0;
    EvaluationReport report;
    PhaseTimings timings;
    StrategySet set;
    std::vector<std::pair<std::string, TrainedSelector>> selectors;
    WindowedDataset train;  // forecaster training split
    Matrix selector_inputs;
    StrategyLabels train_labels;
    LossMatrix train_losses;  // fixed strategies on the selector split, label metric
    WindowedDataset eval;
    LossMatrix eval_losses;  // all columns, primary metric
    std::vector<std::vector<int>> eval_selections;  // per selector column
};

namespace detail {

inline StrategyLabels labels_from_loss_columns(const Matrix& losses, const std::vector<int>& columns, Metric metric) {
    StrategyLabels out;
    out.loss_used = metric;
    out.labels.resize(static_cast<std::size_t>(losses.rows()));
    for (Eigen::Index i = 0; i < losses.rows(); ++i) {
        int best = 0;
        for (std::size_t c = 1; c < columns.size(); ++c)
            if (losses(i, columns[c]) < losses(i, columns[static_cast<std::size_t>(best)])) best = static_cast<int>(c);
        out.labels[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

struct PhaseClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start).count();
        start = now;
        return s;
    }
};

inline std::vector<StrategySpec> select_specs(const ExperimentConfig& cfg) {
    auto specs = enumerate_strategies(cfg.horizon);
    if (cfg.strategy_filter.empty()) return specs;
    std::vector<StrategySpec> filtered;
    for (const auto& s : specs)
        if (std::find(cfg.strategy_filter.begin(), cfg.strategy_filter.end(), s.display_name) !=
            cfg.strategy_filter.end())
            filtered.push_back(s);
    if (filtered.size() != cfg.strategy_filter.size())
        throw InvalidParameterError("strategy_filter names a strategy that H=" + std::to_string(cfg.horizon) +
                                    " does not enumerate");
    return filtered;
}

}  // namespace detail

/// One seeded end-to-end pass: data, strategies, labels, selectors, evaluation.
inline RepeatOutcome run_repeat(const ExperimentConfig& cfg, std::uint64_t seed) {
    RepeatOutcome out;
    out.seed = seed;
    detail::PhaseClock clock;
    std::string phase = "data";
    try {
        TimeSeries series = cfg.dataset.make(derive_seed(seed, "data"));
        if (cfg.normalize_train_range_only) {
            // min/max fitted on the pre-eval share of raw values only
            const auto cut = static_cast<std::size_t>((1.0 - cfg.eval_fraction) * series.values.size());
            TimeSeries head{series.name, {series.values.begin(), series.values.begin() + static_cast<std::ptrdiff_t>(cut)},
                            series.source};
            const auto [lo, hi] =
                std::minmax_element(head.values.begin(), head.values.end());
            if (*lo == *hi) throw DegenerateSeriesError(series.name + ": constant training range");
            for (double& v : series.values) v = (v - *lo) / (*hi - *lo);
        } else {
            series = normalize(series);
        }
        const auto windows = make_windows(series, cfg.window(), cfg.horizon);
        auto [train, eval] = split(windows, {cfg.train_fraction, cfg.eval_fraction});
        out.eval = std::move(eval);

        // optional held-out selector split: forecasters use the head, the selector the tail
        WindowedDataset selector_data;
        if (cfg.selector_holdout_fraction > 0.0) {
            const int n = train.size();
            const int n_sel = std::max(1, static_cast<int>(cfg.selector_holdout_fraction * n));
            if (n_sel >= n) throw InvalidSplitError("selector holdout leaves no forecaster data");
            selector_data = detail::take_rows(train, n - n_sel, n_sel);
            out.train = detail::take_rows(train, 0, n - n_sel);
        } else {
            out.train = std::move(train);
        }
        const WindowedDataset& sel_data = cfg.selector_holdout_fraction > 0.0 ? selector_data : out.train;
        out.timings.data_s = clock.lap();

        phase = "strategies";
        MlpConfig mlp_cfg = cfg.mlp;
        mlp_cfg.seed = derive_seed(seed, "mlp");
        out.set = train_all(detail::select_specs(cfg), out.train, mlp_cfg);
        out.timings.strategies_s = clock.lap();

        phase = "labels";
        out.train_losses = loss_matrix(out.set, {}, sel_data, cfg.label_metric);
        std::vector<int> all_columns(static_cast<std::size_t>(out.set.size()));
        for (int i = 0; i < out.set.size(); ++i) all_columns[static_cast<std::size_t>(i)] = i;
        out.train_labels = detail::labels_from_loss_columns(out.train_losses.losses, all_columns, cfg.label_metric);
        out.selector_inputs = sel_data.inputs;
        out.timings.labels_s = clock.lap();

        phase = "selectors";
        for (const auto& base : cfg.classifiers) {
            ClassifierConfig c = base;
            c.seed = derive_seed(seed, std::string("selector-") + to_string(c.kind));
            out.selectors.emplace_back(selector_column_name(c.kind),
                                       train_selector(c, out.selector_inputs, out.train_labels, out.set.size()));
        }
        out.timings.selectors_s = clock.lap();

        phase = "evaluation";
        ForecastTable table = forecast_table(out.set, {}, out.eval);
        for (const auto& [name, sel] : out.selectors) {
            std::vector<int> picks(static_cast<std::size_t>(out.eval.size()));
            Matrix gathered(out.eval.size(), cfg.horizon);
            for (int i = 0; i < out.eval.size(); ++i) {
                const int s = sel.select(out.eval.inputs.row(i).transpose());
                picks[static_cast<std::size_t>(i)] = s;
                gathered.row(i) = table.forecasts[static_cast<std::size_t>(s)].row(i);
            }
            table.names.push_back(name);
            table.forecasts.push_back(std::move(gathered));
            table.selections.push_back(picks);
            out.eval_selections.push_back(std::move(picks));
        }
        out.report = build_report(table, out.eval, cfg.metrics);
        out.eval_losses = loss_matrix(table, out.eval, cfg.metrics.front());
        out.timings.eval_s = clock.lap();
    } catch (const Error& e) {
        throw Error("repeat seed " + std::to_string(seed) + ": phase '" + phase + "': " + e.what());
    }
    return out;
}

struct ColumnAggregate {
    std::string name;
    bool is_fixed = true;
    double mean_relative = 0.0;
    double std_relative = 0.0;
    std::map<Metric, double> mean_loss;
    std::map<Metric, double> std_loss;
    double mean_top1 = 0.0;
    double std_top1 = 0.0;
    double mean_task_rank = 0.0;
    double mean_instance_rank = 0.0;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<RepeatOutcome> repeats;
    std::vector<std::string> failures;
    std::vector<ColumnAggregate> aggregate;

    const ColumnAggregate& aggregate_by_name(const std::string& name) const {
        for (const auto& c : aggregate)
            if (c.name == name) return c;
        throw InvalidInputError("no aggregated column '" + name + "'");
    }
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

inline void aggregate_run(RunResult& run) {
    if (run.repeats.empty()) throw Error("no successful repeats to aggregate");
    const auto& first = run.repeats.front().report;
    run.aggregate.clear();
    for (std::size_t c = 0; c < first.columns.size(); ++c) {
        ColumnAggregate agg;
        agg.name = first.columns[c].name;
        agg.is_fixed = first.columns[c].is_fixed;
        std::vector<double> rel, top1, task, inst;
        for (const auto& rep : run.repeats) {
            rel.push_back(rep.report.columns[c].relative_mse);
            top1.push_back(rep.report.columns[c].top1_share);
            task.push_back(rep.report.columns[c].task_rank);
            inst.push_back(rep.report.columns[c].mean_instance_rank);
        }
        std::tie(agg.mean_relative, agg.std_relative) = mean_std(rel);
        std::tie(agg.mean_top1, agg.std_top1) = mean_std(top1);
        agg.mean_task_rank = mean_std(task).first;
        agg.mean_instance_rank = mean_std(inst).first;
        for (const auto& [metric, unused] : first.columns[c].mean_loss) {
            (void)unused;
            std::vector<double> losses;
            for (const auto& rep : run.repeats) losses.push_back(rep.report.columns[c].mean_loss.at(metric));
            std::tie(agg.mean_loss[metric], agg.std_loss[metric]) = mean_std(losses);
        }
        run.aggregate.push_back(std::move(agg));
    }
}

}  // namespace detail

/// Runs every seeded repeat; per-repeat failures are recorded and skipped as long
/// as at least one repeat succeeds.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw InvalidParameterError("run_experiment: repeats must be >= 1");
    detail::select_specs(cfg);  // config errors fail fast, before any repeat runs
    RunResult run;
    run.config = cfg;
    for (int r = 0; r < cfg.repeats; ++r) {
        try {
            run.repeats.push_back(run_repeat(cfg, cfg.base_seed + static_cast<std::uint64_t>(r)));
        } catch (const Error& e) {
            run.failures.emplace_back(e.what());
        }
    }
    if (run.repeats.empty())
        throw Error("run_experiment: every repeat failed; first error: " +
                    (run.failures.empty() ? std::string("?") : run.failures.front()));
    detail::aggregate_run(run);
    return run;
}

// ---------------------------------------------------------------------------
// Best-fixed-strategy ablation
// ---------------------------------------------------------------------------

struct AblationRepeat {
    std::uint64_t seed = 0;
    std::string gstar_name;
    double gstar_relative = 0.0;
    double ablated_relative = 0.0;
    double full_relative = 0.0;
};

struct AblationResult {
    std::string selector_name;
    std::vector<AblationRepeat> repeats;
    double mean_gstar = 0.0, std_gstar = 0.0;
    double mean_ablated = 0.0, std_ablated = 0.0;
    double mean_full = 0.0, std_full = 0.0;
};

namespace detail {

inline const ClassifierConfig& ablation_classifier(const ExperimentConfig& cfg) {
    for (const auto& c : cfg.classifiers)
        if (c.kind == ClassifierKind::ts_forest) return c;
    if (cfg.classifiers.empty()) throw InvalidParameterError("no classifiers configured");
    return cfg.classifiers.front();
}

/// Retrains a selector over a strategy subset (models reused) and returns the
/// mean eval loss of the resulting dispatcher, using cached loss matrices.
inline double subset_selector_eval_loss(const RepeatOutcome& outcome, const std::vector<int>& subset,
                                        ClassifierConfig selector_cfg) {
    const auto labels = labels_from_loss_columns(outcome.train_losses.losses, subset, outcome.train_losses.metric);
    const auto sel = train_selector(selector_cfg, outcome.selector_inputs, labels, static_cast<int>(subset.size()));
    double total = 0.0;
    for (int i = 0; i < outcome.eval.size(); ++i) {
        const int pick = subset[static_cast<std::size_t>(sel.select(outcome.eval.inputs.row(i).transpose()))];
        total += outcome.eval_losses.losses(i, pick);
    }
    return total / static_cast<double>(outcome.eval.size());
}

}  // namespace detail

/// Removes each repeat's best fixed strategy from the candidate pool, retrains the
/// selector on the reduced pool (strategies reused), and reports g*/ablated/full
/// relative errors against the full-pool oracle.
inline AblationResult ablate_gstar(const RunResult& run) {
    const auto& cfg = run.config;
    const auto& sel_cfg = detail::ablation_classifier(cfg);
    const std::string column = selector_column_name(sel_cfg.kind);
    if (run.repeats.empty()) throw InvalidParameterError("ablate_gstar: no successful repeats");
    if (run.repeats.front().set.size() < 2) throw InvalidParameterError("ablate_gstar: need at least 2 strategies");

    AblationResult result;
    result.selector_name = column;
    for (const auto& outcome : run.repeats) {
        AblationRepeat rep;
        rep.seed = outcome.seed;
        int gstar = outcome.report.gstar_index;
        if (cfg.gstar_split == "train") {
            std::vector<int> all(static_cast<std::size_t>(outcome.set.size()));
            for (int i = 0; i < outcome.set.size(); ++i) all[static_cast<std::size_t>(i)] = i;
            gstar = best_fixed(outcome.train_losses, all);
        }
        rep.gstar_name = outcome.set.strategies[static_cast<std::size_t>(gstar)].spec.display_name;
        rep.gstar_relative = outcome.report.columns[static_cast<std::size_t>(gstar)].relative_mse;
        rep.full_relative = outcome.report.by_name(column).relative_mse;

        std::vector<int> remaining;
        for (int c = 0; c < outcome.set.size(); ++c)
            if (c != gstar) remaining.push_back(c);
        ClassifierConfig ablated_cfg = sel_cfg;
        ablated_cfg.seed = derive_seed(outcome.seed, std::string("ablated-selector-") + to_string(sel_cfg.kind));
        const double ablated_loss = detail::subset_selector_eval_loss(outcome, remaining, ablated_cfg);
        rep.ablated_relative = ablated_loss / outcome.report.oracle_mse;
        result.repeats.push_back(std::move(rep));
    }
    std::vector<double> g, a, f;
    for (const auto& r : result.repeats) {
        g.push_back(r.gstar_relative);
        a.push_back(r.ablated_relative);
        f.push_back(r.full_relative);
    }
    std::tie(result.mean_gstar, result.std_gstar) = detail::mean_std(g);
    std::tie(result.mean_ablated, result.std_ablated) = detail::mean_std(a);
    std::tie(result.mean_full, result.std_full) = detail::mean_std(f);
    return result;
}

inline AblationResult ablate_gstar(const ExperimentConfig& cfg) { return ablate_gstar(run_experiment(cfg)); }

// ---------------------------------------------------------------------------
// Strategy subset-sampling curve
// ---------------------------------------------------------------------------

struct SubsetSizeStats {
    int size = 0;
    std::vector<double> relative_errors;  // one per sampled subset
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

struct SubsetCurveResult {
    std::string pool;
    std::vector<std::string> pool_names;
    std::vector<SubsetSizeStats> per_size;
};

namespace detail {

inline double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline std::vector<int> strategy_pool(const StrategySet& set, const std::string& pool) {
    std::vector<int> out;
    for (int c = 0; c < set.size(); ++c) {
        const StrategyKind kind = set.strategies[static_cast<std::size_t>(c)].spec.kind;
        const bool keep = pool == "all" ||
                          (pool == "no-recursive" && kind != StrategyKind::recmo && kind != StrategyKind::rectify) ||
                          (pool == "direct-only" &&
                           (kind == StrategyKind::mo || kind == StrategyKind::dirmo || kind == StrategyKind::dirrec));
        if (keep) out.push_back(c);
    }
    if (out.empty()) throw InvalidParameterError("subset pool '" + pool + "' excludes every strategy");
    return out;
}

}  // namespace detail

/// Fig.-4-style experiment: draw seeded uniform k-subsets of the candidate pool,
/// retrain the selector per subset (strategies reused), and summarize DyStrat's
/// relative error (against the full-pool oracle) by median and interquartile range.
inline SubsetCurveResult subset_curve(const ExperimentConfig& cfg, const std::vector<int>& sizes,
                                      int samples_per_size) {
    if (sizes.empty()) throw InvalidParameterError("subset_curve: no sizes requested");
    if (samples_per_size < 1) throw InvalidParameterError("subset_curve: samples_per_size must be >= 1");
    const auto outcome = run_repeat(cfg, cfg.base_seed);
    const auto& sel_cfg = detail::ablation_classifier(cfg);
    const auto pool = detail::strategy_pool(outcome.set, cfg.subset.pool);

    SubsetCurveResult result;
    result.pool = cfg.subset.pool;
    for (int c : pool) result.pool_names.push_back(outcome.set.strategies[static_cast<std::size_t>(c)].spec.display_name);

    for (int k : sizes) {
        if (k < 1 || k > static_cast<int>(pool.size()))
            throw InvalidParameterError("subset_curve: size " + std::to_string(k) + " outside [1, " +
                                        std::to_string(pool.size()) + "]");
        SubsetSizeStats stats;
        stats.size = k;
        for (int s = 0; s < samples_per_size; ++s) {
            Rng rng(derive_seed(cfg.base_seed, "subset-sample",
                                static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(s)));
            std::vector<int> candidates = pool;
            rng.shuffle(candidates);
            std::vector<int> subset(candidates.begin(), candidates.begin() + k);
            std::sort(subset.begin(), subset.end());
            ClassifierConfig c = sel_cfg;
            c.seed = derive_seed(cfg.base_seed, "subset-selector",
                                 static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(s));
            const double loss = detail::subset_selector_eval_loss(outcome, subset, c);
            stats.relative_errors.push_back(loss / outcome.report.oracle_mse);
        }
        std::vector<double> sorted = stats.relative_errors;
        std::sort(sorted.begin(), sorted.end());
        stats.median = detail::quantile(sorted, 0.5);
        stats.q25 = detail::quantile(sorted, 0.25);
        stats.q75 = detail::quantile(sorted, 0.75);
        result.per_size.push_back(std::move(stats));
    }
    return result;
}

inline SubsetCurveResult subset_curve(const ExperimentConfig& cfg) {
    return subset_curve(cfg, cfg.subset.sizes, cfg.subset.samples_per_size);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepResult {
    std::vector<RunResult> runs;
    std::vector<std::string> failures;
    std::vector<std::string> rank_columns;  // columns present in every run
    std::vector<double> mean_ranks;
};

/// Runs a grid of configs and dense-ranks the columns common to all of them by
/// per-task mean primary loss.
inline SweepResult sweep(const std::vector<ExperimentConfig>& grid) {
    if (grid.empty()) throw InvalidParameterError("sweep: empty grid");
    SweepResult result;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        try {
            result.runs.push_back(run_experiment(grid[g]));
        } catch (const Error& e) {
            result.failures.push_back("grid[" + std::to_string(g) + "]: " + e.what());
        }
    }
    if (result.runs.empty()) return result;

    // intersection of column names, in the first run's order
    for (const auto& col : result.runs.front().aggregate) {
        bool everywhere = true;
        for (const auto& run : result.runs) {
            bool found = false;
            for (const auto& other : run.aggregate)
                if (other.name == col.name) found = true;
            everywhere = everywhere && found;
        }
        if (everywhere) result.rank_columns.push_back(col.name);
    }
    std::vector<std::vector<double>> per_task;
    const Metric primary = grid.front().metrics.front();
    for (const auto& run : result.runs) {
        std::vector<double> means;
        for (const auto& name : result.rank_columns) means.push_back(run.aggregate_by_name(name).mean_loss.at(primary));
        per_task.push_back(std::move(means));
    }
    result.mean_ranks = task_rank(per_task);
    return result;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_report_csv(const EvaluationReport& report, const std::vector<Metric>& metrics,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "column,is_fixed";
    for (Metric m : metrics) out << ",mean_" << to_string(m);
    out << ",relative_mse,task_rank,mean_instance_rank,top1_share\n";
    for (const auto& col : report.columns) {
        out << col.name << ',' << (col.is_fixed ? 1 : 0);
        for (Metric m : metrics) out << ',' << fmt_double(col.mean_loss.at(m));
        out << ',' << fmt_double(col.relative_mse) << ',' << fmt_double(col.task_rank) << ','
            << fmt_double(col.mean_instance_rank) << ',' << fmt_double(col.top1_share) << '\n';
    }
}

inline void write_aggregate_csv(const RunResult& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const auto& metrics = run.config.metrics;
    out << "column,is_fixed,mean_relative_mse,std_relative_mse";
    for (Metric m : metrics) out << ",mean_" << to_string(m) << ",std_" << to_string(m);
    out << ",mean_top1,std_top1,mean_task_rank,mean_instance_rank\n";
    for (const auto& col : run.aggregate) {
        out << col.name << ',' << (col.is_fixed ? 1 : 0) << ',' << fmt_double(col.mean_relative) << ','
            << fmt_double(col.std_relative);
        for (Metric m : metrics) out << ',' << fmt_double(col.mean_loss.at(m)) << ',' << fmt_double(col.std_loss.at(m));
        out << ',' << fmt_double(col.mean_top1) << ',' << fmt_double(col.std_top1) << ','
            << fmt_double(col.mean_task_rank) << ',' << fmt_double(col.mean_instance_rank) << '\n';
    }
}

inline Json sidecar_json(const RunResult& run) {
    Json per_repeat = Json::array();
    for (const auto& rep : run.repeats) {
        Json cols = Json::array();
        for (const auto& col : rep.report.columns) {
            Json losses;
            for (const auto& [m, v] : col.mean_loss) losses[to_string(m)] = v;
            cols.push_back(Json{{"name", col.name},
                                {"is_fixed", col.is_fixed},
                                {"relative_mse", col.relative_mse},
                                {"mean_loss", std::move(losses)},
                                {"task_rank", col.task_rank},
                                {"mean_instance_rank", col.mean_instance_rank},
                                {"top1_share", col.top1_share}});
        }
        per_repeat.push_back(
            Json{{"seed", rep.seed},
                 {"oracle_mse", rep.report.oracle_mse},
                 {"gstar", rep.report.columns[static_cast<std::size_t>(rep.report.gstar_index)].name},
                 {"degenerate", rep.report.degenerate},
                 {"instances", rep.report.instance_count},
                 {"columns", std::move(cols)},
                 {"timings_s",
                  Json{{"data", rep.timings.data_s},
                       {"strategies", rep.timings.strategies_s},
                       {"labels", rep.timings.labels_s},
                       {"selectors", rep.timings.selectors_s},
                       {"evaluation", rep.timings.eval_s}}}});
    }
    return Json{{"format", "dystrat-run-v1"},
                {"config", serialize::to_json(run.config)},
                {"config_hash", config_hash_hex(run.config)},
                {"failures", run.failures},
                {"repeats", std::move(per_repeat)}};
}

}  // namespace detail

/// Writes per-seed report CSVs, the aggregate CSV, a JSON sidecar with the full
/// config echo and raw per-seed values, and the strategy/selector bundles.
/// Refuses to write into a non-empty directory unless `force` is set.
inline std::vector<std::string> emit(const RunResult& run, const std::string& dir, bool force = false) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (fs::exists(root) && !fs::is_directory(root)) throw IoError(dir + " exists and is not a directory");
    if (fs::exists(root) && !fs::is_empty(root) && !force)
        throw IoError(dir + " is not empty; pass force to overwrite");
    fs::create_directories(root);

    const std::string hash = config_hash_hex(run.config);
    std::vector<std::string> written;
    auto emit_file = [&](const std::string& name) {
        written.push_back((root / name).string());
        return written.back();
    };

    for (const auto& rep : run.repeats) {
        detail::write_report_csv(rep.report, run.config.metrics,
                                 emit_file("report_" + hash + "_seed" + std::to_string(rep.seed) + ".csv"));
        serialize::write_json_file(serialize::to_json(rep.set),
                                   emit_file("strategies_" + hash + "_seed" + std::to_string(rep.seed) + ".json"));
        for (const auto& [name, sel] : rep.selectors)
            serialize::write_json_file(
                serialize::to_json(sel, rep.set.fingerprint),
                emit_file("selector_" + hash + "_seed" + std::to_string(rep.seed) + "_" + name + ".json"));
    }
    detail::write_aggregate_csv(run, emit_file("report_" + hash + "_aggregate.csv"));
    serialize::write_json_file(detail::sidecar_json(run), emit_file("run_" + hash + ".json"));
    return written;
}

}  // namespace dystrat
