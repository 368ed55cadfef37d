#pragma once

#include "dystrat/common.hpp"
#include "dystrat/metrics.hpp"
#include "dystrat/selector.hpp"
#include "dystrat/strategies.hpp"
#include "dystrat/windowing.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace dystrat {

/// A named forecaster column added alongside the fixed strategies (DyStrat
/// variants enter evaluation this way).
struct NamedForecaster {
    std::string name;
    ForecastFn fn;
    /// Selected strategy index per instance, when the column dispatches into the
    /// strategy set (used for selection-accuracy reporting). May stay empty.
    std::vector<int> selections;
};

/// Per-instance, per-column losses for one metric.
struct LossMatrix {
    Matrix losses;  // l x n_columns, all finite and >= 0
    std::vector<std::string> column_names;
    Metric metric = Metric::mse;

    int instances() const { return static_cast<int>(losses.rows()); }
    int columns() const { return static_cast<int>(losses.cols()); }
};

/// Forecasts of every column on a dataset, computed once and shared across
/// metrics. Fixed strategy columns precede extra columns.
struct ForecastTable {
    std::vector<std::string> names;
    std::vector<Matrix> forecasts;           // per column: l x H
    std::vector<std::vector<int>> selections;  // per column; empty for fixed strategies
    int n_fixed = 0;

    std::vector<int> fixed_columns() const {
        std::vector<int> idx(static_cast<std::size_t>(n_fixed));
        for (int i = 0; i < n_fixed; ++i) idx[static_cast<std::size_t>(i)] = i;
        return idx;
    }
};

inline ForecastTable forecast_table(const StrategySet& set, const std::vector<NamedForecaster>& extra,
                                    const WindowedDataset& data) {
    if (data.w != set.w || data.horizon != set.horizon)
        throw InvalidInputError("forecast_table: dataset dims do not match strategy set");
    ForecastTable table;
    table.n_fixed = set.size();
    for (const auto& s : set.strategies) {
        table.names.push_back(s.spec.display_name);
        table.forecasts.push_back(s.forecast_rows(data.inputs));
        table.selections.emplace_back();
    }
    for (const auto& e : extra) {
        Matrix f(data.inputs.rows(), data.horizon);
        for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
            f.row(i) = e.fn(data.inputs.row(i).transpose()).transpose();
        table.names.push_back(e.name);
        table.forecasts.push_back(std::move(f));
        table.selections.push_back(e.selections);
    }
    return table;
}

inline LossMatrix loss_matrix(const ForecastTable& table, const WindowedDataset& data, Metric metric) {
    LossMatrix lm;
    lm.metric = metric;
    lm.column_names = table.names;
    lm.losses.resize(data.inputs.rows(), static_cast<Eigen::Index>(table.forecasts.size()));
    for (std::size_t c = 0; c < table.forecasts.size(); ++c)
        for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
            lm.losses(i, static_cast<Eigen::Index>(c)) =
                point_metric(metric, data.targets.row(i).transpose(), table.forecasts[c].row(i).transpose());
    return lm;
}

inline LossMatrix loss_matrix(const StrategySet& set, const std::vector<NamedForecaster>& extra,
                              const WindowedDataset& data, Metric metric) {
    return loss_matrix(forecast_table(set, extra, data), data, metric);
}

/// Mean over instances of the per-instance minimum across the fixed-strategy
/// columns: the error of the optimal dynamic strategy.
inline double oracle_error(const LossMatrix& lm, const std::vector<int>& fixed_columns) {
    if (fixed_columns.empty()) throw InvalidParameterError("oracle_error: no fixed columns");
    double total = 0.0;
    for (Eigen::Index i = 0; i < lm.losses.rows(); ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (int c : fixed_columns) m = std::min(m, lm.losses(i, c));
        total += m;
    }
    return total / static_cast<double>(lm.losses.rows());
}

/// Column mean loss divided by the oracle error. Raw values are returned; the
/// ">= 10" cap seen in result tables is a display convention only.
inline std::vector<double> relative_errors(const LossMatrix& lm, const std::vector<int>& fixed_columns) {
    const double oracle = oracle_error(lm, fixed_columns);
    if (oracle <= 0.0)
        throw InvalidInputError("relative_errors: zero oracle error; task is degenerate, report raw means");
    std::vector<double> out(static_cast<std::size_t>(lm.columns()));
    for (int c = 0; c < lm.columns(); ++c) out[static_cast<std::size_t>(c)] = lm.losses.col(c).mean() / oracle;
    return out;
}

/// Index of the best fixed strategy g*: lowest mean loss, lowest index on ties.
inline int best_fixed(const LossMatrix& lm, const std::vector<int>& fixed_columns) {
    if (fixed_columns.empty()) throw InvalidParameterError("best_fixed: no fixed columns");
    int best = fixed_columns.front();
    double best_mean = lm.losses.col(best).mean();
    for (int c : fixed_columns) {
        const double m = lm.losses.col(c).mean();
        if (m < best_mean) {
            best_mean = m;
            best = c;
        }
    }
    return best;
}

namespace detail {

/// Dense ranks for one row of losses: equal values share a rank and the next
/// distinct value increments by one; ranks lie in [1, n].
inline void dense_ranks_row(const Eigen::Ref<const Eigen::RowVectorXd>& losses, std::vector<double>& ranks) {
    const auto n = losses.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return losses(a) < losses(b); });
    ranks.resize(static_cast<std::size_t>(n));
    double rank = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index pos = 0; pos < n; ++pos) {
        const int col = order[static_cast<std::size_t>(pos)];
        if (pos == 0 || losses(col) != prev) {
            rank += 1.0;
            prev = losses(col);
        }
        ranks[static_cast<std::size_t>(col)] = rank;
    }
}

}  // namespace detail

/// Mean dense rank per column across instances.
inline std::vector<double> dense_rank_instance(const LossMatrix& lm) {
    std::vector<double> mean_rank(static_cast<std::size_t>(lm.columns()), 0.0);
    std::vector<double> row_ranks;
    for (Eigen::Index i = 0; i < lm.losses.rows(); ++i) {
        detail::dense_ranks_row(lm.losses.row(i), row_ranks);
        for (int c = 0; c < lm.columns(); ++c) mean_rank[static_cast<std::size_t>(c)] += row_ranks[static_cast<std::size_t>(c)];
    }
    for (auto& r : mean_rank) r /= static_cast<double>(std::max(1, lm.instances()));
    return mean_rank;
}

/// Dense-ranks each task's per-column mean losses and averages ranks across tasks.
inline std::vector<double> task_rank(const std::vector<std::vector<double>>& per_task_means) {
    if (per_task_means.empty()) throw InvalidParameterError("task_rank: no tasks");
    const std::size_t n_cols = per_task_means.front().size();
    std::vector<double> mean_rank(n_cols, 0.0);
    std::vector<double> ranks;
    for (const auto& means : per_task_means) {
        if (means.size() != n_cols) throw InvalidInputError("task_rank: ragged mean-loss table");
        Eigen::RowVectorXd row(static_cast<Eigen::Index>(n_cols));
        for (std::size_t c = 0; c < n_cols; ++c) row(static_cast<Eigen::Index>(c)) = means[c];
        detail::dense_ranks_row(row, ranks);
        for (std::size_t c = 0; c < n_cols; ++c) mean_rank[c] += ranks[c];
    }
    for (auto& r : mean_rank) r /= static_cast<double>(per_task_means.size());
    return mean_rank;
}

/// Share of instances whose optimal-strategy label equals each column index.
inline std::vector<double> top1_accuracy(const StrategyLabels& labels, int n_columns) {
    if (labels.labels.empty()) throw InvalidInputError("top1_accuracy: no labels");
    std::vector<double> share(static_cast<std::size_t>(n_columns), 0.0);
    for (int z : labels.labels) share[static_cast<std::size_t>(z)] += 1.0;
    for (auto& s : share) s /= static_cast<double>(labels.labels.size());
    return share;
}

struct ColumnStats {
    std::string name;
    bool is_fixed = true;
    std::map<Metric, double> mean_loss;
    double relative_mse = 0.0;
    double task_rank = 0.0;
    double mean_instance_rank = 0.0;
    double top1_share = 0.0;
};

/// Everything measured on one eval split: per-column statistics plus the oracle
/// error they are normalized by. `degenerate` flags a zero oracle (relative
/// errors undefined; raw means remain valid).
struct EvaluationReport {
    std::vector<ColumnStats> columns;
    double oracle_mse = 0.0;
    double oracle_relative = 1.0;
    int gstar_index = 0;
    bool degenerate = false;
    int instance_count = 0;

    const ColumnStats& by_name(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return c;
        throw InvalidInputError("report has no column '" + name + "'");
    }
};

/// Builds the full report for one eval split. The oracle and g* are computed over
/// fixed-strategy columns of the primary (first) metric; top-1 shares come from
/// Algorithm-1 labels recomputed on this split, and selector columns score their
/// selection accuracy against those labels.
inline EvaluationReport build_report(const ForecastTable& table, const WindowedDataset& data,
                                     const std::vector<Metric>& metrics) {
    if (metrics.empty()) throw InvalidParameterError("build_report: need at least one metric");
    const Metric primary = metrics.front();
    EvaluationReport report;
    report.instance_count = data.size();

    const LossMatrix lm = loss_matrix(table, data, primary);
    const auto fixed = table.fixed_columns();
    report.oracle_mse = oracle_error(lm, fixed);
    report.gstar_index = best_fixed(lm, fixed);
    report.degenerate = report.oracle_mse <= 0.0;

    std::vector<Matrix> fixed_forecasts(table.forecasts.begin(), table.forecasts.begin() + table.n_fixed);
    const StrategyLabels eval_labels = labels_from_forecasts(fixed_forecasts, data.targets, primary);
    const auto fixed_share = top1_accuracy(eval_labels, table.n_fixed);
    const auto instance_ranks = dense_rank_instance(lm);
    const auto ranks = task_rank({[&] {
        std::vector<double> means(static_cast<std::size_t>(lm.columns()));
        for (int c = 0; c < lm.columns(); ++c) means[static_cast<std::size_t>(c)] = lm.losses.col(c).mean();
        return means;
    }()});

    report.columns.resize(table.names.size());
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        auto& col = report.columns[c];
        col.name = table.names[c];
        col.is_fixed = static_cast<int>(c) < table.n_fixed;
        col.mean_instance_rank = instance_ranks[c];
        col.task_rank = ranks[c];
        col.relative_mse =
            report.degenerate ? std::numeric_limits<double>::quiet_NaN()
                              : lm.losses.col(static_cast<Eigen::Index>(c)).mean() / report.oracle_mse;
        if (col.is_fixed) {
            col.top1_share = fixed_share[c];
        } else if (!table.selections[c].empty()) {
            double hits = 0.0;
            for (std::size_t i = 0; i < table.selections[c].size(); ++i)
                if (table.selections[c][i] == eval_labels.labels[i]) hits += 1.0;
            col.top1_share = hits / static_cast<double>(table.selections[c].size());
        }
    }
    for (Metric m : metrics) {
        const LossMatrix mlm = m == primary ? lm : loss_matrix(table, data, m);
        for (std::size_t c = 0; c < table.names.size(); ++c)
            report.columns[c].mean_loss[m] = mlm.losses.col(static_cast<Eigen::Index>(c)).mean();
    }
    return report;
}

}  // namespace dystrat
