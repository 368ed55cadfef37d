#pragma once

#include "dystrat/classifiers.hpp"

#include <algorithm>
#include "dystrat/common.hpp"
#include "dystrat/metrics.hpp"
#include "dystrat/strategies.hpp"
#include "dystrat/windowing.hpp"

#include <vector>

namespace dystrat {

/// Per-instance indices of the locally optimal strategy; ties resolve to the
/// lowest strategy index.
struct StrategyLabels {
    std::vector<int> labels;
    Metric loss_used = Metric::mse;

    int size() const { return static_cast<int>(labels.size()); }
};

/// Argmin of per-instance loss across precomputed forecast matrices (one l x H
/// matrix per strategy column).
inline StrategyLabels labels_from_forecasts(const std::vector<Matrix>& forecasts, const Matrix& targets,
                                            Metric metric) {
    if (forecasts.empty()) throw InvalidInputError("compute_labels: no strategies");
    StrategyLabels out;
    out.loss_used = metric;
    out.labels.resize(static_cast<std::size_t>(targets.rows()));
    for (Eigen::Index i = 0; i < targets.rows(); ++i) {
        int best = 0;
        double best_loss = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < forecasts.size(); ++s) {
            const double loss = point_metric(metric, targets.row(i).transpose(), forecasts[s].row(i).transpose());
            if (loss < best_loss) {
                best_loss = loss;
                best = static_cast<int>(s);
            }
        }
        out.labels[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

inline StrategyLabels compute_labels(const StrategySet& set, const WindowedDataset& data, Metric metric) {
    if (data.w != set.w || data.horizon != set.horizon)
        throw InvalidInputError("compute_labels: dataset dims do not match strategy set");
    std::vector<Matrix> forecasts;
    forecasts.reserve(set.strategies.size());
    for (const auto& s : set.strategies) forecasts.push_back(s.forecast_rows(data.inputs));
    return labels_from_forecasts(forecasts, data.targets, metric);
}

inline StrategyLabels compute_labels(const std::vector<ForecastFn>& columns, const WindowedDataset& data,
                                     Metric metric) {
    std::vector<Matrix> forecasts(columns.size());
    for (std::size_t s = 0; s < columns.size(); ++s) {
        forecasts[s].resize(data.inputs.rows(), data.horizon);
        for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
            forecasts[s].row(i) = columns[s](data.inputs.row(i).transpose()).transpose();
    }
    return labels_from_forecasts(forecasts, data.targets, metric);
}

/// Fits the configured classifier on (window, label) pairs. Degenerate single-class
/// label sets are permitted; the selector then answers that class everywhere.
inline TrainedSelector train_selector(const ClassifierConfig& cfg, const Matrix& inputs,
                                      const StrategyLabels& labels, int n_classes) {
    if (inputs.rows() < 1) throw InvalidInputError("train_selector: no instances");
    if (static_cast<int>(labels.labels.size()) != inputs.rows())
        throw InvalidInputError("train_selector: labels do not align with inputs");
    for (int z : labels.labels)
        if (z < 0 || z >= n_classes) throw InvalidInputError("train_selector: label out of range");

    // single-class label sets fit nothing; the selector answers that class everywhere
    const bool single_class =
        std::all_of(labels.labels.begin(), labels.labels.end(), [&](int z) { return z == labels.labels.front(); });
    if (single_class)
        return TrainedSelector::make_constant(cfg.kind, labels.labels.front(), static_cast<int>(inputs.cols()),
                                              n_classes);

    switch (cfg.kind) {
        case ClassifierKind::linear:
            return detail::fit_linear(inputs, labels.labels, n_classes, cfg.linear, cfg.seed);
        case ClassifierKind::mlp:
            return detail::fit_mlp_classifier(inputs, labels.labels, n_classes, cfg.mlp, cfg.seed);
        case ClassifierKind::knn:
            if (cfg.knn.k < 1) throw InvalidParameterError("knn: k must be >= 1");
            return TrainedSelector::make_knn(inputs, labels.labels, cfg.knn.k, n_classes);
        case ClassifierKind::ts_forest:
            return detail::fit_ts_forest(inputs, labels.labels, n_classes, cfg.forest, cfg.seed);
    }
    throw InvalidParameterError("train_selector: unknown classifier kind");
}

/// A selector bound to the strategy set it indexes into.
struct DyStrat {
    const StrategySet* strategy_set = nullptr;
    const TrainedSelector* selector = nullptr;

    Vector forecast(const Eigen::Ref<const Vector>& x) const {
        const int idx = selector->select(x);
        return strategy_set->strategies[static_cast<std::size_t>(idx)].forecast(x);
    }
};

inline Vector dystrat_forecast(const DyStrat& ds, const Eigen::Ref<const Vector>& x) { return ds.forecast(x); }

}  // namespace dystrat
