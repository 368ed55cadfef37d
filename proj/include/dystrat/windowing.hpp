#pragma once

#include "dystrat/common.hpp"
#include "dystrat/series.hpp"

#include <utility>
#include <vector>

namespace dystrat {

/// Sliding-window supervised view of a series: row i of `inputs` holds
/// values[i .. i+w) and row i of `targets` holds values[i+w .. i+w+H).
struct WindowedDataset {
    Matrix inputs;   // l x w
    Matrix targets;  // l x H
    int w = 0;
    int horizon = 0;
    std::vector<int> origin_indices;

    int size() const { return static_cast<int>(inputs.rows()); }
};

struct SplitSpec {
    double train_fraction = 0.75;
    double eval_fraction = 0.10;
};

inline WindowedDataset make_windows(const TimeSeries& ts, int w, int horizon) {
    if (w < 1 || horizon < 1) throw InvalidParameterError("make_windows: w and H must be >= 1");
    const int t = ts.length();
    if (t < w + horizon)
        throw InvalidParameterError("make_windows: series '" + ts.name + "' has " + std::to_string(t) +
                                    " values; needs at least " + std::to_string(w + horizon));
    const int count = t - w - horizon + 1;
    WindowedDataset ds;
    ds.w = w;
    ds.horizon = horizon;
    ds.inputs.resize(count, w);
    ds.targets.resize(count, horizon);
    ds.origin_indices.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < w; ++j) ds.inputs(i, j) = ts.values[static_cast<std::size_t>(i + j)];
        for (int j = 0; j < horizon; ++j) ds.targets(i, j) = ts.values[static_cast<std::size_t>(i + w + j)];
        ds.origin_indices[static_cast<std::size_t>(i)] = i;
    }
    return ds;
}

namespace detail {

inline WindowedDataset take_rows(const WindowedDataset& ds, int begin, int count) {
    WindowedDataset out;
    out.w = ds.w;
    out.horizon = ds.horizon;
    out.inputs = ds.inputs.middleRows(begin, count);
    out.targets = ds.targets.middleRows(begin, count);
    out.origin_indices.assign(ds.origin_indices.begin() + begin, ds.origin_indices.begin() + begin + count);
    return out;
}

}  // namespace detail

/// Chronological holdout: eval is the final eval_fraction of instances, train the
/// first train_fraction of what remains. The partitions never overlap.
inline std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds, const SplitSpec& spec) {
    if (spec.eval_fraction <= 0.0 || spec.eval_fraction >= 1.0)
        throw InvalidParameterError("split: eval_fraction must lie in (0,1)");
    if (spec.train_fraction <= 0.0 || spec.train_fraction > 1.0)
        throw InvalidParameterError("split: train_fraction must lie in (0,1]");
    const int l = ds.size();
    const int n_eval = static_cast<int>(spec.eval_fraction * l);
    const int rest = l - n_eval;
    const int n_train = static_cast<int>(spec.train_fraction * rest);
    if (n_eval < 1 || n_train < 1)
        throw InvalidSplitError("split: " + std::to_string(l) + " instances leave an empty partition (train " +
                                std::to_string(n_train) + ", eval " + std::to_string(n_eval) + ")");
    return {detail::take_rows(ds, 0, n_train), detail::take_rows(ds, l - n_eval, n_eval)};
}

}  // namespace dystrat
