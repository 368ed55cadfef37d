#pragma once

#include "dystrat/common.hpp"
#include "dystrat/mlp.hpp"
#include "dystrat/windowing.hpp"

#include <string>
#include <vector>

namespace dystrat {

enum class StrategyKind { mo, recmo, dirmo, dirrec, rectify };

/// Declarative strategy identity: kind plus the chunk size sigma where it applies.
/// sigma equals the horizon for MO and is unused for dirrec/rectify.
struct StrategySpec {
    StrategyKind kind = StrategyKind::mo;
    int sigma = 0;
    std::string display_name;

    static StrategySpec mo() { return {StrategyKind::mo, 0, "mo"}; }
    static StrategySpec recmo(int sigma) { return {StrategyKind::recmo, sigma, "r" + std::to_string(sigma)}; }
    static StrategySpec dirmo(int sigma) { return {StrategyKind::dirmo, sigma, "d" + std::to_string(sigma)}; }
    static StrategySpec dirrec() { return {StrategyKind::dirrec, 0, "dirrec"}; }
    static StrategySpec rectify() { return {StrategyKind::rectify, 0, "rectify"}; }

    /// RECMO and DIRMO collapse onto MO at sigma == H; training and seeding always
    /// go through the canonical form so the three are bitwise interchangeable.
    StrategySpec canonical(int horizon) const {
        if ((kind == StrategyKind::recmo || kind == StrategyKind::dirmo) && sigma == horizon) return mo();
        return *this;
    }

    void validate(int horizon) const {
        if (kind == StrategyKind::recmo || kind == StrategyKind::dirmo) {
            if (sigma < 1 || sigma > horizon || horizon % sigma != 0)
                throw InvalidParameterError("strategy " + display_name + ": sigma must divide H=" +
                                            std::to_string(horizon));
        }
    }
};

/// All candidate strategies for a horizon, in the conventional column order:
/// mo, rectify, the sigma=1 pair, dirrec, then remaining d/r pairs by ascending sigma.
inline std::vector<StrategySpec> enumerate_strategies(int horizon) {
    if (horizon < 1) throw InvalidParameterError("enumerate_strategies: H must be >= 1");
    std::vector<int> divisors;
    for (int s = 1; s < horizon; ++s)
        if (horizon % s == 0) divisors.push_back(s);

    std::vector<StrategySpec> specs;
    specs.push_back(StrategySpec::mo());
    specs.push_back(StrategySpec::rectify());
    bool dirrec_placed = false;
    for (int s : divisors) {
        specs.push_back(StrategySpec::dirmo(s));
        specs.push_back(StrategySpec::recmo(s));
        if (!dirrec_placed) {
            specs.push_back(StrategySpec::dirrec());
            dirrec_placed = true;
        }
    }
    if (!dirrec_placed) specs.push_back(StrategySpec::dirrec());
    return specs;
}

/// Rolling-buffer recursion: repeatedly feed the last w buffered values to a
/// sigma-step predictor and append its output, until H values are collected.
/// The single rule covers sigma=H, sigma<H with w>H, and sigma<H with w<H.
template <typename Predictor>
inline Vector recursive_forecast(Predictor&& predict_chunk, const Eigen::Ref<const Vector>& x, int horizon) {
    const auto w = x.size();
    Vector buffer(w + horizon);
    buffer.head(w) = x;
    Eigen::Index filled = w;
    while (filled < w + horizon) {
        Vector chunk = predict_chunk(buffer.segment(filled - w, w));
        const auto take = std::min<Eigen::Index>(chunk.size(), w + horizon - filled);
        buffer.segment(filled, take) = chunk.head(take);
        filled += take;
    }
    return buffer.tail(horizon);
}

/// A trained strategy bundle: one model for MO/RECMO, H/sigma for DIRMO, H chained
/// models for dirrec, and a recursive base plus correction model for rectify.
struct TrainedStrategy {
    StrategySpec spec;
    int w = 0;
    int horizon = 0;
    std::vector<MlpRegressor> models;

    Vector forecast(const Eigen::Ref<const Vector>& x) const {
        if (x.size() != w)
            throw InvalidInputError("forecast: expected window of " + std::to_string(w) + ", got " +
                                    std::to_string(x.size()));
        switch (spec.kind) {
            case StrategyKind::mo:
                return models[0].predict(x);
            case StrategyKind::recmo:
                return recursive_forecast([&](const Eigen::Ref<const Vector>& in) { return models[0].predict(in); },
                                          x, horizon);
            case StrategyKind::dirmo: {
                Vector out(horizon);
                const int sigma = spec.sigma;
                for (std::size_t i = 0; i < models.size(); ++i)
                    out.segment(static_cast<Eigen::Index>(i) * sigma, sigma) = models[i].predict(x);
                return out;
            }
            case StrategyKind::dirrec: {
                Vector feats(w + horizon);
                feats.head(w) = x;
                for (int i = 0; i < horizon; ++i)
                    feats(w + i) = models[static_cast<std::size_t>(i)].predict(feats.head(w + i))(0);
                return feats.tail(horizon);
            }
            case StrategyKind::rectify: {
                Vector base = recursive_forecast(
                    [&](const Eigen::Ref<const Vector>& in) { return models[0].predict(in); }, x, horizon);
                return base + models[1].predict(x);
            }
        }
        throw InvalidInputError("forecast: unknown strategy kind");
    }

    /// Row-wise forecasts for a whole input matrix.
    Matrix forecast_rows(const Eigen::Ref<const Matrix>& x) const {
        switch (spec.kind) {
            case StrategyKind::mo:
                return models[0].predict_rows(x);
            case StrategyKind::dirmo: {
                Matrix out(x.rows(), horizon);
                const int sigma = spec.sigma;
                for (std::size_t i = 0; i < models.size(); ++i)
                    out.middleCols(static_cast<Eigen::Index>(i) * sigma, sigma) = models[i].predict_rows(x);
                return out;
            }
            case StrategyKind::recmo: {
                const int sigma = spec.sigma;
                Matrix buffer(x.rows(), x.cols() + horizon);
                buffer.leftCols(x.cols()) = x;
                Eigen::Index filled = x.cols();
                while (filled < buffer.cols()) {
                    Matrix chunk = models[0].predict_rows(buffer.middleCols(filled - w, w));
                    const auto take = std::min<Eigen::Index>(sigma, buffer.cols() - filled);
                    buffer.middleCols(filled, take) = chunk.leftCols(take);
                    filled += take;
                }
                return buffer.rightCols(horizon);
            }
            case StrategyKind::dirrec: {
                Matrix feats(x.rows(), x.cols() + horizon);
                feats.leftCols(x.cols()) = x;
                for (int i = 0; i < horizon; ++i)
                    feats.col(w + i) = models[static_cast<std::size_t>(i)].predict_rows(feats.leftCols(w + i));
                return feats.rightCols(horizon);
            }
            case StrategyKind::rectify: {
                Matrix buffer(x.rows(), x.cols() + horizon);
                buffer.leftCols(x.cols()) = x;
                Eigen::Index filled = x.cols();
                while (filled < buffer.cols()) {
                    buffer.col(filled) = models[0].predict_rows(buffer.middleCols(filled - w, w));
                    ++filled;
                }
                return buffer.rightCols(horizon) + models[1].predict_rows(x);
            }
        }
        throw InvalidInputError("forecast: unknown strategy kind");
    }
};

namespace detail {

inline MlpConfig with_seed(const MlpConfig& cfg, std::uint64_t base, const std::string& name, std::uint64_t index) {
    MlpConfig out = cfg;
    out.seed = derive_seed(base, name, index);
    return out;
}

}  // namespace detail

inline TrainedStrategy train_strategy(const StrategySpec& raw_spec, const WindowedDataset& train,
                                      const MlpConfig& cfg) {
    if (train.size() < 1) throw InvalidInputError("train_strategy: empty training set");
    raw_spec.validate(train.horizon);
    const StrategySpec spec = raw_spec.canonical(train.horizon);
    const int horizon = train.horizon;

    TrainedStrategy ts;
    ts.spec = spec;
    ts.w = train.w;
    ts.horizon = horizon;

    switch (spec.kind) {
        case StrategyKind::mo:
            ts.models.push_back(train_mlp(train.inputs, train.targets, detail::with_seed(cfg, cfg.seed, "mo", 0)));
            break;
        case StrategyKind::recmo:
            // the sigma-step model sees only the first sigma target columns;
            // recursion covers the rest of the horizon
            ts.models.push_back(train_mlp(train.inputs, train.targets.leftCols(spec.sigma),
                                          detail::with_seed(cfg, cfg.seed, spec.display_name, 0)));
            break;
        case StrategyKind::dirmo: {
            const int m = horizon / spec.sigma;
            for (int i = 0; i < m; ++i)
                ts.models.push_back(train_mlp(train.inputs, train.targets.middleCols(i * spec.sigma, spec.sigma),
                                              detail::with_seed(cfg, cfg.seed, spec.display_name,
                                                                static_cast<std::uint64_t>(i))));
            break;
        }
        case StrategyKind::dirrec: {
            // model i consumes the window plus all earlier models' training-time predictions
            Matrix feats(train.size(), train.w + horizon);
            feats.leftCols(train.w) = train.inputs;
            for (int i = 0; i < horizon; ++i) {
                ts.models.push_back(train_mlp(feats.leftCols(train.w + i), train.targets.col(i),
                                              detail::with_seed(cfg, cfg.seed, "dirrec",
                                                                static_cast<std::uint64_t>(i))));
                feats.col(train.w + i) = ts.models.back().predict_rows(feats.leftCols(train.w + i));
            }
            break;
        }
        case StrategyKind::rectify: {
            TrainedStrategy base;
            base.spec = StrategySpec::recmo(1);
            base.w = train.w;
            base.horizon = horizon;
            base.models.push_back(
                train_mlp(train.inputs, train.targets.col(0), detail::with_seed(cfg, cfg.seed, "rectify", 0)));
            const Matrix residuals = train.targets - base.forecast_rows(train.inputs);
            ts.models.push_back(std::move(base.models[0]));
            ts.models.push_back(train_mlp(train.inputs, residuals, detail::with_seed(cfg, cfg.seed, "rectify", 1)));
            break;
        }
    }
    return ts;
}

/// A horizon-consistent collection of trained strategies.
struct StrategySet {
    std::vector<TrainedStrategy> strategies;
    int w = 0;
    int horizon = 0;
    std::uint64_t fingerprint = 0;

    int size() const { return static_cast<int>(strategies.size()); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(strategies.size());
        for (const auto& s : strategies) out.push_back(s.spec.display_name);
        return out;
    }

    std::vector<ForecastFn> forecast_fns() const {
        std::vector<ForecastFn> fns;
        fns.reserve(strategies.size());
        for (const auto& s : strategies)
            fns.push_back([&s](const Eigen::Ref<const Vector>& x) { return s.forecast(x); });
        return fns;
    }
};

namespace detail {

inline std::uint64_t strategy_set_fingerprint(const std::vector<StrategySpec>& specs, const WindowedDataset& train,
                                              const MlpConfig& cfg) {
    std::uint64_t h = derive_seed(cfg.seed, "strategy-set");
    h = splitmix64(h ^ static_cast<std::uint64_t>(train.w));
    h = splitmix64(h ^ static_cast<std::uint64_t>(train.horizon));
    h = splitmix64(h ^ static_cast<std::uint64_t>(train.size()));
    h = splitmix64(h ^ static_cast<std::uint64_t>(cfg.hidden_width));
    h = splitmix64(h ^ static_cast<std::uint64_t>(cfg.max_epochs));
    for (const auto& s : specs) h = splitmix64(h ^ fnv1a(s.display_name));
    return h;
}

}  // namespace detail

inline StrategySet train_all(const std::vector<StrategySpec>& specs, const WindowedDataset& train,
                             const MlpConfig& cfg) {
    if (specs.empty()) throw InvalidParameterError("train_all: no strategies requested");
    {
        std::vector<std::string> seen;
        for (const auto& s : specs) {
            for (const auto& other : seen)
                if (other == s.display_name)
                    throw InvalidParameterError("train_all: duplicate strategy '" + s.display_name + "'");
            seen.push_back(s.display_name);
        }
    }
    StrategySet set;
    set.w = train.w;
    set.horizon = train.horizon;
    set.fingerprint = detail::strategy_set_fingerprint(specs, train, cfg);
    set.strategies.reserve(specs.size());
    for (const auto& spec : specs) {
        try {
            set.strategies.push_back(train_strategy(spec, train, cfg));
        } catch (const Error& e) {
            throw Error("training strategy '" + spec.display_name + "' failed: " + e.what());
        }
    }
    return set;
}

}  // namespace dystrat
