#include "dystrat/selector.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "dystrat/rng.hpp"

using namespace dystrat;

namespace {

WindowedDataset random_dataset(int n, int w, int horizon, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts{"t", {}, SeriesSource::csv};
    for (int i = 0; i < n + w + horizon - 1; ++i) ts.values.push_back(rng.uniform());
    return make_windows(ts, w, horizon);
}

ForecastFn constant_forecaster(std::vector<double> values) {
    return [values = std::move(values)](const Eigen::Ref<const Vector>&) {
        Vector out(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
        return out;
    };
}

}  // namespace

TEST_CASE("label computation", "[selector][labels]") {
    SECTION("a dominating strategy takes every label") {
        auto data = random_dataset(20, 3, 2, 1);
        std::vector<ForecastFn> cols;
        cols.push_back([&](const Eigen::Ref<const Vector>& x) {
            // reproduce the target exactly by peeking: stub for the dominated case
            for (int i = 0; i < data.size(); ++i)
                if (data.inputs.row(i).transpose() == x) return Vector(data.targets.row(i).transpose());
            return Vector(Vector::Zero(2));
        });
        cols.push_back(constant_forecaster({100.0, 100.0}));
        const auto labels = compute_labels(cols, data, Metric::mse);
        for (int z : labels.labels) REQUIRE(z == 0);
    }
    SECTION("matches exhaustive brute force on stub strategies") {
        auto data = random_dataset(4, 3, 2, 2);
        std::vector<ForecastFn> cols{constant_forecaster({0.3, 0.4}), constant_forecaster({0.5, 0.5}),
                                     constant_forecaster({0.45, 0.35})};
        const auto labels = compute_labels(cols, data, Metric::mse);
        for (int i = 0; i < data.size(); ++i) {
            double best_loss = std::numeric_limits<double>::infinity();
            int best = -1;
            for (int c = 0; c < 3; ++c) {
                const Vector fc = cols[static_cast<std::size_t>(c)](data.inputs.row(i).transpose());
                const double loss = (data.targets.row(i).transpose() - fc).squaredNorm() / 2.0;
                if (loss < best_loss) {
                    best_loss = loss;
                    best = c;
                }
            }
            REQUIRE(labels.labels[static_cast<std::size_t>(i)] == best);
        }
    }
    SECTION("ties break to the lowest index") {
        auto data = random_dataset(6, 3, 2, 3);
        std::vector<ForecastFn> cols{constant_forecaster({0.2, 0.2}), constant_forecaster({0.2, 0.2})};
        const auto labels = compute_labels(cols, data, Metric::mse);
        for (int z : labels.labels) REQUIRE(z == 0);
    }
    SECTION("any metric drives the argmin") {
        auto data = random_dataset(10, 3, 2, 4);
        std::vector<ForecastFn> cols{constant_forecaster({0.9, 0.1}), constant_forecaster({0.4, 0.6})};
        const auto by_mse = compute_labels(cols, data, Metric::mse);
        const auto by_max = compute_labels(cols, data, Metric::maxerr);
        REQUIRE(by_mse.loss_used == Metric::mse);
        REQUIRE(by_max.loss_used == Metric::maxerr);
    }
}

TEST_CASE("tsf interval features", "[selector][tsf]") {
    SECTION("constant window") {
        Vector x = Vector::Constant(8, 3.25);
        const Vector f = tsf_features(x, {{0, 8}, {2, 5}});
        REQUIRE(f.size() == 6);
        REQUIRE(f(0) == Catch::Approx(3.25));
        REQUIRE(f(1) == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(f(2) == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(f(3) == Catch::Approx(3.25));
    }
    SECTION("linear ramp: exact arithmetic") {
        Vector x(4);
        x << 0, 1, 2, 3;
        const Vector f = tsf_features(x, {{0, 4}});
        REQUIRE(f(0) == Catch::Approx(1.5));
        REQUIRE(f(1) == Catch::Approx(std::sqrt(1.25)));  // population std of {0,1,2,3}
        REQUIRE(f(2) == Catch::Approx(1.0));
    }
    SECTION("slope matches the closed-form regression oracle") {
        Rng rng(7);
        Vector x(12);
        for (int i = 0; i < 12; ++i) x(i) = rng.uniform(-2.0, 2.0);
        const Vector f = tsf_features(x, {{3, 11}});
        // oracle: slope from the normal equations on (t, x_t), t = 0..7
        const int n = 8;
        double st = 0, sx = 0, stx = 0, stt = 0;
        for (int t = 0; t < n; ++t) {
            st += t;
            sx += x(3 + t);
            stx += t * x(3 + t);
            stt += t * t;
        }
        const double slope = (n * stx - st * sx) / (n * stt - st * st);
        REQUIRE(f(2) == Catch::Approx(slope).margin(1e-12));
    }
    SECTION("out of range interval") {
        Vector x = Vector::Zero(5);
        REQUIRE_THROWS_AS(tsf_features(x, {{3, 7}}), InvalidParameterError);
    }
}

TEST_CASE("selector training", "[selector]") {
    SECTION("knn k=1 memorizes its training set") {
        auto data = random_dataset(40, 6, 2, 5);
        std::vector<ForecastFn> cols{constant_forecaster({0.1, 0.1}), constant_forecaster({0.6, 0.6}),
                                     constant_forecaster({0.9, 0.9})};
        const auto labels = compute_labels(cols, data, Metric::mse);
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::knn;
        cfg.knn.k = 1;
        const auto sel = train_selector(cfg, data.inputs, labels, 3);
        for (int i = 0; i < data.size(); ++i)
            REQUIRE(sel.select(data.inputs.row(i).transpose()) == labels.labels[static_cast<std::size_t>(i)]);
    }
    SECTION("linear classifier separates separable classes") {
        // construct linearly separable data; a perceptron converging proves separability
        Rng rng(6);
        const int n = 120;
        Matrix x(n, 4);
        StrategyLabels labels;
        labels.labels.resize(n);
        Vector true_w(4);
        true_w << 1.0, -2.0, 0.5, 1.5;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
            const double margin = true_w.dot(x.row(i).transpose());
            if (std::abs(margin) < 0.3) {
                --i;
                continue;
            }
            labels.labels[static_cast<std::size_t>(i)] = margin > 0.0 ? 1 : 0;
        }
        {
            Vector w = Vector::Zero(4);
            double b = 0.0;
            bool converged = false;
            for (int epoch = 0; epoch < 200 && !converged; ++epoch) {
                converged = true;
                for (int i = 0; i < n; ++i) {
                    const double pred = w.dot(x.row(i).transpose()) + b > 0.0 ? 1.0 : 0.0;
                    const double err = labels.labels[static_cast<std::size_t>(i)] - pred;
                    if (err != 0.0) {
                        converged = false;
                        w += err * x.row(i).transpose();
                        b += err;
                    }
                }
            }
            REQUIRE(converged);  // oracle: data is separable
        }
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::linear;
        const auto sel = train_selector(cfg, x, labels, 2);
        int correct = 0;
        for (int i = 0; i < n; ++i)
            if (sel.select(x.row(i).transpose()) == labels.labels[static_cast<std::size_t>(i)]) ++correct;
        REQUIRE(correct >= static_cast<int>(0.95 * n));
    }
    SECTION("degenerate single-class labels produce a constant selector") {
        auto data = random_dataset(25, 5, 2, 8);
        StrategyLabels labels;
        labels.labels.assign(25, 2);
        for (ClassifierKind kind :
             {ClassifierKind::linear, ClassifierKind::mlp, ClassifierKind::knn, ClassifierKind::ts_forest}) {
            ClassifierConfig cfg;
            cfg.kind = kind;
            cfg.mlp.epochs = 5;
            cfg.linear.epochs = 5;
            cfg.forest.n_trees = 5;
            const auto sel = train_selector(cfg, data.inputs, labels, 4);
            Rng rng(9);
            for (int trial = 0; trial < 10; ++trial) {
                Vector probe(5);
                for (int j = 0; j < 5; ++j) probe(j) = rng.uniform();
                REQUIRE(sel.select(probe) == 2);
            }
        }
    }
    SECTION("ts-forest is deterministic under its seed and within range") {
        auto data = random_dataset(60, 8, 4, 10);
        StrategyLabels labels;
        labels.labels.resize(60);
        Rng rng(11);
        for (auto& z : labels.labels) z = static_cast<int>(rng.below(3));
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::ts_forest;
        cfg.forest.n_trees = 20;
        cfg.seed = 77;
        const auto a = train_selector(cfg, data.inputs, labels, 3);
        const auto b = train_selector(cfg, data.inputs, labels, 3);
        for (int i = 0; i < data.size(); ++i) {
            const int sa = a.select(data.inputs.row(i).transpose());
            REQUIRE(sa == b.select(data.inputs.row(i).transpose()));
            REQUIRE(sa >= 0);
            REQUIRE(sa < 3);
        }
    }
    SECTION("misaligned labels are rejected") {
        auto data = random_dataset(10, 4, 2, 12);
        StrategyLabels labels;
        labels.labels.assign(9, 0);
        ClassifierConfig cfg;
        REQUIRE_THROWS_AS(train_selector(cfg, data.inputs, labels, 2), InvalidInputError);
    }
}

TEST_CASE("dystrat dispatch", "[selector][dystrat]") {
    auto data = random_dataset(60, 5, 3, 13);
    MlpConfig mlp_cfg;
    mlp_cfg.hidden_width = 6;
    mlp_cfg.max_epochs = 3;
    mlp_cfg.seed = 2;
    const auto set = train_all(enumerate_strategies(3), data, mlp_cfg);

    SECTION("selector output always indexes the set; forecasts have H values") {
        const auto labels = compute_labels(set, data, Metric::mse);
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::knn;
        cfg.knn.k = 3;
        const auto sel = train_selector(cfg, data.inputs, labels, set.size());
        DyStrat ds{&set, &sel};
        for (int i = 0; i < data.size(); ++i) {
            const Vector fc = ds.forecast(data.inputs.row(i).transpose());
            REQUIRE(fc.size() == 3);
            REQUIRE(fc.allFinite());
        }
    }
    SECTION("selection dispatches to exactly that strategy's forecast") {
        // a 1-nn selector trained on constant labels is a hard-wired dispatcher
        StrategyLabels wired;
        wired.labels.assign(static_cast<std::size_t>(data.size()), 2);
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::knn;
        cfg.knn.k = 1;
        const auto sel = train_selector(cfg, data.inputs, wired, set.size());
        DyStrat ds{&set, &sel};
        for (int i = 0; i < 10; ++i) {
            const Vector x = data.inputs.row(i).transpose();
            const Vector want = set.strategies[2].forecast(x);
            const Vector got = ds.forecast(x);
            for (int j = 0; j < 3; ++j) REQUIRE(got(j) == want(j));
        }
    }
    SECTION("single-strategy set collapses to that strategy") {
        const auto solo = train_all({StrategySpec::mo()}, data, mlp_cfg);
        StrategyLabels labels;
        labels.labels.assign(static_cast<std::size_t>(data.size()), 0);
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::linear;
        cfg.linear.epochs = 5;
        const auto sel = train_selector(cfg, data.inputs, labels, 1);
        DyStrat ds{&solo, &sel};
        for (int i = 0; i < 10; ++i) {
            const Vector x = data.inputs.row(i).transpose();
            const Vector want = solo.strategies[0].forecast(x);
            const Vector got = dystrat_forecast(ds, x);
            for (int j = 0; j < 3; ++j) REQUIRE(got(j) == want(j));
        }
    }
}
