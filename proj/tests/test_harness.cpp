#include "dystrat/experiment.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dystrat;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.dataset.kind = DatasetKind::noisy_sine;
    cfg.dataset.n = 600;
    cfg.dataset.sine_period = 40.0;
    cfg.dataset.sine_noise = 0.05;
    cfg.horizon = 4;
    cfg.window_multiplier = 2.0;
    cfg.repeats = 2;
    cfg.base_seed = 11;
    cfg.mlp.hidden_width = 12;
    cfg.mlp.max_epochs = 15;
    cfg.metrics = {Metric::mse, Metric::mae};
    for (auto& c : cfg.classifiers) {
        c.forest.n_trees = 10;
        c.mlp.epochs = 20;
        c.linear.epochs = 40;
    }
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / ("dystrat_" + tag + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config files parse and round-trip", "[harness][config]") {
    const std::string text = R"(
# experiment
horizon = 8
window_multiplier = 1.5
train_fraction = 0.6
eval_fraction = 0.2
repeats = 3
base_seed = 99
metrics = mse, smape
strategy_filter = mo, d2, r2
classifiers = knn, tsf

[dataset]
kind = sine
n = 500
period = 25
noise_fraction = 0.02

[mlp]
hidden_width = 31
learning_rate = 0.002
batch_size = 16
max_epochs = 44

[classifier.knn]
k = 3

[classifier.tsf]
n_trees = 7
min_interval_length = 2
)";
    std::stringstream in(text);
    const auto cfg = parse_experiment_config(in);
    REQUIRE(cfg.horizon == 8);
    REQUIRE(cfg.window() == 12);
    REQUIRE(cfg.train_fraction == Catch::Approx(0.6));
    REQUIRE(cfg.repeats == 3);
    REQUIRE(cfg.base_seed == 99);
    REQUIRE(cfg.metrics == std::vector<Metric>{Metric::mse, Metric::smape});
    REQUIRE(cfg.strategy_filter == std::vector<std::string>{"mo", "d2", "r2"});
    REQUIRE(cfg.classifiers.size() == 2);
    REQUIRE(cfg.classifiers[0].kind == ClassifierKind::knn);
    REQUIRE(cfg.classifiers[0].knn.k == 3);
    REQUIRE(cfg.classifiers[1].forest.n_trees == 7);
    REQUIRE(cfg.dataset.kind == DatasetKind::noisy_sine);
    REQUIRE(cfg.dataset.sine_period == Catch::Approx(25.0));
    REQUIRE(cfg.mlp.hidden_width == 31);
    REQUIRE(cfg.mlp.batch_size == 16);

    SECTION("json sidecar round-trips to an equal config") {
        const auto j = serialize::to_json(cfg);
        const auto back = serialize::experiment_config_from_json(j);
        REQUIRE(back == cfg);
        REQUIRE(config_hash(back) == config_hash(cfg));
    }
    SECTION("bad lines are rejected") {
        std::stringstream bad("horizon 8\n");
        REQUIRE_THROWS_AS(parse_experiment_config(bad), InvalidParameterError);
        std::stringstream bad2("[dataset\nkind = sine\n");
        REQUIRE_THROWS_AS(parse_experiment_config(bad2), InvalidParameterError);
    }
}

TEST_CASE("run_experiment end to end", "[harness][run]") {
    const auto cfg = tiny_config();
    const auto run = run_experiment(cfg);
    REQUIRE(run.repeats.size() == 2);
    REQUIRE(run.failures.empty());

    SECTION("report has 7 fixed strategies plus 4 selector columns") {
        const auto& report = run.repeats.front().report;
        REQUIRE(report.columns.size() == 11);  // H=4: mo rectify d1 r1 dirrec d2 r2 + 4 DS
        int fixed = 0;
        for (const auto& c : report.columns) fixed += c.is_fixed ? 1 : 0;
        REQUIRE(fixed == 7);
    }
    SECTION("oracle floor holds in every repeat") {
        for (const auto& rep : run.repeats) {
            REQUIRE(rep.report.oracle_relative == 1.0);
            for (const auto& col : rep.report.columns) REQUIRE(col.relative_mse >= 1.0 - 1e-12);
        }
    }
    SECTION("selector columns dispatch: per-instance loss equals the chosen strategy's loss") {
        const auto& rep = run.repeats.front();
        const auto& lm = rep.eval_losses;
        const int n_fixed = rep.set.size();
        for (std::size_t s = 0; s < rep.eval_selections.size(); ++s)
            for (int i = 0; i < rep.eval.size(); ++i) {
                const int pick = rep.eval_selections[s][static_cast<std::size_t>(i)];
                REQUIRE(lm.losses(i, n_fixed + static_cast<int>(s)) == lm.losses(i, pick));
            }
    }
    SECTION("identical config reruns bit-identically") {
        const auto again = run_experiment(cfg);
        for (std::size_t r = 0; r < run.repeats.size(); ++r) {
            REQUIRE(again.repeats[r].report.oracle_mse == run.repeats[r].report.oracle_mse);
            for (std::size_t c = 0; c < run.repeats[r].report.columns.size(); ++c)
                REQUIRE(again.repeats[r].report.columns[c].relative_mse ==
                        run.repeats[r].report.columns[c].relative_mse);
        }
    }
    SECTION("strategy filter narrows the report") {
        auto filtered = cfg;
        filtered.strategy_filter = {"mo"};
        filtered.classifiers.clear();
        filtered.repeats = 1;
        const auto solo = run_experiment(filtered);
        REQUIRE(solo.repeats.front().report.columns.size() == 1);
        REQUIRE(solo.repeats.front().report.columns[0].relative_mse == Catch::Approx(1.0));
        auto bad = filtered;
        bad.strategy_filter = {"d3"};
        REQUIRE_THROWS_AS(run_experiment(bad), InvalidParameterError);
    }
}

TEST_CASE("emit writes the documented artifact set", "[harness][emit]") {
    auto cfg = tiny_config();
    cfg.repeats = 1;
    cfg.classifiers.resize(2);
    const auto run = run_experiment(cfg);
    TempDir dir("emit");

    const auto files = emit(run, dir.path.string());
    SECTION("csv row count equals loss-matrix column count") {
        const auto hash = config_hash_hex(cfg);
        const auto csv = slurp((dir.path / ("report_" + hash + "_seed11.csv")).string());
        const auto rows = static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) - 1;  // minus header
        REQUIRE(rows == run.repeats.front().report.columns.size());
    }
    SECTION("re-emit refuses without force, succeeds with it") {
        REQUIRE_THROWS_AS(emit(run, dir.path.string()), IoError);
        REQUIRE_NOTHROW(emit(run, dir.path.string(), true));
    }
    SECTION("strategy and selector bundles round-trip") {
        const auto hash = config_hash_hex(cfg);
        const auto set_json = serialize::read_json_file((dir.path / ("strategies_" + hash + "_seed11.json")).string());
        const auto set = serialize::strategy_set_from_json(set_json);
        REQUIRE(set.size() == run.repeats.front().set.size());
        REQUIRE(set.fingerprint == run.repeats.front().set.fingerprint);
        // reloaded strategies forecast identically
        const auto& orig = run.repeats.front().set;
        Vector x = run.repeats.front().eval.inputs.row(0).transpose();
        for (int s = 0; s < set.size(); ++s) {
            const Vector a = orig.strategies[static_cast<std::size_t>(s)].forecast(x);
            const Vector b = set.strategies[static_cast<std::size_t>(s)].forecast(x);
            for (int j = 0; j < 4; ++j) REQUIRE(a(j) == b(j));
        }

        const auto sel_json =
            serialize::read_json_file((dir.path / ("selector_" + hash + "_seed11_DSlinear.json")).string());
        const auto sel = serialize::selector_from_json(sel_json, set.fingerprint);
        REQUIRE(sel.kind() == ClassifierKind::linear);
        for (int i = 0; i < 5; ++i) {
            const Vector probe = run.repeats.front().eval.inputs.row(i).transpose();
            REQUIRE(sel.select(probe) == run.repeats.front().selectors[0].second.select(probe));
        }
        REQUIRE_THROWS_AS(serialize::selector_from_json(sel_json, set.fingerprint + 1), IoError);
    }
    SECTION("sidecar config echo round-trips") {
        const auto hash = config_hash_hex(cfg);
        const auto sidecar = serialize::read_json_file((dir.path / ("run_" + hash + ".json")).string());
        REQUIRE(serialize::experiment_config_from_json(sidecar.at("config")) == cfg);
    }
}

TEST_CASE("emitted csv bytes are deterministic across reruns", "[harness][determinism]") {
    auto cfg = tiny_config();
    cfg.repeats = 1;
    TempDir a("det_a"), b("det_b");
    emit(run_experiment(cfg), a.path.string());
    emit(run_experiment(cfg), b.path.string());
    const auto hash = config_hash_hex(cfg);
    REQUIRE(slurp((a.path / ("report_" + hash + "_seed11.csv")).string()) ==
            slurp((b.path / ("report_" + hash + "_seed11.csv")).string()));
    REQUIRE(slurp((a.path / ("report_" + hash + "_aggregate.csv")).string()) ==
            slurp((b.path / ("report_" + hash + "_aggregate.csv")).string()));
}

TEST_CASE("sweep composes runs and ranks common columns", "[harness][sweep]") {
    auto base = tiny_config();
    base.repeats = 1;
    base.classifiers.resize(2);
    std::vector<ExperimentConfig> grid;
    for (int h : {2, 4}) {
        auto cfg = base;
        cfg.horizon = h;
        grid.push_back(cfg);
    }
    const auto result = sweep(grid);
    REQUIRE(result.runs.size() == 2);
    // H=2 enumerates {mo, rectify, d1, r1, dirrec}; H=4 adds the sigma=2 pair.
    // Common columns are the H=2 set plus selector columns.
    REQUIRE(result.rank_columns.size() == 5 + 2);
    REQUIRE(result.mean_ranks.size() == result.rank_columns.size());
    for (double r : result.mean_ranks) {
        REQUIRE(r >= 1.0);
        REQUIRE(r <= 7.0);
    }
}

TEST_CASE("subset curve degenerate sizes", "[harness][subset]") {
    auto cfg = tiny_config();
    cfg.repeats = 1;
    cfg.classifiers.resize(2);
    cfg.classifiers[1].kind = ClassifierKind::ts_forest;
    cfg.classifiers[1].forest.n_trees = 10;
    cfg.subset.pool = "all";

    SECTION("k = |S| collapses to a single subset") {
        const auto result = subset_curve(cfg, {7}, 4);
        REQUIRE(result.per_size.size() == 1);
        const auto& s = result.per_size.front();
        for (double v : s.relative_errors) REQUIRE(v == s.relative_errors.front());
        REQUIRE(s.median == s.q25);
        REQUIRE(s.median == s.q75);
    }
    SECTION("k = 1 medians equal sampled fixed-strategy relative errors") {
        const auto result = subset_curve(cfg, {1}, 6);
        const auto run = run_repeat(cfg, cfg.base_seed);
        std::vector<double> fixed_rels;
        for (int c = 0; c < run.set.size(); ++c)
            fixed_rels.push_back(run.report.columns[static_cast<std::size_t>(c)].relative_mse);
        for (double v : result.per_size.front().relative_errors) {
            bool found = false;
            for (double r : fixed_rels)
                if (std::abs(r - v) < 1e-12) found = true;
            REQUIRE(found);
        }
    }
    SECTION("out-of-range size rejected") {
        REQUIRE_THROWS_AS(subset_curve(cfg, {99}, 2), InvalidParameterError);
    }
    SECTION("restricted pools shrink the candidate list") {
        auto no_rec = cfg;
        no_rec.subset.pool = "no-recursive";
        const auto result = subset_curve(no_rec, {1}, 2);
        REQUIRE(result.pool_names == std::vector<std::string>{"mo", "d1", "dirrec", "d2"});
        auto direct = cfg;
        direct.subset.pool = "direct-only";
        REQUIRE(subset_curve(direct, {1}, 2).pool_names == std::vector<std::string>{"mo", "d1", "dirrec", "d2"});
    }
}

TEST_CASE("subset-oracle monotonicity", "[harness][subset][property]") {
    // oracle over a superset is never worse than over its subset, per instance
    auto cfg = tiny_config();
    cfg.repeats = 1;
    const auto outcome = run_repeat(cfg, 3);
    const auto& lm = outcome.eval_losses;
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> all(static_cast<std::size_t>(outcome.set.size()));
        for (int i = 0; i < outcome.set.size(); ++i) all[static_cast<std::size_t>(i)] = i;
        rng.shuffle(all);
        const int k_small = 1 + static_cast<int>(rng.below(3));
        const int k_big = k_small + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(outcome.set.size() - k_small)));
        std::vector<int> small(all.begin(), all.begin() + k_small);
        std::vector<int> big(all.begin(), all.begin() + k_big);  // superset of small
        for (int i = 0; i < outcome.eval.size(); ++i) {
            double min_small = std::numeric_limits<double>::infinity(), min_big = min_small;
            for (int c : small) min_small = std::min(min_small, lm.losses(i, c));
            for (int c : big) min_big = std::min(min_big, lm.losses(i, c));
            REQUIRE(min_big <= min_small);
        }
    }
}

TEST_CASE("ablation on a small task", "[harness][ablate]") {
    auto cfg = tiny_config();
    cfg.classifiers.resize(2);
    cfg.classifiers[1].kind = ClassifierKind::ts_forest;
    cfg.classifiers[1].forest.n_trees = 10;
    const auto run = run_experiment(cfg);
    const auto ab = ablate_gstar(run);
    REQUIRE(ab.repeats.size() == run.repeats.size());
    for (std::size_t r = 0; r < ab.repeats.size(); ++r) {
        const auto& rep = ab.repeats[r];
        REQUIRE(rep.gstar_relative >= 1.0 - 1e-12);
        REQUIRE(rep.ablated_relative >= 1.0 - 1e-12);
        // the ablated pool's oracle cannot beat the full pool's oracle
        const auto& outcome = run.repeats[r];
        const int g = outcome.report.gstar_index;
        double full_oracle = 0.0, ablated_oracle = 0.0;
        for (int i = 0; i < outcome.eval.size(); ++i) {
            double mfull = std::numeric_limits<double>::infinity(), mabl = mfull;
            for (int c = 0; c < outcome.set.size(); ++c) {
                mfull = std::min(mfull, outcome.eval_losses.losses(i, c));
                if (c != g) mabl = std::min(mabl, outcome.eval_losses.losses(i, c));
            }
            full_oracle += mfull;
            ablated_oracle += mabl;
        }
        REQUIRE(full_oracle <= ablated_oracle);
    }

    SECTION("two-strategy pool: ablated selector equals the remaining strategy") {
        auto duo = cfg;
        duo.strategy_filter = {"mo", "d1"};
        duo.repeats = 1;
        const auto run2 = run_experiment(duo);
        const auto ab2 = ablate_gstar(run2);
        const int g = run2.repeats.front().report.gstar_index;
        const int other = 1 - g;
        REQUIRE(ab2.repeats.front().ablated_relative ==
                Catch::Approx(run2.repeats.front().report.columns[static_cast<std::size_t>(other)].relative_mse));
    }
}

TEST_CASE("selector holdout mode keeps splits disjoint", "[harness]") {
    auto cfg = tiny_config();
    cfg.repeats = 1;
    cfg.selector_holdout_fraction = 0.25;
    const auto outcome = run_repeat(cfg, 7);
    REQUIRE(outcome.selector_inputs.rows() > 0);
    REQUIRE(outcome.train.size() + static_cast<int>(outcome.selector_inputs.rows()) <=
            static_cast<int>((1.0 - cfg.eval_fraction) * (cfg.dataset.n - cfg.window() - cfg.horizon + 1)) + 1);
}
