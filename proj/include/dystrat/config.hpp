#pragma once

#include "dystrat/classifiers.hpp"
#include "dystrat/metrics.hpp"
#include "dystrat/mlp.hpp"
#include "dystrat/serialize.hpp"
#include "dystrat/series.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dystrat {

enum class DatasetKind { mackey_glass, lorenz, noisy_sine, csv };

inline const char* to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::mackey_glass: return "mackey-glass";
        case DatasetKind::lorenz: return "lorenz";
        case DatasetKind::noisy_sine: return "sine";
        case DatasetKind::csv: return "csv";
    }
    return "?";
}

inline DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "mackey-glass" || s == "mackey_glass" || s == "mg") return DatasetKind::mackey_glass;
    if (s == "lorenz") return DatasetKind::lorenz;
    if (s == "sine" || s == "noisy-sine") return DatasetKind::noisy_sine;
    if (s == "csv") return DatasetKind::csv;
    throw InvalidParameterError("unknown dataset '" + s + "'");
}

struct DatasetConfig {
    DatasetKind kind = DatasetKind::mackey_glass;
    int n = 10000;
    MackeyGlassParams mg;
    LorenzParams lorenz;
    double sine_period = 50.0;
    double sine_noise = 0.05;
    std::string csv_path;
    std::string csv_column = "0";

    TimeSeries make(std::uint64_t seed) const {
        switch (kind) {
            case DatasetKind::mackey_glass: return generate_mackey_glass(n, mg, seed);
            case DatasetKind::lorenz: return generate_lorenz(n, lorenz, seed);
            case DatasetKind::noisy_sine: return generate_noisy_sine(n, sine_period, sine_noise, seed);
            case DatasetKind::csv: return load_csv(csv_path, csv_column);
        }
        throw InvalidParameterError("unknown dataset kind");
    }
};

struct SubsetCurveConfig {
    std::vector<int> sizes;
    int samples_per_size = 30;
    /// Candidate pool: "all", "no-recursive" (drops r-sigma columns), or
    /// "direct-only" (mo, d-sigma, dirrec).
    std::string pool = "all";
};

struct ExperimentConfig {
    DatasetConfig dataset;
    int horizon = 20;
    double window_multiplier = 2.0;  // w = round(W * H)
    double train_fraction = 0.75;
    double eval_fraction = 0.10;
    MlpConfig mlp;  // seed is re-derived per repeat
    std::vector<ClassifierConfig> classifiers = default_classifiers();
    std::vector<Metric> metrics = {Metric::mse, Metric::mae, Metric::smape, Metric::maxerr};
    Metric label_metric = Metric::mse;
    int repeats = 5;
    std::uint64_t base_seed = 1;
    std::vector<std::string> strategy_filter;
    bool normalize_train_range_only = false;
    double selector_holdout_fraction = 0.0;
    std::string gstar_split = "eval";  // or "train"
    SubsetCurveConfig subset;
    bool ablate_gstar = false;

    int window() const { return std::max(1, static_cast<int>(std::lround(window_multiplier * horizon))); }

    static std::vector<ClassifierConfig> default_classifiers() {
        std::vector<ClassifierConfig> out(4);
        out[0].kind = ClassifierKind::linear;
        out[1].kind = ClassifierKind::mlp;
        out[2].kind = ClassifierKind::knn;
        out[3].kind = ClassifierKind::ts_forest;
        return out;
    }
};

namespace serialize {

inline Json to_json(const DatasetConfig& d) {
    Json j{{"kind", to_string(d.kind)}, {"n", d.n}};
    switch (d.kind) {
        case DatasetKind::mackey_glass:
            j["tau"] = d.mg.tau;
            j["beta"] = d.mg.beta;
            j["gamma"] = d.mg.gamma;
            j["exponent"] = d.mg.exponent;
            j["dt"] = d.mg.dt;
            if (std::isfinite(d.mg.history_value)) j["history_value"] = d.mg.history_value;
            if (d.mg.burn_in >= 0.0) j["burn_in"] = d.mg.burn_in;
            break;
        case DatasetKind::lorenz:
            j["sigma"] = d.lorenz.sigma;
            j["rho"] = d.lorenz.rho;
            j["beta"] = d.lorenz.beta;
            j["dt"] = d.lorenz.dt;
            j["sample_every"] = d.lorenz.sample_every;
            j["burn_in"] = d.lorenz.burn_in;
            break;
        case DatasetKind::noisy_sine:
            j["period"] = d.sine_period;
            j["noise_fraction"] = d.sine_noise;
            break;
        case DatasetKind::csv:
            j["path"] = d.csv_path;
            j["column"] = d.csv_column;
            break;
    }
    return j;
}

inline DatasetConfig dataset_config_from_json(const Json& j) {
    DatasetConfig d;
    d.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
    d.n = j.value("n", 10000);
    switch (d.kind) {
        case DatasetKind::mackey_glass:
            d.mg.tau = j.value("tau", d.mg.tau);
            d.mg.beta = j.value("beta", d.mg.beta);
            d.mg.gamma = j.value("gamma", d.mg.gamma);
            d.mg.exponent = j.value("exponent", d.mg.exponent);
            d.mg.dt = j.value("dt", d.mg.dt);
            if (j.contains("history_value")) d.mg.history_value = j.at("history_value").get<double>();
            if (j.contains("burn_in")) d.mg.burn_in = j.at("burn_in").get<double>();
            break;
        case DatasetKind::lorenz:
            d.lorenz.sigma = j.value("sigma", d.lorenz.sigma);
            d.lorenz.rho = j.value("rho", d.lorenz.rho);
            d.lorenz.beta = j.value("beta", d.lorenz.beta);
            d.lorenz.dt = j.value("dt", d.lorenz.dt);
            d.lorenz.sample_every = j.value("sample_every", d.lorenz.sample_every);
            d.lorenz.burn_in = j.value("burn_in", d.lorenz.burn_in);
            break;
        case DatasetKind::noisy_sine:
            d.sine_period = j.value("period", d.sine_period);
            d.sine_noise = j.value("noise_fraction", d.sine_noise);
            break;
        case DatasetKind::csv:
            d.csv_path = j.at("path").get<std::string>();
            d.csv_column = j.value("column", std::string("0"));
            break;
    }
    return d;
}

inline Json to_json(const ClassifierConfig& c) {
    Json j{{"kind", to_string(c.kind)}, {"seed", c.seed}};
    switch (c.kind) {
        case ClassifierKind::linear:
            j["learning_rate"] = c.linear.learning_rate;
            j["epochs"] = c.linear.epochs;
            j["l2"] = c.linear.l2;
            break;
        case ClassifierKind::mlp:
            j["hidden_width"] = c.mlp.hidden_width;
            j["learning_rate"] = c.mlp.learning_rate;
            j["epochs"] = c.mlp.epochs;
            break;
        case ClassifierKind::knn:
            j["k"] = c.knn.k;
            j["metric"] = "euclidean";
            break;
        case ClassifierKind::ts_forest:
            j["n_trees"] = c.forest.n_trees;
            j["n_intervals"] = c.forest.n_intervals;
            j["min_interval_length"] = c.forest.min_interval_length;
            j["max_depth"] = c.forest.max_depth;
            j["min_leaf"] = c.forest.min_leaf;
            break;
    }
    return j;
}

inline ClassifierConfig classifier_config_from_json(const Json& j) {
    ClassifierConfig c;
    c.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    switch (c.kind) {
        case ClassifierKind::linear:
            c.linear.learning_rate = j.value("learning_rate", c.linear.learning_rate);
            c.linear.epochs = j.value("epochs", c.linear.epochs);
            c.linear.l2 = j.value("l2", c.linear.l2);
            break;
        case ClassifierKind::mlp:
            c.mlp.hidden_width = j.value("hidden_width", c.mlp.hidden_width);
            c.mlp.learning_rate = j.value("learning_rate", c.mlp.learning_rate);
            c.mlp.epochs = j.value("epochs", c.mlp.epochs);
            break;
        case ClassifierKind::knn:
            c.knn.k = j.value("k", c.knn.k);
            break;
        case ClassifierKind::ts_forest:
            c.forest.n_trees = j.value("n_trees", c.forest.n_trees);
            c.forest.n_intervals = j.value("n_intervals", c.forest.n_intervals);
            c.forest.min_interval_length = j.value("min_interval_length", c.forest.min_interval_length);
            c.forest.max_depth = j.value("max_depth", c.forest.max_depth);
            c.forest.min_leaf = j.value("min_leaf", c.forest.min_leaf);
            break;
    }
    return c;
}

inline Json to_json(const ExperimentConfig& cfg) {
    Json classifiers = Json::array();
    for (const auto& c : cfg.classifiers) classifiers.push_back(to_json(c));
    Json metrics = Json::array();
    for (Metric m : cfg.metrics) metrics.push_back(to_string(m));
    Json j{{"dataset", to_json(cfg.dataset)},
           {"horizon", cfg.horizon},
           {"window_multiplier", cfg.window_multiplier},
           {"train_fraction", cfg.train_fraction},
           {"eval_fraction", cfg.eval_fraction},
           {"mlp", to_json(cfg.mlp)},
           {"classifiers", std::move(classifiers)},
           {"metrics", std::move(metrics)},
           {"label_metric", to_string(cfg.label_metric)},
           {"repeats", cfg.repeats},
           {"base_seed", cfg.base_seed},
           {"strategy_filter", cfg.strategy_filter},
           {"normalize_train_range_only", cfg.normalize_train_range_only},
           {"selector_holdout_fraction", cfg.selector_holdout_fraction},
           {"gstar_split", cfg.gstar_split},
           {"ablate_gstar", cfg.ablate_gstar}};
    if (!cfg.subset.sizes.empty())
        j["subset_curve"] = Json{{"sizes", cfg.subset.sizes},
                                 {"samples_per_size", cfg.subset.samples_per_size},
                                 {"pool", cfg.subset.pool}};
    return j;
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig cfg;
    cfg.dataset = dataset_config_from_json(j.at("dataset"));
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.window_multiplier = j.value("window_multiplier", cfg.window_multiplier);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.eval_fraction = j.value("eval_fraction", cfg.eval_fraction);
    if (j.contains("mlp")) cfg.mlp = mlp_config_from_json(j.at("mlp"));
    if (j.contains("classifiers")) {
        cfg.classifiers.clear();
        for (const auto& c : j.at("classifiers")) cfg.classifiers.push_back(classifier_config_from_json(c));
    }
    if (j.contains("metrics")) {
        cfg.metrics.clear();
        for (const auto& m : j.at("metrics")) cfg.metrics.push_back(metric_from_string(m.get<std::string>()));
    }
    cfg.label_metric = metric_from_string(j.value("label_metric", std::string("mse")));
    cfg.repeats = j.value("repeats", cfg.repeats);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.strategy_filter = j.value("strategy_filter", cfg.strategy_filter);
    cfg.normalize_train_range_only = j.value("normalize_train_range_only", false);
    cfg.selector_holdout_fraction = j.value("selector_holdout_fraction", 0.0);
    cfg.gstar_split = j.value("gstar_split", std::string("eval"));
    cfg.ablate_gstar = j.value("ablate_gstar", false);
    if (j.contains("subset_curve")) {
        cfg.subset.sizes = j.at("subset_curve").at("sizes").get<std::vector<int>>();
        cfg.subset.samples_per_size = j.at("subset_curve").value("samples_per_size", 30);
        cfg.subset.pool = j.at("subset_curve").value("pool", std::string("all"));
    }
    return cfg;
}

}  // namespace serialize

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return serialize::to_json(a) == serialize::to_json(b);
}

/// Stable hash of the canonical config serialization; embedded in output names.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return detail::fnv1a(serialize::to_json(cfg).dump());
}

inline std::string config_hash_hex(const ExperimentConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    return std::string(buf, 8);  // first 8 hex chars are plenty for filenames
}

// ---------------------------------------------------------------------------
// Config file parsing: flat "key = value" lines with [section] headers.
// Sections: top level, [dataset], [mlp], [classifier.<kind>], [subset_curve].
// '#' or ';' start comments. CLI flags override file keys.
// ---------------------------------------------------------------------------

namespace detail {

struct IniData {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& section, const std::string& key) const {
        return sections.at(section).at(key);
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline IniData parse_ini(std::istream& in) {
    IniData data;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidParameterError("config line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            data.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParameterError("config line " + std::to_string(line_no) + ": expected key = value");
        data.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return data;
}

inline double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidParameterError("config key '" + key + "': cannot parse '" + v + "' as a number");
    }
}

inline int to_int(const std::string& v, const std::string& key) {
    const double d = to_double(v, key);
    return static_cast<int>(std::llround(d));
}

inline bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidParameterError("config key '" + key + "': cannot parse '" + v + "' as a boolean");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& in) {
    const auto ini = detail::parse_ini(in);
    ExperimentConfig cfg;

    auto top = [&](const std::string& key) { return ini.has("", key); };
    if (top("horizon")) cfg.horizon = detail::to_int(ini.get("", "horizon"), "horizon");
    if (top("window_multiplier"))
        cfg.window_multiplier = detail::to_double(ini.get("", "window_multiplier"), "window_multiplier");
    if (top("train_fraction")) cfg.train_fraction = detail::to_double(ini.get("", "train_fraction"), "train_fraction");
    if (top("eval_fraction")) cfg.eval_fraction = detail::to_double(ini.get("", "eval_fraction"), "eval_fraction");
    if (top("repeats")) cfg.repeats = detail::to_int(ini.get("", "repeats"), "repeats");
    if (top("base_seed")) cfg.base_seed = static_cast<std::uint64_t>(detail::to_double(ini.get("", "base_seed"), "base_seed"));
    if (top("metrics")) {
        cfg.metrics.clear();
        for (const auto& m : detail::split_list(ini.get("", "metrics"))) cfg.metrics.push_back(metric_from_string(m));
    }
    if (top("label_metric")) cfg.label_metric = metric_from_string(ini.get("", "label_metric"));
    if (top("strategy_filter")) cfg.strategy_filter = detail::split_list(ini.get("", "strategy_filter"));
    if (top("normalize_train_range_only"))
        cfg.normalize_train_range_only =
            detail::to_bool(ini.get("", "normalize_train_range_only"), "normalize_train_range_only");
    if (top("selector_holdout_fraction"))
        cfg.selector_holdout_fraction =
            detail::to_double(ini.get("", "selector_holdout_fraction"), "selector_holdout_fraction");
    if (top("gstar_split")) cfg.gstar_split = ini.get("", "gstar_split");
    if (top("ablate_gstar")) cfg.ablate_gstar = detail::to_bool(ini.get("", "ablate_gstar"), "ablate_gstar");

    if (ini.sections.count("dataset")) {
        const auto& d = ini.sections.at("dataset");
        auto get = [&](const char* key) { return d.count(key) ? d.at(key) : std::string(); };
        if (d.count("kind")) cfg.dataset.kind = dataset_kind_from_string(d.at("kind"));
        if (d.count("n")) cfg.dataset.n = detail::to_int(d.at("n"), "dataset.n");
        switch (cfg.dataset.kind) {
            case DatasetKind::mackey_glass:
                if (d.count("tau")) cfg.dataset.mg.tau = detail::to_double(get("tau"), "tau");
                if (d.count("beta")) cfg.dataset.mg.beta = detail::to_double(get("beta"), "beta");
                if (d.count("gamma")) cfg.dataset.mg.gamma = detail::to_double(get("gamma"), "gamma");
                if (d.count("exponent")) cfg.dataset.mg.exponent = detail::to_double(get("exponent"), "exponent");
                if (d.count("dt")) cfg.dataset.mg.dt = detail::to_double(get("dt"), "dt");
                if (d.count("history_value"))
                    cfg.dataset.mg.history_value = detail::to_double(get("history_value"), "history_value");
                if (d.count("burn_in")) cfg.dataset.mg.burn_in = detail::to_double(get("burn_in"), "burn_in");
                break;
            case DatasetKind::lorenz:
                if (d.count("sigma")) cfg.dataset.lorenz.sigma = detail::to_double(get("sigma"), "sigma");
                if (d.count("rho")) cfg.dataset.lorenz.rho = detail::to_double(get("rho"), "rho");
                if (d.count("beta")) cfg.dataset.lorenz.beta = detail::to_double(get("beta"), "beta");
                if (d.count("dt")) cfg.dataset.lorenz.dt = detail::to_double(get("dt"), "dt");
                if (d.count("sample_every"))
                    cfg.dataset.lorenz.sample_every = detail::to_int(get("sample_every"), "sample_every");
                if (d.count("burn_in")) cfg.dataset.lorenz.burn_in = detail::to_double(get("burn_in"), "burn_in");
                break;
            case DatasetKind::noisy_sine:
                if (d.count("period")) cfg.dataset.sine_period = detail::to_double(get("period"), "period");
                if (d.count("noise_fraction"))
                    cfg.dataset.sine_noise = detail::to_double(get("noise_fraction"), "noise_fraction");
                break;
            case DatasetKind::csv:
                if (d.count("path")) cfg.dataset.csv_path = d.at("path");
                if (d.count("column")) cfg.dataset.csv_column = d.at("column");
                break;
        }
    }

    if (ini.sections.count("mlp")) {
        const auto& m = ini.sections.at("mlp");
        if (m.count("hidden_width")) cfg.mlp.hidden_width = detail::to_int(m.at("hidden_width"), "mlp.hidden_width");
        if (m.count("learning_rate"))
            cfg.mlp.learning_rate = detail::to_double(m.at("learning_rate"), "mlp.learning_rate");
        if (m.count("batch_size")) cfg.mlp.batch_size = detail::to_int(m.at("batch_size"), "mlp.batch_size");
        if (m.count("max_epochs")) cfg.mlp.max_epochs = detail::to_int(m.at("max_epochs"), "mlp.max_epochs");
        if (m.count("l2_penalty")) cfg.mlp.l2_penalty = detail::to_double(m.at("l2_penalty"), "mlp.l2_penalty");
        if (m.count("tolerance")) cfg.mlp.tolerance = detail::to_double(m.at("tolerance"), "mlp.tolerance");
        if (m.count("patience")) cfg.mlp.patience = detail::to_int(m.at("patience"), "mlp.patience");
    }

    if (ini.has("", "classifiers")) {
        cfg.classifiers.clear();
        for (const auto& kind : detail::split_list(ini.get("", "classifiers"))) {
            ClassifierConfig c;
            c.kind = classifier_kind_from_string(kind);
            cfg.classifiers.push_back(c);
        }
    }
    for (auto& c : cfg.classifiers) {
        const std::string section = std::string("classifier.") + to_string(c.kind);
        if (!ini.sections.count(section)) continue;
        const auto& s = ini.sections.at(section);
        switch (c.kind) {
            case ClassifierKind::linear:
                if (s.count("learning_rate"))
                    c.linear.learning_rate = detail::to_double(s.at("learning_rate"), section);
                if (s.count("epochs")) c.linear.epochs = detail::to_int(s.at("epochs"), section);
                if (s.count("l2")) c.linear.l2 = detail::to_double(s.at("l2"), section);
                break;
            case ClassifierKind::mlp:
                if (s.count("hidden_width")) c.mlp.hidden_width = detail::to_int(s.at("hidden_width"), section);
                if (s.count("learning_rate")) c.mlp.learning_rate = detail::to_double(s.at("learning_rate"), section);
                if (s.count("epochs")) c.mlp.epochs = detail::to_int(s.at("epochs"), section);
                break;
            case ClassifierKind::knn:
                if (s.count("k")) c.knn.k = detail::to_int(s.at("k"), section);
                break;
            case ClassifierKind::ts_forest:
                if (s.count("n_trees")) c.forest.n_trees = detail::to_int(s.at("n_trees"), section);
                if (s.count("n_intervals")) c.forest.n_intervals = detail::to_int(s.at("n_intervals"), section);
                if (s.count("min_interval_length"))
                    c.forest.min_interval_length = detail::to_int(s.at("min_interval_length"), section);
                if (s.count("max_depth")) c.forest.max_depth = detail::to_int(s.at("max_depth"), section);
                if (s.count("min_leaf")) c.forest.min_leaf = detail::to_int(s.at("min_leaf"), section);
                break;
        }
    }

    if (ini.sections.count("subset_curve")) {
        const auto& s = ini.sections.at("subset_curve");
        if (s.count("sizes")) {
            cfg.subset.sizes.clear();
            for (const auto& v : detail::split_list(s.at("sizes")))
                cfg.subset.sizes.push_back(detail::to_int(v, "subset_curve.sizes"));
        }
        if (s.count("samples_per_size"))
            cfg.subset.samples_per_size = detail::to_int(s.at("samples_per_size"), "subset_curve.samples_per_size");
        if (s.count("pool")) cfg.subset.pool = s.at("pool");
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_experiment_config(in);
}

}  // namespace dystrat
