#pragma once

#include "dystrat/classifiers.hpp"
#include "dystrat/mlp.hpp"
#include "dystrat/strategies.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace dystrat {

using Json = nlohmann::json;

namespace serialize {

inline Json to_json(const Matrix& m) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        data.push_back(std::move(row));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const Json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index jj = 0; jj < m.cols(); ++jj) m(i, jj) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)].get<double>();
    return m;
}

inline Json to_json(const Vector& v) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
    return data;
}

inline Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

inline Json to_json(const MlpConfig& cfg) {
    return Json{{"hidden_width", cfg.hidden_width},
                {"activation", "relu"},
                {"learning_rate", cfg.learning_rate},
                {"batch_size", cfg.batch_size},
                {"max_epochs", cfg.max_epochs},
                {"l2_penalty", cfg.l2_penalty},
                {"seed", cfg.seed},
                {"tolerance", cfg.tolerance},
                {"patience", cfg.patience}};
}

inline MlpConfig mlp_config_from_json(const Json& j) {
    MlpConfig cfg;
    cfg.hidden_width = j.at("hidden_width").get<int>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.max_epochs = j.at("max_epochs").get<int>();
    cfg.l2_penalty = j.at("l2_penalty").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.tolerance = j.at("tolerance").get<double>();
    cfg.patience = j.at("patience").get<int>();
    return cfg;
}

/// Self-describing regressor bundle: dims, config echo, seed, weights, loss curve.
inline Json to_json(const MlpRegressor& model) {
    return Json{{"format", "dystrat-mlp-v1"},
                {"input_dim", model.input_dim()},
                {"output_dim", model.output_dim()},
                {"config", to_json(model.config())},
                {"w1", to_json(model.net().w1)},
                {"b1", to_json(model.net().b1)},
                {"w2", to_json(model.net().w2)},
                {"b2", to_json(model.net().b2)},
                {"loss_curve", model.loss_curve()}};
}

inline MlpRegressor mlp_from_json(const Json& j) {
    if (j.at("format") != "dystrat-mlp-v1") throw IoError("unrecognized model bundle format");
    detail::TwoLayerNet net;
    net.w1 = matrix_from_json(j.at("w1"));
    net.b1 = vector_from_json(j.at("b1"));
    net.w2 = matrix_from_json(j.at("w2"));
    net.b2 = vector_from_json(j.at("b2"));
    return MlpRegressor(std::move(net), mlp_config_from_json(j.at("config")),
                        j.at("loss_curve").get<std::vector<double>>());
}

inline const char* kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::mo: return "mo";
        case StrategyKind::recmo: return "recmo";
        case StrategyKind::dirmo: return "dirmo";
        case StrategyKind::dirrec: return "dirrec";
        case StrategyKind::rectify: return "rectify";
    }
    return "?";
}

inline StrategyKind strategy_kind_from_name(const std::string& s) {
    if (s == "mo") return StrategyKind::mo;
    if (s == "recmo") return StrategyKind::recmo;
    if (s == "dirmo") return StrategyKind::dirmo;
    if (s == "dirrec") return StrategyKind::dirrec;
    if (s == "rectify") return StrategyKind::rectify;
    throw IoError("unknown strategy kind '" + s + "'");
}

inline Json to_json(const TrainedStrategy& s) {
    Json models = Json::array();
    for (const auto& m : s.models) models.push_back(to_json(m));
    return Json{{"kind", kind_name(s.spec.kind)},
                {"sigma", s.spec.sigma},
                {"display_name", s.spec.display_name},
                {"w", s.w},
                {"horizon", s.horizon},
                {"models", std::move(models)}};
}

inline TrainedStrategy strategy_from_json(const Json& j) {
    TrainedStrategy s;
    s.spec.kind = strategy_kind_from_name(j.at("kind").get<std::string>());
    s.spec.sigma = j.at("sigma").get<int>();
    s.spec.display_name = j.at("display_name").get<std::string>();
    s.w = j.at("w").get<int>();
    s.horizon = j.at("horizon").get<int>();
    for (const auto& m : j.at("models")) s.models.push_back(mlp_from_json(m));
    return s;
}

inline Json to_json(const StrategySet& set) {
    Json strategies = Json::array();
    for (const auto& s : set.strategies) strategies.push_back(to_json(s));
    return Json{{"format", "dystrat-strategy-set-v1"},
                {"w", set.w},
                {"horizon", set.horizon},
                {"fingerprint", set.fingerprint},
                {"strategies", std::move(strategies)}};
}

inline StrategySet strategy_set_from_json(const Json& j) {
    if (j.at("format") != "dystrat-strategy-set-v1") throw IoError("unrecognized strategy-set bundle format");
    StrategySet set;
    set.w = j.at("w").get<int>();
    set.horizon = j.at("horizon").get<int>();
    set.fingerprint = j.at("fingerprint").get<std::uint64_t>();
    for (const auto& s : j.at("strategies")) set.strategies.push_back(strategy_from_json(s));
    return set;
}

inline Json to_json(const detail::Tree& tree) {
    Json intervals = Json::array();
    for (const auto& iv : tree.intervals) intervals.push_back(Json{{"start", iv.start}, {"end", iv.end}});
    Json nodes = Json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back(Json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"leaf_class", n.leaf_class}});
    return Json{{"intervals", std::move(intervals)}, {"nodes", std::move(nodes)}};
}

inline detail::Tree tree_from_json(const Json& j) {
    detail::Tree tree;
    for (const auto& iv : j.at("intervals")) tree.intervals.push_back({iv.at("start").get<int>(), iv.at("end").get<int>()});
    for (const auto& n : j.at("nodes")) {
        detail::TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.leaf_class = n.at("leaf_class").get<int>();
        tree.nodes.push_back(node);
    }
    return tree;
}

/// Selector bundle co-stores the fingerprint of the strategy set it indexes into;
/// loading verifies the match.
inline Json to_json(const TrainedSelector& sel, std::uint64_t strategy_fingerprint) {
    Json j{{"format", "dystrat-selector-v1"},
           {"kind", to_string(sel.kind())},
           {"n_classes", sel.n_classes()},
           {"input_dim", sel.input_dim()},
           {"strategy_fingerprint", strategy_fingerprint}};
    if (sel.is_constant()) {
        j["constant_class"] = sel.constant_class();
        return j;
    }
    switch (sel.kind()) {
        case ClassifierKind::linear:
            j["weights"] = to_json(sel.linear_weights());
            j["bias"] = to_json(sel.linear_bias());
            break;
        case ClassifierKind::mlp:
            j["w1"] = to_json(sel.mlp_net().w1);
            j["b1"] = to_json(sel.mlp_net().b1);
            j["w2"] = to_json(sel.mlp_net().w2);
            j["b2"] = to_json(sel.mlp_net().b2);
            break;
        case ClassifierKind::knn:
            j["inputs"] = to_json(sel.knn_inputs());
            j["labels"] = sel.knn_labels();
            j["k"] = sel.knn_k();
            break;
        case ClassifierKind::ts_forest: {
            Json trees = Json::array();
            for (const auto& t : sel.trees()) trees.push_back(to_json(t));
            j["trees"] = std::move(trees);
            break;
        }
    }
    return j;
}

inline TrainedSelector selector_from_json(const Json& j, std::uint64_t expected_fingerprint) {
    if (j.at("format") != "dystrat-selector-v1") throw IoError("unrecognized selector bundle format");
    if (j.at("strategy_fingerprint").get<std::uint64_t>() != expected_fingerprint)
        throw IoError("selector bundle was fitted against a different strategy set (fingerprint mismatch)");
    const auto kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    const int n_classes = j.at("n_classes").get<int>();
    const int input_dim = j.at("input_dim").get<int>();
    if (j.contains("constant_class"))
        return TrainedSelector::make_constant(kind, j.at("constant_class").get<int>(), input_dim, n_classes);
    switch (kind) {
        case ClassifierKind::linear:
            return TrainedSelector::make_linear(matrix_from_json(j.at("weights")), vector_from_json(j.at("bias")),
                                                input_dim);
        case ClassifierKind::mlp: {
            detail::TwoLayerNet net;
            net.w1 = matrix_from_json(j.at("w1"));
            net.b1 = vector_from_json(j.at("b1"));
            net.w2 = matrix_from_json(j.at("w2"));
            net.b2 = vector_from_json(j.at("b2"));
            return TrainedSelector::make_mlp(std::move(net), input_dim);
        }
        case ClassifierKind::knn:
            return TrainedSelector::make_knn(matrix_from_json(j.at("inputs")), j.at("labels").get<std::vector<int>>(),
                                             j.at("k").get<int>(), n_classes);
        case ClassifierKind::ts_forest: {
            std::vector<detail::Tree> trees;
            for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
            return TrainedSelector::make_forest(std::move(trees), input_dim, n_classes);
        }
    }
    throw IoError("unknown selector kind");
}

inline void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(1) << '\n';
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    Json j;
    in >> j;
    return j;
}

}  // namespace serialize
}  // namespace dystrat
