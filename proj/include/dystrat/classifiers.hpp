#pragma once

#include "dystrat/common.hpp"
#include "dystrat/mlp.hpp"
#include "dystrat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace dystrat {

enum class ClassifierKind { linear, mlp, knn, ts_forest };

inline const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::linear: return "linear";
        case ClassifierKind::mlp: return "mlp";
        case ClassifierKind::knn: return "knn";
        case ClassifierKind::ts_forest: return "tsf";
    }
    return "?";
}

inline ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "linear") return ClassifierKind::linear;
    if (s == "mlp") return ClassifierKind::mlp;
    if (s == "knn") return ClassifierKind::knn;
    if (s == "tsf" || s == "ts-forest" || s == "ts_forest") return ClassifierKind::ts_forest;
    throw InvalidParameterError("unknown classifier kind '" + s + "'");
}

struct LinearClassifierParams {
    double learning_rate = 0.05;
    int epochs = 200;
    double l2 = 1e-4;
};

struct MlpClassifierParams {
    int hidden_width = 100;
    double learning_rate = 1e-3;
    int epochs = 200;
};

struct KnnParams {
    int k = 5;  // euclidean distance
};

struct TsForestParams {
    int n_trees = 100;
    int n_intervals = 0;  // 0 -> ceil(sqrt(w))
    int min_interval_length = 3;
    int max_depth = 0;  // 0 -> unlimited
    int min_leaf = 1;
};

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::ts_forest;
    LinearClassifierParams linear;
    MlpClassifierParams mlp;
    KnnParams knn;
    TsForestParams forest;
    std::uint64_t seed = 0;
};

struct Interval {
    int start = 0;
    int end = 0;  // exclusive

    int length() const { return end - start; }
};

/// Interval summary features: (mean, population standard deviation, least-squares
/// slope) per interval, concatenated in interval order.
inline Vector tsf_features(const Eigen::Ref<const Vector>& x, const std::vector<Interval>& intervals) {
    Vector out(3 * static_cast<Eigen::Index>(intervals.size()));
    Eigen::Index at = 0;
    for (const auto& iv : intervals) {
        if (iv.start < 0 || iv.end > x.size() || iv.length() < 1)
            throw InvalidParameterError("tsf_features: interval [" + std::to_string(iv.start) + "," +
                                        std::to_string(iv.end) + ") out of range for window of " +
                                        std::to_string(x.size()));
        const auto n = static_cast<double>(iv.length());
        const auto seg = x.segment(iv.start, iv.length());
        const double mean = seg.mean();
        const double var = (seg.array() - mean).square().sum() / n;
        double slope = 0.0;
        if (iv.length() > 1) {
            // positions 0..n-1; slope = cov(t, y) / var(t)
            const double tmean = (n - 1.0) / 2.0;
            double cov = 0.0;
            for (int t = 0; t < iv.length(); ++t) cov += (t - tmean) * (seg(t) - mean);
            const double tvar = n * (n * n - 1.0) / 12.0;
            slope = cov / tvar;
        }
        out(at++) = mean;
        out(at++) = std::sqrt(var);
        out(at++) = slope;
    }
    return out;
}

namespace detail {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
};

struct Tree {
    std::vector<Interval> intervals;
    std::vector<TreeNode> nodes;

    int predict(const Eigen::Ref<const Vector>& window) const {
        const Vector f = tsf_features(window, intervals);
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(at)];
            at = f(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(at)].leaf_class;
    }
};

inline int majority_class(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

/// Greedy CART with Gini impurity. Ties are resolved toward the first
/// (feature, threshold) encountered, scanning features in ascending order.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& features, const std::vector<int>& labels, int n_classes, const TsForestParams& params)
        : features_(features), labels_(labels), n_classes_(n_classes), params_(params) {}

    std::vector<TreeNode> build() {
        std::vector<int> idx(static_cast<std::size_t>(features_.rows()));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        nodes_.clear();
        grow(idx, 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<int>& idx, int depth) {
        std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
        for (int i : idx) ++counts[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])];
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        const bool pure = *std::max_element(counts.begin(), counts.end()) == static_cast<int>(idx.size());
        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        if (pure || depth_capped || static_cast<int>(idx.size()) < 2 * params_.min_leaf) {
            nodes_[static_cast<std::size_t>(node_id)].leaf_class = majority_class(counts);
            return node_id;
        }

        int best_feature = -1;
        double best_threshold = 0.0, best_score = std::numeric_limits<double>::infinity();
        std::vector<int> order = idx;
        std::vector<double> left_counts(static_cast<std::size_t>(n_classes_));
        const double total = static_cast<double>(idx.size());

        for (int f = 0; f < features_.cols(); ++f) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = features_(a, f), vb = features_(b, f);
                return va < vb || (va == vb && a < b);
            });
            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            std::vector<double> right_counts(counts.begin(), counts.end());
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                const int lab = labels_[static_cast<std::size_t>(order[pos])];
                left_counts[static_cast<std::size_t>(lab)] += 1.0;
                right_counts[static_cast<std::size_t>(lab)] -= 1.0;
                const double va = features_(order[pos], f), vb = features_(order[pos + 1], f);
                if (va == vb) continue;
                const double nl = static_cast<double>(pos + 1), nr = total - nl;
                if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
                double gl = 1.0, gr = 1.0;
                for (int c = 0; c < n_classes_; ++c) {
                    const double pl = left_counts[static_cast<std::size_t>(c)] / nl;
                    const double pr = right_counts[static_cast<std::size_t>(c)] / nr;
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double score = (nl * gl + nr * gr) / total;
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (va + vb);
                }
            }
        }

        if (best_feature < 0) {
            nodes_[static_cast<std::size_t>(node_id)].leaf_class = majority_class(counts);
            return node_id;
        }

        std::vector<int> left, right;
        for (int i : idx) (features_(i, best_feature) <= best_threshold ? left : right).push_back(i);
        nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = grow(left, depth + 1);
        nodes_[static_cast<std::size_t>(node_id)].left = l;
        const int r = grow(right, depth + 1);
        nodes_[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    const Matrix& features_;
    const std::vector<int>& labels_;
    int n_classes_;
    TsForestParams params_;
    std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// A fitted strategy classifier. `select` maps a window to a class index in
/// [0, n_classes); every tie inside a vote or score comparison resolves to the
/// lowest index so selection is deterministic.
class TrainedSelector {
public:
    ClassifierKind kind() const { return kind_; }
    int n_classes() const { return n_classes_; }
    int input_dim() const { return input_dim_; }
    bool is_constant() const { return constant_class_ >= 0; }
    int constant_class() const { return constant_class_; }

    int select(const Eigen::Ref<const Vector>& x) const {
        if (x.size() != input_dim_)
            throw InvalidInputError("select: expected window of " + std::to_string(input_dim_) + ", got " +
                                    std::to_string(x.size()));
        if (constant_class_ >= 0) return constant_class_;
        switch (kind_) {
            case ClassifierKind::linear: {
                Vector scores = linear_w_.transpose() * x + linear_b_;
                int best = 0;
                for (int c = 1; c < n_classes_; ++c)
                    if (scores(c) > scores(best)) best = c;
                return best;
            }
            case ClassifierKind::mlp: {
                Vector h = (net_.w1.transpose() * x + net_.b1).cwiseMax(0.0);
                Vector scores = net_.w2.transpose() * h + net_.b2;
                int best = 0;
                for (int c = 1; c < n_classes_; ++c)
                    if (scores(c) > scores(best)) best = c;
                return best;
            }
            case ClassifierKind::knn: {
                const int n = static_cast<int>(knn_x_.rows());
                const int k = std::min(knn_k_, n);
                std::vector<std::pair<double, int>> dists(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i)
                    dists[static_cast<std::size_t>(i)] = {(knn_x_.row(i).transpose() - x).squaredNorm(), i};
                std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
                std::vector<int> votes(static_cast<std::size_t>(n_classes_), 0);
                for (int i = 0; i < k; ++i)
                    ++votes[static_cast<std::size_t>(knn_labels_[static_cast<std::size_t>(dists[i].second)])];
                return detail::majority_class(votes);
            }
            case ClassifierKind::ts_forest: {
                std::vector<int> votes(static_cast<std::size_t>(n_classes_), 0);
                for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(x))];
                return detail::majority_class(votes);
            }
        }
        throw InvalidInputError("select: unknown classifier kind");
    }

    // fitted-state accessors for serialization
    const Matrix& linear_weights() const { return linear_w_; }
    const Vector& linear_bias() const { return linear_b_; }
    const detail::TwoLayerNet& mlp_net() const { return net_; }
    const Matrix& knn_inputs() const { return knn_x_; }
    const std::vector<int>& knn_labels() const { return knn_labels_; }
    int knn_k() const { return knn_k_; }
    const std::vector<detail::Tree>& trees() const { return trees_; }

    static TrainedSelector make_linear(Matrix w, Vector b, int input_dim) {
        TrainedSelector s;
        s.kind_ = ClassifierKind::linear;
        s.linear_w_ = std::move(w);
        s.linear_b_ = std::move(b);
        s.input_dim_ = input_dim;
        s.n_classes_ = static_cast<int>(s.linear_b_.size());
        return s;
    }
    static TrainedSelector make_mlp(detail::TwoLayerNet net, int input_dim) {
        TrainedSelector s;
        s.kind_ = ClassifierKind::mlp;
        s.net_ = std::move(net);
        s.input_dim_ = input_dim;
        s.n_classes_ = static_cast<int>(s.net_.w2.cols());
        return s;
    }
    static TrainedSelector make_knn(Matrix x, std::vector<int> labels, int k, int n_classes) {
        TrainedSelector s;
        s.kind_ = ClassifierKind::knn;
        s.input_dim_ = static_cast<int>(x.cols());
        s.knn_x_ = std::move(x);
        s.knn_labels_ = std::move(labels);
        s.knn_k_ = k;
        s.n_classes_ = n_classes;
        return s;
    }
    static TrainedSelector make_forest(std::vector<detail::Tree> trees, int input_dim, int n_classes) {
        TrainedSelector s;
        s.kind_ = ClassifierKind::ts_forest;
        s.trees_ = std::move(trees);
        s.input_dim_ = input_dim;
        s.n_classes_ = n_classes;
        return s;
    }
    static TrainedSelector make_constant(ClassifierKind kind, int cls, int input_dim, int n_classes) {
        TrainedSelector s;
        s.kind_ = kind;
        s.constant_class_ = cls;
        s.input_dim_ = input_dim;
        s.n_classes_ = n_classes;
        return s;
    }

private:
    ClassifierKind kind_ = ClassifierKind::linear;
    int constant_class_ = -1;
    int n_classes_ = 0;
    int input_dim_ = 0;
    Matrix linear_w_;  // d x C
    Vector linear_b_;
    detail::TwoLayerNet net_;
    Matrix knn_x_;
    std::vector<int> knn_labels_;
    int knn_k_ = 1;
    std::vector<detail::Tree> trees_;
};

namespace detail {

inline TrainedSelector fit_linear(const Matrix& x, const std::vector<int>& labels, int n_classes,
                                  const LinearClassifierParams& p, std::uint64_t seed) {
    // one-vs-rest logistic regression, all classes updated jointly by full-batch adam
    const int l = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Matrix w = Matrix::Zero(d, n_classes);
    Vector b = Vector::Zero(n_classes);
    Matrix onehot = Matrix::Zero(l, n_classes);
    for (int i = 0; i < l; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    Matrix mw = Matrix::Zero(d, n_classes), vw = Matrix::Zero(d, n_classes);
    Vector mb = Vector::Zero(n_classes), vb = Vector::Zero(n_classes);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double inv = 1.0 / static_cast<double>(l);
    (void)seed;  // zero-initialized weights; fit is already deterministic

    for (int t = 1; t <= p.epochs; ++t) {
        Matrix scores = x * w;
        scores.rowwise() += b.transpose();
        Matrix prob = (1.0 + (-scores.array()).exp()).inverse().matrix();
        prob -= onehot;
        Matrix gw = (x.transpose() * prob + p.l2 * w) * inv;
        Vector gb = prob.colwise().sum() * inv;
        const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
        mw = beta1 * mw + (1.0 - beta1) * gw;
        vw = beta2 * vw + (1.0 - beta2) * gw.cwiseProduct(gw);
        w -= (p.learning_rate / c1) * (mw.array() / ((vw.array() / c2).sqrt() + eps)).matrix();
        mb = beta1 * mb + (1.0 - beta1) * gb;
        vb = beta2 * vb + (1.0 - beta2) * gb.cwiseProduct(gb);
        b -= (p.learning_rate / c1) * (mb.array() / ((vb.array() / c2).sqrt() + eps)).matrix();
    }
    return TrainedSelector::make_linear(std::move(w), std::move(b), d);
}

inline TrainedSelector fit_mlp_classifier(const Matrix& x, const std::vector<int>& labels, int n_classes,
                                          const MlpClassifierParams& p, std::uint64_t seed) {
    const int l = static_cast<int>(x.rows());
    Matrix onehot = Matrix::Zero(l, n_classes);
    for (int i = 0; i < l; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    MlpConfig cfg;
    cfg.hidden_width = p.hidden_width;
    cfg.learning_rate = p.learning_rate;
    cfg.max_epochs = p.epochs;
    cfg.seed = seed;

    auto softmax_head = [](Matrix& out, const Eigen::Ref<const Matrix>& yb) -> double {
        double loss = 0.0;
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            const double mx = out.row(r).maxCoeff();
            out.row(r) = (out.row(r).array() - mx).exp();
            out.row(r) /= out.row(r).sum();
            for (Eigen::Index c = 0; c < out.cols(); ++c)
                if (yb(r, c) == 1.0) loss -= std::log(std::max(out(r, c), 1e-300));
            out.row(r) -= yb.row(r);
        }
        return loss;
    };
    auto outcome = train_two_layer(x, onehot, cfg, softmax_head);
    return TrainedSelector::make_mlp(std::move(outcome.net), static_cast<int>(x.cols()));
}

inline TrainedSelector fit_ts_forest(const Matrix& x, const std::vector<int>& labels, int n_classes,
                                     const TsForestParams& p, std::uint64_t seed) {
    const int w = static_cast<int>(x.cols());
    if (p.min_interval_length > w)
        throw InvalidParameterError("ts-forest: min interval length exceeds window length");
    if (p.n_trees < 1) throw InvalidParameterError("ts-forest: need at least one tree");
    const int n_intervals =
        p.n_intervals > 0 ? p.n_intervals : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(w))));

    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(p.n_trees));
    for (int t = 0; t < p.n_trees; ++t) {
        Rng rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
        Tree tree;
        tree.intervals.reserve(static_cast<std::size_t>(n_intervals));
        for (int i = 0; i < n_intervals; ++i) {
            const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - p.min_interval_length + 1)));
            const int max_len = w - start;
            const int len =
                p.min_interval_length +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - p.min_interval_length + 1)));
            tree.intervals.push_back({start, start + len});
        }
        Matrix feats(x.rows(), 3 * n_intervals);
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            feats.row(r) = tsf_features(x.row(r).transpose(), tree.intervals).transpose();
        TreeBuilder builder(feats, labels, n_classes, p);
        tree.nodes = builder.build();
        trees.push_back(std::move(tree));
    }
    return TrainedSelector::make_forest(std::move(trees), w, n_classes);
}

}  // namespace detail

}  // namespace dystrat
