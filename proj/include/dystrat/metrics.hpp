#pragma once

#include "dystrat/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dystrat {

enum class Metric { mse, mae, mape, smape, maxerr };

inline const char* to_string(Metric m) {
    switch (m) {
        case Metric::mse: return "mse";
        case Metric::mae: return "mae";
        case Metric::mape: return "mape";
        case Metric::smape: return "smape";
        case Metric::maxerr: return "maxerr";
    }
    return "?";
}

inline Metric metric_from_string(const std::string& s) {
    if (s == "mse") return Metric::mse;
    if (s == "mae") return Metric::mae;
    if (s == "mape") return Metric::mape;
    if (s == "smape") return Metric::smape;
    if (s == "maxerr" || s == "max") return Metric::maxerr;
    throw InvalidParameterError("unknown metric '" + s + "'");
}

struct PointMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double mape = 0.0;    // percent
    double smape = 0.0;   // percent, bounded by 200
    double maxerr = 0.0;

    double get(Metric m) const {
        switch (m) {
            case Metric::mse: return mse;
            case Metric::mae: return mae;
            case Metric::mape: return mape;
            case Metric::smape: return smape;
            case Metric::maxerr: return maxerr;
        }
        return 0.0;
    }
};

/// Per-instance error metrics between a target and a forecast of equal length.
/// MAPE and SMAPE guard their denominators with epsilon 1e-8.
inline PointMetrics point_metrics(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat) {
    if (y.size() != yhat.size() || y.size() < 1)
        throw InvalidInputError("point_metrics: length mismatch (" + std::to_string(y.size()) + " vs " +
                                std::to_string(yhat.size()) + ")");
    constexpr double eps = 1e-8;
    PointMetrics pm;
    const auto n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = y(i) - yhat(i);
        const double ad = std::abs(diff);
        pm.mse += diff * diff;
        pm.mae += ad;
        pm.mape += ad / std::max(std::abs(y(i)), eps);
        pm.smape += 2.0 * ad / std::max(std::abs(y(i)) + std::abs(yhat(i)), eps);
        pm.maxerr = std::max(pm.maxerr, ad);
    }
    const double inv = 1.0 / static_cast<double>(n);
    pm.mse *= inv;
    pm.mae *= inv;
    pm.mape *= 100.0 * inv;
    pm.smape *= 100.0 * inv;
    return pm;
}

inline double point_metric(Metric m, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat) {
    return point_metrics(y, yhat).get(m);
}

}  // namespace dystrat
