#pragma once

#include "dystrat/common.hpp"
#include "dystrat/csv.hpp"
#include "dystrat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace dystrat {

enum class SeriesSource { synthetic_mackey_glass, synthetic_lorenz, synthetic_sine, csv };

inline const char* to_string(SeriesSource s) {
    switch (s) {
        case SeriesSource::synthetic_mackey_glass: return "synthetic-mackey-glass";
        case SeriesSource::synthetic_lorenz: return "synthetic-lorenz";
        case SeriesSource::synthetic_sine: return "synthetic-sine";
        case SeriesSource::csv: return "csv";
    }
    return "?";
}

/// A named univariate sequence. All values are finite by construction.
struct TimeSeries {
    std::string name;
    std::vector<double> values;
    SeriesSource source = SeriesSource::csv;

    int length() const { return static_cast<int>(values.size()); }
};

struct MackeyGlassParams {
    double tau = 17.0;
    double beta = 0.2;
    double gamma = 0.1;
    double exponent = 10.0;
    double dt = 0.1;
    /// Constant pre-history value; NaN derives one from the seed.
    double history_value = std::numeric_limits<double>::quiet_NaN();
    /// Time units discarded before emission; negative means the 10*tau default.
    double burn_in = -1.0;
};

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double dt = 0.01;
    int sample_every = 5;
    /// Initial state; NaN components are jittered around (1,1,1) from the seed.
    double x0 = std::numeric_limits<double>::quiet_NaN();
    double y0 = std::numeric_limits<double>::quiet_NaN();
    double z0 = std::numeric_limits<double>::quiet_NaN();
    /// Time units discarded before emission.
    double burn_in = 10.0;
};

namespace detail {

/// Cubic Lagrange interpolation of a stored trajectory at fractional grid index.
/// `history` is the constant value for times <= 0.
inline double delayed_value(const std::vector<double>& traj, double grid_pos, double history) {
    if (grid_pos <= 0.0) return history;
    const auto j = static_cast<std::ptrdiff_t>(std::floor(grid_pos));
    const double theta = grid_pos - static_cast<double>(j);
    if (theta == 0.0) return traj[static_cast<std::size_t>(j)];
    auto at = [&](std::ptrdiff_t i) { return i < 0 ? history : traj[static_cast<std::size_t>(i)]; };
    const double ym1 = at(j - 1), y0 = at(j), y1 = at(j + 1), y2 = at(j + 2);
    const double t = theta;
    // 4-point Lagrange basis on nodes {-1,0,1,2}
    return ym1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + y0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
           y1 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + y2 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

}  // namespace detail

/// Mackey-Glass delay differential equation dy/dt = beta*y(t-tau)/(1+y(t-tau)^p) - gamma*y(t),
/// integrated with fixed-step RK4 (delayed term interpolated at substeps), sub-sampled to one
/// sample per time unit after the burn-in prefix is discarded.
inline TimeSeries generate_mackey_glass(int n, const MackeyGlassParams& params, std::uint64_t seed) {
    if (n < 1) throw InvalidParameterError("mackey-glass: sample count must be >= 1");
    if (params.dt <= 0.0) throw InvalidParameterError("mackey-glass: dt must be positive");
    if (params.tau <= 0.0) throw InvalidParameterError("mackey-glass: tau must be positive");
    if (params.tau < 4.0 * params.dt)
        throw InvalidParameterError("mackey-glass: tau must be at least 4*dt for the delay interpolation");

    const double dt = params.dt;
    const auto steps_per_sample = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / dt)));
    const double burn_units = params.burn_in >= 0.0 ? params.burn_in : 10.0 * params.tau;
    const auto burn_steps = static_cast<std::size_t>(std::llround(burn_units / dt));
    const std::size_t total_steps = burn_steps + static_cast<std::size_t>(n - 1) * steps_per_sample + 1;

    double history = params.history_value;
    if (!std::isfinite(history)) {
        Rng rng(derive_seed(seed, "mackey-glass-history"));
        history = rng.uniform(0.8, 1.4);
    }

    std::vector<double> traj;
    traj.reserve(total_steps + 1);
    traj.push_back(history);
    const double delay_steps = params.tau / dt;

    auto f = [&](double y, double y_delayed) {
        return params.beta * y_delayed / (1.0 + std::pow(y_delayed, params.exponent)) - params.gamma * y;
    };
    for (std::size_t i = 0; i + 1 < total_steps + 1; ++i) {
        const double gi = static_cast<double>(i);
        const double y = traj[i];
        const double d0 = detail::delayed_value(traj, gi - delay_steps, history);
        const double dh = detail::delayed_value(traj, gi + 0.5 - delay_steps, history);
        const double d1 = detail::delayed_value(traj, gi + 1.0 - delay_steps, history);
        const double k1 = f(y, d0);
        const double k2 = f(y + 0.5 * dt * k1, dh);
        const double k3 = f(y + 0.5 * dt * k2, dh);
        const double k4 = f(y + dt * k3, d1);
        traj.push_back(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }

    TimeSeries ts;
    ts.name = "mackey-glass";
    ts.source = SeriesSource::synthetic_mackey_glass;
    ts.values.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        ts.values.push_back(traj[burn_steps + static_cast<std::size_t>(i) * steps_per_sample]);
    return ts;
}

/// x-coordinate of the Lorenz system, fixed-step RK4 from a seeded state near the attractor.
inline TimeSeries generate_lorenz(int n, const LorenzParams& params, std::uint64_t seed) {
    if (n < 1) throw InvalidParameterError("lorenz: sample count must be >= 1");
    if (params.dt <= 0.0) throw InvalidParameterError("lorenz: dt must be positive");
    if (params.sample_every < 1) throw InvalidParameterError("lorenz: sample_every must be >= 1");

    double state[3] = {params.x0, params.y0, params.z0};
    Rng rng(derive_seed(seed, "lorenz-init"));
    const double base[3] = {1.0, 1.0, 1.0};
    for (int i = 0; i < 3; ++i)
        if (!std::isfinite(state[i])) state[i] = base[i] + rng.uniform(-0.5, 0.5);

    auto deriv = [&](const double s[3], double out[3]) {
        out[0] = params.sigma * (s[1] - s[0]);
        out[1] = s[0] * (params.rho - s[2]) - s[1];
        out[2] = s[0] * s[1] - params.beta * s[2];
    };
    auto rk4_step = [&](double s[3]) {
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        const double dt = params.dt;
        deriv(s, k1);
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        deriv(tmp, k2);
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        deriv(tmp, k3);
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + dt * k3[i];
        deriv(tmp, k4);
        for (int i = 0; i < 3; ++i) s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    const auto burn_steps = static_cast<std::size_t>(std::llround(std::max(0.0, params.burn_in) / params.dt));
    for (std::size_t i = 0; i < burn_steps; ++i) rk4_step(state);

    TimeSeries ts;
    ts.name = "lorenz";
    ts.source = SeriesSource::synthetic_lorenz;
    ts.values.reserve(static_cast<std::size_t>(n));
    ts.values.push_back(state[0]);
    for (int i = 1; i < n; ++i) {
        for (int s = 0; s < params.sample_every; ++s) rk4_step(state);
        ts.values.push_back(state[0]);
    }
    return ts;
}

/// sin(2*pi*t/period) plus seeded gaussian noise with standard deviation
/// noise_fraction * 1.0 (the unit signal amplitude).
inline TimeSeries generate_noisy_sine(int n, double period, double noise_fraction, std::uint64_t seed) {
    if (n < 1) throw InvalidParameterError("sine: sample count must be >= 1");
    if (period <= 0.0) throw InvalidParameterError("sine: period must be positive");
    if (noise_fraction < 0.0) throw InvalidParameterError("sine: noise fraction must be >= 0");

    Rng rng(derive_seed(seed, "sine-noise"));
    TimeSeries ts;
    ts.name = "sine";
    ts.source = SeriesSource::synthetic_sine;
    ts.values.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        double v = std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(t) / period);
        if (noise_fraction > 0.0) v += noise_fraction * rng.gaussian();
        ts.values.push_back(v);
    }
    return ts;
}

/// Loads one numeric column from a CSV file. `column` is a header name or a 0-based
/// index in string form; a header row is detected by the first row's cell failing to parse.
inline TimeSeries load_csv(const std::string& path, const std::string& column) {
    const auto rows = csv::read_rows(path);
    if (rows.empty()) throw IngestionError(path + ": file is empty");

    int col = -1;
    bool numeric_column_ref = false;
    {
        double ignored;
        int idx;
        const auto [p, ec] = std::from_chars(column.data(), column.data() + column.size(), idx);
        numeric_column_ref = ec == std::errc() && p == column.data() + column.size();
        if (numeric_column_ref) {
            col = idx;
        } else {
            for (std::size_t j = 0; j < rows[0].size(); ++j)
                if (rows[0][j] == column) col = static_cast<int>(j);
            if (col < 0) throw IngestionError(path + ": no column named '" + column + "'");
        }
        (void)ignored;
    }
    if (col < 0 || static_cast<std::size_t>(col) >= rows[0].size())
        throw IngestionError(path + ": column index " + std::to_string(col) + " out of range");

    std::size_t first_row = 0;
    if (numeric_column_ref) {
        // headerless unless the first cell fails to parse
        double v;
        if (!csv::try_parse_double(rows[0][static_cast<std::size_t>(col)], v)) first_row = 1;
    } else {
        first_row = 1;  // named column implies a header row
    }

    TimeSeries ts;
    ts.source = SeriesSource::csv;
    ts.name = std::filesystem::path(path).stem().string() + ":" + column;
    ts.values.reserve(rows.size());
    for (std::size_t r = first_row; r < rows.size(); ++r) {
        if (static_cast<std::size_t>(col) >= rows[r].size())
            throw IngestionError(path + ": row " + std::to_string(r + 1) + " has no column " + std::to_string(col));
        double v;
        if (!csv::try_parse_double(rows[r][static_cast<std::size_t>(col)], v) || !std::isfinite(v))
            throw IngestionError(path + ": row " + std::to_string(r + 1) + ": cannot parse '" +
                                 rows[r][static_cast<std::size_t>(col)] + "' as a finite number");
        ts.values.push_back(v);
    }
    if (ts.values.empty()) throw IngestionError(path + ": no data rows");
    return ts;
}

/// Affine min-max map of the whole series onto [0, 1].
inline TimeSeries normalize(const TimeSeries& ts) {
    const auto [lo_it, hi_it] = std::minmax_element(ts.values.begin(), ts.values.end());
    if (ts.values.size() < 2 || *lo_it == *hi_it)
        throw DegenerateSeriesError(ts.name + ": series is constant; cannot normalize");
    const double lo = *lo_it;
    const double scale = 1.0 / (*hi_it - lo);
    TimeSeries out = ts;
    for (double& v : out.values) v = (v - lo) * scale;
    return out;
}

}  // namespace dystrat
