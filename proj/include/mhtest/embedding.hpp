#ifndef MHTEST_EMBEDDING_HPP
#define MHTEST_EMBEDDING_HPP

// Reduction of a price path to the coin-tossing game played on a
// multiplicative grid: every time log S moves by +-eta from the last hit
// level, a round is played with outcome 1 (up) or 0 (down).

#include "mhtest/error.hpp"
#include "mhtest/path_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mhtest {

/// Log-spaced price grid. delta = e^eta - 1 is the relative step and
/// rho = 1/(2 + delta) the up-probability under which each step is a fair bet.
struct Grid {
    double eta;
    double delta;
    double rho;
};

inline Grid grid_from_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw domain_error("grid: eta must be a positive finite number");
    const double delta = std::expm1(eta);
    return Grid{eta, delta, 1.0 / (2.0 + delta)};
}

/// How a sampling interval that jumps across several grid levels is handled.
enum class CrossingRule {
    /// One hit per level crossed; hit times interpolated linearly in log price
    /// between the two samples.
    interpolate,
    /// At most one hit per sample. The anchor moves a single level, so a
    /// multi-level jump is worked off over the following samples.
    single_hit,
};

struct EmbedOptions {
    std::optional<double> horizon;  ///< keep hits with time strictly before T
    CrossingRule rule = CrossingRule::interpolate;
};

/// The embedded game extracted from one path at one grid size.
struct Embedding {
    Grid grid;
    double start_time = 0.0;
    double start_price = 1.0;
    std::vector<std::uint8_t> directions;    ///< x_1..x_n*, 1 = up
    std::vector<double> hit_times;           ///< t_1..t_n*
    std::vector<double> waiting_times;       ///< w_i = t_i - t_{i-1}, t_0 = start_time
    std::vector<std::size_t> hit_indices;    ///< source sample at which each hit was detected
    std::vector<double> hit_prices;          ///< grid level price at each hit

    std::size_t n_star() const noexcept { return directions.size(); }
};

namespace detail {

// Prices that sit on a level up to rounding count as a hit.
inline constexpr double kLevelTolerance = 1e-10;

}  // namespace detail

/// Extract hitting times of the grid anchored at the first price.
///
/// Levels are log S(t_0) + k * eta for integer k; each hit moves the anchor to
/// exactly the hit level, so the lattice never drifts. A sample exactly on a
/// level counts as a hit.
inline Embedding embed(const PricePath& path, const Grid& grid, const EmbedOptions& opts = {}) {
    if (path.size() < 2) throw insufficient_data_error("embed: path needs at least 2 samples");
    if (!(grid.eta > 0.0)) throw domain_error("embed: grid eta must be positive");

    const auto times = path.times();
    const auto prices = path.prices();

    Embedding e;
    e.grid = grid;
    e.start_time = times[0];
    e.start_price = prices[0];

    const double base = std::log(prices[0]);
    const double eta = grid.eta;
    std::int64_t level = 0;
    auto level_log = [&](std::int64_t k) { return base + static_cast<double>(k) * eta; };

    double prev_log = base;
    double prev_time = times[0];
    double last_hit_time = times[0];
    bool past_horizon = false;

    auto emit = [&](std::uint8_t dir, double t, std::size_t idx) {
        if (opts.horizon && !(t < *opts.horizon)) {
            past_horizon = true;
            return;
        }
        level += dir ? 1 : -1;
        e.directions.push_back(dir);
        e.hit_times.push_back(t);
        e.waiting_times.push_back(t - last_hit_time);
        e.hit_indices.push_back(idx);
        e.hit_prices.push_back(std::exp(level_log(level)));
        last_hit_time = t;
    };

    for (std::size_t j = 1; j < prices.size() && !past_horizon; ++j) {
        const double lp = std::log(prices[j]);
        const double t = times[j];
        auto crossing_time = [&](double target) {
            const double span = lp - prev_log;
            double frac = span != 0.0 ? (target - prev_log) / span : 1.0;
            frac = std::clamp(frac, 0.0, 1.0);
            // Never step back before the previous hit.
            return std::max(prev_time + frac * (t - prev_time), last_hit_time);
        };

        if (opts.rule == CrossingRule::interpolate) {
            while (!past_horizon && lp >= level_log(level + 1) - detail::kLevelTolerance) {
                emit(1, crossing_time(level_log(level + 1)), j);
            }
            while (!past_horizon && lp <= level_log(level - 1) + detail::kLevelTolerance) {
                emit(0, crossing_time(level_log(level - 1)), j);
            }
        } else {
            if (lp >= level_log(level + 1) - detail::kLevelTolerance) {
                emit(1, t, j);
            } else if (lp <= level_log(level - 1) + detail::kLevelTolerance) {
                emit(0, t, j);
            }
        }
        prev_log = lp;
        prev_time = t;
    }
    return e;
}

/// Head/tail counts over x_1..x_n and adjacent-pair counts over (x_{i-1}, x_i), i = 2..n.
struct PairCounts {
    std::size_t heads = 0;
    std::size_t tails = 0;
    std::size_t q11 = 0;
    std::size_t q10 = 0;
    std::size_t q01 = 0;
    std::size_t q00 = 0;

    /// Add round x following `prev` (no pair for the first round).
    void push(std::optional<std::uint8_t> prev, std::uint8_t x) {
        (x ? heads : tails) += 1;
        if (!prev) return;
        if (*prev) {
            (x ? q11 : q10) += 1;
        } else {
            (x ? q01 : q00) += 1;
        }
    }
};

inline PairCounts counts(std::span<const std::uint8_t> directions, std::size_t n) {
    if (n > directions.size()) {
        throw domain_error("counts: prefix length " + std::to_string(n) + " exceeds " +
                           std::to_string(directions.size()) + " rounds");
    }
    PairCounts c;
    for (std::size_t i = 0; i < n; ++i) {
        c.push(i > 0 ? std::optional<std::uint8_t>(directions[i - 1]) : std::nullopt, directions[i]);
    }
    return c;
}

inline PairCounts counts(const Embedding& e, std::size_t n) { return counts(e.directions, n); }

/// Columnar audit file: one row per hit.
inline void write_embedding_csv(std::ostream& out, const Embedding& e) {
    const auto saved = out.precision(15);
    out << "# eta=" << e.grid.eta << " delta=" << e.grid.delta << " rho=" << e.grid.rho
        << " n_star=" << e.n_star() << " start_time=" << e.start_time << " start_price=" << e.start_price
        << '\n';
    out << "hit,sample_index,time,price,direction,waiting_time\n";
    for (std::size_t i = 0; i < e.n_star(); ++i) {
        out << (i + 1) << ',' << e.hit_indices[i] << ',' << e.hit_times[i] << ',' << e.hit_prices[i] << ','
            << static_cast<int>(e.directions[i]) << ',' << e.waiting_times[i] << '\n';
    }
    out.precision(saved);
}

}  // namespace mhtest

#endif  // MHTEST_EMBEDDING_HPP
