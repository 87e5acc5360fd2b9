#ifndef MHTEST_COSTS_HPP
#define MHTEST_COSTS_HPP

// First-order Markov strategy traded with proportional transaction costs.
//
// State per round: capital K, asset exposure mu = (asset value) / K. Trading
// beta K of the asset at relative cost c and then seeing the relative price
// move ds gives
//
//     K_n = K_{n-1} (1 + mu_{n-1} ds_n + beta_n (ds_n - c sgn beta_n)).
//
// On a grid game ds is d+ = delta on an up move and d- = -delta/(1+delta) on a
// down move. beta is chosen to maximize the expected log growth g(beta)
// under the Markov predictive up-probability. Because ds takes two values,
// g'(beta) = 0 is linear in beta on each side of zero and is solved in closed
// form. The exposure carried into the next round is the post-move asset
// fraction (mu + beta)(1 + ds) / factor.

#include "mhtest/embedding.hpp"
#include "mhtest/error.hpp"
#include "mhtest/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mhtest {

enum class TradeDecision : std::uint8_t { hold, buy, sell };

inline std::string_view to_string(TradeDecision d) {
    switch (d) {
        case TradeDecision::buy: return "buy";
        case TradeDecision::sell: return "sell";
        default: return "hold";
    }
}

struct TradeChoice {
    double beta = 0.0;
    TradeDecision decision = TradeDecision::hold;
};

struct CostParams {
    double c = 0.0;  ///< cost per unit of traded monetary amount
    BetaBinomialParams params;

    void validate(const Grid& grid) const {
        if (!(c >= 0.0)) throw config_error("cost: c must be >= 0");
        if (!(c < grid.delta)) throw config_error("cost: c must be below the grid step delta");
        params.validate();
    }
};

/// Relative price moves of one grid step.
inline double up_move(double delta) { return delta; }
inline double down_move(double delta) { return -delta / (1.0 + delta); }

/// Growth factor 1 + mu ds + beta (ds - c sgn beta).
inline double cost_factor(double mu_prev, double beta, double ds, double c) {
    const double sgn = beta > 0.0 ? 1.0 : (beta < 0.0 ? -1.0 : 0.0);
    return 1.0 + mu_prev * ds + beta * (ds - c * sgn);
}

/// Capital after one round; throws prudence_error unless the factor is positive.
inline double cost_step(double prev_capital, double mu_prev, double beta, double ds, double c) {
    const double f = cost_factor(mu_prev, beta, ds, c);
    if (!(f > 0.0)) throw prudence_error("cost step: growth factor " + std::to_string(f) + " is not positive");
    return prev_capital * f;
}

/// g'(beta) on the buy side (side = +1, beta >= 0) or the sell side (side = -1, beta <= 0).
/// side = +1 at beta = 0 gives g'(+0), side = -1 gives g'(-0).
inline double cost_growth_slope(double p, double mu, double beta, double delta, double c, int side) {
    const double dp = up_move(delta);
    const double dm = down_move(delta);
    const double a = dp - side * c;
    const double b = dm - side * c;
    return p * a / (1.0 + mu * dp + beta * a) + (1.0 - p) * b / (1.0 + mu * dm + beta * b);
}

/// Expected log growth g(beta).
inline double cost_growth(double p, double mu, double beta, double delta, double c) {
    return p * std::log(cost_factor(mu, beta, up_move(delta), c)) +
           (1.0 - p) * std::log(cost_factor(mu, beta, down_move(delta), c));
}

namespace detail {

/// Stationary point of g on one side: beta = -[p A (1 + mu d-) + (1-p) B (1 + mu d+)] / (A B).
inline double side_root(double p, double mu, double delta, double c, int side) {
    const double dp = up_move(delta);
    const double dm = down_move(delta);
    const double a = dp - side * c;
    const double b = dm - side * c;
    return -(p * a * (1.0 + mu * dm) + (1.0 - p) * b * (1.0 + mu * dp)) / (a * b);
}

/// Open interval of beta on one side where both outcome factors stay positive.
struct Interval {
    double lo;
    double hi;
    bool empty() const { return !(lo < hi); }
};

inline Interval feasible_side(double mu, double delta, double c, int side) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Interval iv = side > 0 ? Interval{0.0, inf} : Interval{-inf, 0.0};
    for (const double d : {up_move(delta), down_move(delta)}) {
        const double slope = d - side * c;
        const double level = 1.0 + mu * d;
        // level + beta * slope > 0
        if (slope > 0.0) {
            iv.lo = std::max(iv.lo, -level / slope);
        } else if (slope < 0.0) {
            iv.hi = std::min(iv.hi, -level / slope);
        } else if (!(level > 0.0)) {
            return {0.0, 0.0};
        }
    }
    return iv;
}

}  // namespace detail

/// Log-optimal trade under proportional cost c.
///
/// When the current exposure is admissible (1 + mu ds > 0 for both moves):
/// buy if g'(+0) > 0, sell if g'(-0) < 0, otherwise hold. If a losing move has
/// pushed the exposure outside that range, no-trade is infeasible and the
/// trade is the stationary point of g on the only side where both outcomes
/// keep positive capital. Throws prudence_error when neither side is
/// feasible, i.e. when capital no longer covers the cost of liquidation.
inline TradeChoice optimal_beta(double p_cond, double mu_prev, double delta, double c) {
    if (!(p_cond > 0.0 && p_cond < 1.0)) throw domain_error("optimal_beta: p must lie in (0,1)");
    if (!(delta > 0.0)) throw domain_error("optimal_beta: delta must be > 0");
    if (!(c >= 0.0 && c < delta)) throw domain_error("optimal_beta: need 0 <= c < delta");

    const bool admissible = 1.0 + mu_prev * up_move(delta) > 0.0 && 1.0 + mu_prev * down_move(delta) > 0.0;
    if (admissible) {
        if (cost_growth_slope(p_cond, mu_prev, 0.0, delta, c, +1) > 0.0) {
            return {detail::side_root(p_cond, mu_prev, delta, c, +1), TradeDecision::buy};
        }
        if (cost_growth_slope(p_cond, mu_prev, 0.0, delta, c, -1) < 0.0) {
            return {detail::side_root(p_cond, mu_prev, delta, c, -1), TradeDecision::sell};
        }
        return {0.0, TradeDecision::hold};
    }
    for (const int side : {+1, -1}) {
        if (!detail::feasible_side(mu_prev, delta, c, side).empty()) {
            return {detail::side_root(p_cond, mu_prev, delta, c, side),
                    side > 0 ? TradeDecision::buy : TradeDecision::sell};
        }
    }
    throw prudence_error("optimal_beta: exposure " + std::to_string(mu_prev) +
                         " cannot be traded to a position that survives both moves at cost " + std::to_string(c));
}

struct CostRunResult {
    double c = 0.0;
    std::vector<double> log_capital{0.0};  ///< log K_0 .. log K_n
    std::vector<double> exposures{0.0};    ///< mu_0 .. mu_n (post-move asset fraction)
    std::vector<double> trades;            ///< beta_1 .. beta_n
    std::vector<TradeDecision> decisions;  ///< decision of rounds 1..n
    std::size_t hold_rounds = 0;

    std::size_t rounds() const noexcept { return trades.size(); }
    double final_log_capital() const noexcept { return log_capital.back(); }
    double final_capital() const { return std::exp(log_capital.back()); }
};

/// Markov strategy with costs over the first `rounds` directions (all when empty).
///
/// Round 1 has no previous move and holds the flat position. Cost is charged
/// on every nonzero trade, including the first one.
inline CostRunResult run_markov_with_costs(std::span<const std::uint8_t> directions, const Grid& grid,
                                           const CostParams& cost,
                                           std::optional<std::size_t> rounds = std::nullopt) {
    cost.validate(grid);
    const std::size_t n = std::min(rounds.value_or(directions.size()), directions.size());
    const double delta = grid.delta;

    CostRunResult r;
    r.c = cost.c;
    r.log_capital.reserve(n + 1);
    r.exposures.reserve(n + 1);
    r.trades.reserve(n);
    r.decisions.reserve(n);

    PairCounts counts_so_far;
    std::optional<std::uint8_t> last;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t x = directions[i] != 0;
        // Round 1 has no context; the flat opening position is held.
        const auto p = markov_predictive(last, counts_so_far, cost.params);
        const TradeChoice choice = p ? optimal_beta(*p, mu, delta, cost.c) : TradeChoice{};
        const double ds = x ? up_move(delta) : down_move(delta);
        const double f = cost_factor(mu, choice.beta, ds, cost.c);
        if (!(f > 0.0)) {
            throw prudence_error("round " + std::to_string(i + 1) + ": growth factor " + std::to_string(f) +
                                 " is not positive");
        }
        r.log_capital.push_back(r.log_capital.back() + std::log(f));
        mu = (mu + choice.beta) * (1.0 + ds) / f;
        r.exposures.push_back(mu);
        r.trades.push_back(choice.beta);
        r.decisions.push_back(choice.decision);
        if (choice.decision == TradeDecision::hold) ++r.hold_rounds;
        counts_so_far.push(last, x);
        last = x;
    }
    return r;
}

inline CostRunResult run_markov_with_costs(const Embedding& e, const CostParams& cost,
                                           std::optional<std::size_t> rounds = std::nullopt) {
    return run_markov_with_costs(e.directions, e.grid, cost, rounds);
}

/// Smallest cost, scanned upward from zero in steps of delta/100, at which the
/// final capital first drops below 1.
struct CriticalCost {
    bool degenerate = false;        ///< frictionless final capital already <= 1; c* reported as 0
    bool found = false;             ///< a crossing exists below delta
    std::size_t steps = 0;          ///< c* = steps * delta / 100
    double c_star = 0.0;
    double final_capital = 0.0;     ///< final capital at c* (0 when the run was ruined)
    std::size_t hold_rounds = 0;    ///< holding rounds at c*
    bool ruined = false;            ///< the run at c* hit an infeasible (non-prudent) state

    double in_delta_units() const { return static_cast<double>(steps) / 100.0; }
};

inline CriticalCost critical_cost(const Embedding& e, const BetaBinomialParams& params,
                                  std::optional<std::size_t> rounds = std::nullopt) {
    CriticalCost out;
    const double delta = e.grid.delta;
    for (std::size_t j = 0; j < 100; ++j) {
        const double c = static_cast<double>(j) * delta / 100.0;
        double final_capital = 0.0;
        std::size_t holds = 0;
        bool ruined = false;
        try {
            const auto run = run_markov_with_costs(e, CostParams{c, params}, rounds);
            final_capital = run.final_capital();
            holds = run.hold_rounds;
        } catch (const prudence_error&) {
            ruined = true;
        }
        if (j == 0 && !ruined && !(final_capital > 1.0)) {
            out.degenerate = true;
            out.found = true;
            out.final_capital = final_capital;
            out.hold_rounds = holds;
            return out;
        }
        if (ruined || final_capital < 1.0) {
            out.found = true;
            out.steps = j;
            out.c_star = c;
            out.final_capital = final_capital;
            out.hold_rounds = holds;
            out.ruined = ruined;
            return out;
        }
    }
    return out;
}

inline void write_cost_run_csv(std::ostream& out, const CostRunResult& r, const Embedding& e) {
    const auto saved = out.precision(15);
    out << "# eta=" << e.grid.eta << " delta=" << e.grid.delta << " c=" << r.c
        << " c_over_delta=" << r.c / e.grid.delta << " hold_rounds=" << r.hold_rounds << '\n';
    out << "round,time,log_capital,exposure,beta,decision\n";
    out << 0 << ',' << e.start_time << ',' << r.log_capital[0] << ',' << r.exposures[0] << ",,\n";
    for (std::size_t i = 0; i < r.rounds(); ++i) {
        out << (i + 1) << ',' << e.hit_times[i] << ',' << r.log_capital[i + 1] << ',' << r.exposures[i + 1] << ','
            << r.trades[i] << ',' << to_string(r.decisions[i]) << '\n';
    }
    out.precision(saved);
}

}  // namespace mhtest

#endif  // MHTEST_COSTS_HPP
