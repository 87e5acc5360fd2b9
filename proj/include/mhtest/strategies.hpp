#ifndef MHTEST_STRATEGIES_HPP
#define MHTEST_STRATEGIES_HPP

// Prudent betting strategies for the biased-coin game.
//
// Every strategy bets nu_n and updates K_n = K_{n-1} (1 + nu_n (x_n - rho)).
// Both strategies here bet a posterior-predictive probability p against rho,
// so the round factor is p/rho on an up move and (1-p)/(1-rho) on a down
// move. Capital is carried in log domain throughout.

#include "mhtest/embedding.hpp"
#include "mhtest/error.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

namespace mhtest {

/// log Gamma(x) for x > 0. Reentrant (does not touch the global signgam).
inline double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

/// log of the rising factorial (c)_l = Gamma(c + l) / Gamma(c).
inline double log_rising_factorial(double c, double l) { return log_gamma(c + l) - log_gamma(c); }

/// Kullback-Leibler divergence D(p || q) between Bernoulli laws, in nats.
/// Uses 0 log 0 = 0; q must lie strictly inside (0,1).
inline double kl_divergence(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw domain_error("kl_divergence: q must lie in (0,1)");
    if (!(p >= 0.0 && p <= 1.0)) throw domain_error("kl_divergence: p must lie in [0,1]");
    double d = 0.0;
    if (p > 0.0) d += p * std::log(p / q);
    if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return d < 0.0 ? 0.0 : d;
}

/// n D(h/n || rho) - (1/2) log n: leading behaviour of the beta-binomial log capital.
inline double asymptotic_log_capital(std::size_t n, std::size_t h, double rho) {
    if (n < 1 || h > n) throw domain_error("asymptotic_log_capital: need n >= 1 and 0 <= h <= n");
    const double nd = static_cast<double>(n);
    return nd * kl_divergence(static_cast<double>(h) / nd, rho) - 0.5 * std::log(nd);
}

/// Per-hit log growth of the first-order Markov strategy on a path with
/// Hurst index H: D(2^{1 - 1/H} || 1/2).
inline double markov_growth_rate(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw domain_error("markov_growth_rate: hurst must lie in (0,1)");
    return kl_divergence(std::exp2(1.0 - 1.0 / hurst), 0.5);
}

/// Beta prior hyperparameters of the predictive up-probability.
struct BetaBinomialParams {
    double a = 1.0;
    double b = 1.0;

    void validate() const {
        if (!(a > 0.0) || !(b > 0.0)) throw domain_error("beta-binomial: a and b must be > 0");
    }

    /// a = b = 0.01 / eta, i.e. 0.01 * 2^k on the grid eta = 2^-k.
    static BetaBinomialParams for_eta(double eta) {
        if (!(eta > 0.0)) throw domain_error("beta-binomial: eta must be > 0");
        return {0.01 / eta, 0.01 / eta};
    }
};

enum class StrategyKind { beta_binomial, markov };

inline std::string_view to_string(StrategyKind k) {
    return k == StrategyKind::beta_binomial ? "bb" : "markov";
}

/// Capital of one strategy over the rounds of a game.
struct CapitalProcess {
    StrategyKind kind = StrategyKind::beta_binomial;
    std::vector<double> log_capital{0.0};  ///< log K_0 .. log K_n, log K_0 = 0
    std::vector<double> bets;              ///< nu_1 .. nu_n

    std::size_t rounds() const noexcept { return bets.size(); }
    double final_log_capital() const noexcept { return log_capital.back(); }
};

namespace detail {

/// nu such that 1 + nu (x - rho) = p/rho for x = 1 and (1-p)/(1-rho) for x = 0.
inline double bet_for_prediction(double p, double rho) { return (p - rho) / (rho * (1.0 - rho)); }

inline double checked_log_factor(double nu, std::uint8_t x, double rho, std::size_t round) {
    const double factor = 1.0 + nu * ((x ? 1.0 : 0.0) - rho);
    if (!(factor > 0.0)) {
        throw prudence_error("round " + std::to_string(round) + ": capital factor " + std::to_string(factor) +
                             " is not positive");
    }
    return std::log1p(nu * ((x ? 1.0 : 0.0) - rho));
}

inline void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw domain_error("rho must lie in (0,1)");
}

template <class R>
concept DirectionRange = std::ranges::input_range<R> && std::convertible_to<std::ranges::range_value_t<R>, int>;

}  // namespace detail

// ---------------------------------------------------------------------------
// Beta-binomial strategy
// ---------------------------------------------------------------------------

/// Predictive up-probability (a + h_{n-1}) / (a + b + n - 1) before round n.
inline double bb_predictive(std::size_t h_prev, std::size_t n, const BetaBinomialParams& params) {
    if (n < 1 || h_prev > n - 1) throw domain_error("bb: need n >= 1 and h_prev <= n - 1");
    const double p = (params.a + static_cast<double>(h_prev)) / (params.a + params.b + static_cast<double>(n - 1));
    // a, b > 0 keep the prediction strictly inside (0,1).
    if (!(p > 0.0 && p < 1.0)) throw domain_error("bb: predictive probability left (0,1)");
    return p;
}

inline double bb_bet(std::size_t h_prev, std::size_t n, const BetaBinomialParams& params, double rho) {
    detail::check_rho(rho);
    return detail::bet_for_prediction(bb_predictive(h_prev, n, params), rho);
}

/// log K after h heads and t tails:
/// (a)_h (b)_t / ((a+b)_{h+t} rho^h (1-rho)^t).
inline double bb_capital_closed(std::size_t h, std::size_t t, const BetaBinomialParams& params, double rho) {
    params.validate();
    detail::check_rho(rho);
    const double hd = static_cast<double>(h);
    const double td = static_cast<double>(t);
    return log_rising_factorial(params.a, hd) + log_rising_factorial(params.b, td) -
           log_rising_factorial(params.a + params.b, hd + td) - hd * std::log(rho) - td * std::log1p(-rho);
}

/// Play the beta-binomial strategy round by round over a direction sequence.
template <detail::DirectionRange R>
CapitalProcess run_bb(const R& directions, const BetaBinomialParams& params, double rho) {
    params.validate();
    detail::check_rho(rho);
    CapitalProcess cp;
    cp.kind = StrategyKind::beta_binomial;
    std::size_t n = 0;
    std::size_t heads = 0;
    for (const auto raw : directions) {
        const auto x = static_cast<std::uint8_t>(raw != 0);
        ++n;
        const double nu = bb_bet(heads, n, params, rho);
        cp.bets.push_back(nu);
        cp.log_capital.push_back(cp.log_capital.back() + detail::checked_log_factor(nu, x, rho, n));
        heads += x;
    }
    return cp;
}

inline CapitalProcess run_bb(const Embedding& e, const BetaBinomialParams& params) {
    return run_bb(e.directions, params, e.grid.rho);
}

// ---------------------------------------------------------------------------
// First-order Markov strategy
// ---------------------------------------------------------------------------

/// Predictive up-probability given the previous direction, using the pair
/// counts accumulated so far; none for the first round.
inline std::optional<double> markov_predictive(std::optional<std::uint8_t> last_x, const PairCounts& c,
                                               const BetaBinomialParams& params) {
    if (!last_x) return std::nullopt;
    const double up = static_cast<double>(*last_x ? c.q11 : c.q01);
    const double down = static_cast<double>(*last_x ? c.q10 : c.q00);
    const double p = (up + params.a) / (up + down + params.a + params.b);
    if (!(p > 0.0 && p < 1.0)) throw domain_error("markov: predictive probability left (0,1)");
    return p;
}

/// Bet of the first-order Markov strategy; zero in round 1 (no last move yet).
inline double markov_bet(std::optional<std::uint8_t> last_x, const PairCounts& c, const BetaBinomialParams& params,
                         double rho) {
    detail::check_rho(rho);
    const auto p = markov_predictive(last_x, c, params);
    return p ? detail::bet_for_prediction(*p, rho) : 0.0;
}

/// log K from the pair counts over rounds 2..n:
/// two independent beta-binomial games, one per previous direction.
inline double markov_capital_closed(std::size_t q11, std::size_t q10, std::size_t q01, std::size_t q00,
                                    const BetaBinomialParams& params, double rho) {
    params.validate();
    detail::check_rho(rho);
    const double ab = params.a + params.b;
    const auto d = [](std::size_t v) { return static_cast<double>(v); };
    return log_rising_factorial(params.a, d(q11)) + log_rising_factorial(params.b, d(q10)) +
           log_rising_factorial(params.a, d(q01)) + log_rising_factorial(params.b, d(q00)) -
           log_rising_factorial(ab, d(q11 + q10)) - log_rising_factorial(ab, d(q01 + q00)) -
           d(q11 + q01) * std::log(rho) - d(q10 + q00) * std::log1p(-rho);
}

inline double markov_capital_closed(const PairCounts& c, const BetaBinomialParams& params, double rho) {
    return markov_capital_closed(c.q11, c.q10, c.q01, c.q00, params, rho);
}

template <detail::DirectionRange R>
CapitalProcess run_markov(const R& directions, const BetaBinomialParams& params, double rho) {
    params.validate();
    detail::check_rho(rho);
    CapitalProcess cp;
    cp.kind = StrategyKind::markov;
    PairCounts c;
    std::optional<std::uint8_t> last;
    std::size_t n = 0;
    for (const auto raw : directions) {
        const auto x = static_cast<std::uint8_t>(raw != 0);
        ++n;
        const double nu = markov_bet(last, c, params, rho);
        cp.bets.push_back(nu);
        cp.log_capital.push_back(cp.log_capital.back() + detail::checked_log_factor(nu, x, rho, n));
        c.push(last, x);
        last = x;
    }
    return cp;
}

inline CapitalProcess run_markov(const Embedding& e, const BetaBinomialParams& params) {
    return run_markov(e.directions, params, e.grid.rho);
}

inline CapitalProcess run_strategy(StrategyKind kind, const Embedding& e, const BetaBinomialParams& params) {
    return kind == StrategyKind::beta_binomial ? run_bb(e, params) : run_markov(e, params);
}

}  // namespace mhtest

#endif  // MHTEST_STRATEGIES_HPP
