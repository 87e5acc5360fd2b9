#ifndef MHTEST_SEQUENTIAL_TEST_HPP
#define MHTEST_SEQUENTIAL_TEST_HPP

// Sequential tests of the fair-coin hypothesis from a capital process.
//
// Under the null every prudent capital process is a non-negative martingale
// with K_0 = 1, so P(sup_n K_n >= 1/alpha) <= alpha. The reciprocal of the
// running maximum is therefore an anytime-valid p-value.

#include "mhtest/error.hpp"
#include "mhtest/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace mhtest {

struct TestConfig {
    double alpha = 0.01;
    std::optional<std::size_t> horizon_rounds;  ///< N for the maximal test
    std::size_t num_tests = 1;                  ///< Bonferroni multiplier m

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0,1)");
        if (num_tests < 1) throw config_error("num_tests must be >= 1");
    }

    double log_threshold() const { return std::log(1.0 / alpha); }
};

struct TestOutcome {
    bool rejected = false;
    std::optional<std::size_t> first_crossing_round;  ///< fn
    std::optional<double> first_crossing_time;        ///< ft, in source time units
    std::size_t rounds_scanned = 0;
    double log_max_capital = 0.0;
    double log_final_capital = 0.0;  ///< capital at the last scanned round
    double p_value = 1.0;            ///< min(1, 1 / max capital)
    double final_p_value = 1.0;      ///< min(1, 1 / last scanned capital)
    double adjusted_p = 1.0;         ///< min(1, m / max capital)

    double max_capital() const { return std::exp(log_max_capital); }
};

namespace detail {

inline double p_from_log_capital(double log_k) { return log_k <= 0.0 ? 1.0 : std::exp(-log_k); }

inline void finish_outcome(TestOutcome& out, const TestConfig& config) {
    out.p_value = p_from_log_capital(out.log_max_capital);
    out.final_p_value = p_from_log_capital(out.log_final_capital);
    out.adjusted_p = std::min(1.0, static_cast<double>(config.num_tests) * out.p_value);
}

}  // namespace detail

/// Reject as soon as K_n >= 1/alpha and stop betting there.
///
/// `hit_times[i]` is the time of round i + 1; when given, the crossing time is
/// filled in from it.
inline TestOutcome run_stopping_test(const CapitalProcess& capital, const TestConfig& config,
                                     std::span<const double> hit_times = {}) {
    config.validate();
    const double threshold = config.log_threshold();
    const auto& lk = capital.log_capital;

    TestOutcome out;
    for (std::size_t n = 0; n < lk.size(); ++n) {
        out.rounds_scanned = n;
        out.log_max_capital = std::max(out.log_max_capital, lk[n]);
        out.log_final_capital = lk[n];
        if (lk[n] >= threshold) {
            out.rejected = true;
            out.first_crossing_round = n;
            if (n >= 1 && n <= hit_times.size()) out.first_crossing_time = hit_times[n - 1];
            break;
        }
    }
    detail::finish_outcome(out, config);
    return out;
}

/// Reject when max_{0 <= n <= N} K_n >= 1/alpha. N defaults to the last round.
inline TestOutcome run_max_test(const CapitalProcess& capital, const TestConfig& config,
                                std::span<const double> hit_times = {}) {
    config.validate();
    const auto& lk = capital.log_capital;
    const std::size_t last = lk.size() - 1;
    const std::size_t horizon = config.horizon_rounds.value_or(last);
    if (horizon > last) {
        throw domain_error("max test: horizon " + std::to_string(horizon) + " exceeds the " +
                           std::to_string(last) + " available rounds");
    }
    const double threshold = config.log_threshold();

    TestOutcome out;
    out.rounds_scanned = horizon;
    for (std::size_t n = 0; n <= horizon; ++n) {
        out.log_max_capital = std::max(out.log_max_capital, lk[n]);
        if (!out.first_crossing_round && lk[n] >= threshold) {
            out.first_crossing_round = n;
            if (n >= 1 && n <= hit_times.size()) out.first_crossing_time = hit_times[n - 1];
        }
    }
    out.log_final_capital = lk[horizon];
    out.rejected = out.log_max_capital >= threshold;
    detail::finish_outcome(out, config);
    return out;
}

/// Bonferroni combination over m = outcomes.size() tests.
///
/// Returns the outcome with the smallest p-value, with adjusted_p set to
/// min(1, m * p_min) and `rejected` recomputed as adjusted_p <= alpha.
inline TestOutcome bonferroni(std::span<const TestOutcome> outcomes, double alpha) {
    if (outcomes.empty()) throw domain_error("bonferroni: no outcomes to combine");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0,1)");
    const auto best = std::min_element(outcomes.begin(), outcomes.end(),
                                       [](const auto& l, const auto& r) { return l.p_value < r.p_value; });
    TestOutcome combined = *best;
    combined.adjusted_p = std::min(1.0, static_cast<double>(outcomes.size()) * best->p_value);
    combined.rejected = combined.adjusted_p <= alpha;
    return combined;
}

/// Index of the outcome bonferroni() selects.
inline std::size_t bonferroni_best_index(std::span<const TestOutcome> outcomes) {
    if (outcomes.empty()) throw domain_error("bonferroni: no outcomes to combine");
    const auto best = std::min_element(outcomes.begin(), outcomes.end(),
                                       [](const auto& l, const auto& r) { return l.p_value < r.p_value; });
    return static_cast<std::size_t>(best - outcomes.begin());
}

/// Columnar capital series. The rejection threshold 1/alpha is recorded in the
/// metadata line so plots can draw it.
inline void write_capital_csv(std::ostream& out, const CapitalProcess& capital, std::span<const double> hit_times,
                              double start_time, double eta, const TestConfig& config) {
    const auto saved = out.precision(15);
    out << "# strategy=" << to_string(capital.kind) << " eta=" << eta << " alpha=" << config.alpha
        << " threshold=" << 1.0 / config.alpha << " log_threshold=" << config.log_threshold() << '\n';
    out << "round,time,log_capital,capital,nu\n";
    for (std::size_t n = 0; n < capital.log_capital.size(); ++n) {
        const double t = n == 0 ? start_time : (n <= hit_times.size() ? hit_times[n - 1] : 0.0);
        out << n << ',' << t << ',' << capital.log_capital[n] << ',' << std::exp(capital.log_capital[n]) << ',';
        if (n > 0) out << capital.bets[n - 1];
        out << '\n';
    }
    out.precision(saved);
}

}  // namespace mhtest

#endif  // MHTEST_SEQUENTIAL_TEST_HPP
