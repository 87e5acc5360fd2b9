#ifndef MHTEST_PATH_MODEL_HPP
#define MHTEST_PATH_MODEL_HPP

// Price paths: CSV ingestion and synthetic generators.
//
// Recorded data is taken as one continuous path. Gaps between sessions
// (overnight, halts) are not modeled: consecutive rows are simply
// concatenated, so a hitting time that spans a gap is measured in the
// source time units as written in the file.

#include "mhtest/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mhtest {

/// Timestamped, strictly positive price series.
///
/// Invariants (checked on construction): at least two samples, equal lengths,
/// every price > 0 and finite, timestamps strictly increasing.
class PricePath {
public:
    PricePath(std::vector<double> times, std::vector<double> prices, std::string label = {})
        : times_(std::move(times)), prices_(std::move(prices)), label_(std::move(label)) {
        if (times_.size() != prices_.size()) {
            throw domain_error("price path: " + std::to_string(times_.size()) + " timestamps but " +
                               std::to_string(prices_.size()) + " prices");
        }
        if (prices_.size() < 2) {
            throw insufficient_data_error("price path needs at least 2 samples, got " +
                                          std::to_string(prices_.size()));
        }
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i])) {
                throw domain_error("price path: price at sample " + std::to_string(i) +
                                   " is not a positive finite number");
            }
            if (!std::isfinite(times_[i])) {
                throw domain_error("price path: timestamp at sample " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(times_[i] > times_[i - 1])) {
                throw ordering_error("price path: timestamp at sample " + std::to_string(i) +
                                     " does not increase");
            }
        }
    }

    /// Path whose timestamps are the sample indices 0, 1, 2, ...
    static PricePath from_prices(std::vector<double> prices, std::string label = {}) {
        std::vector<double> times(prices.size());
        for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i);
        return PricePath(std::move(times), std::move(prices), std::move(label));
    }

    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> prices() const noexcept { return prices_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return prices_.size(); }

    /// log(price[i+1]/price[i]) for every step.
    std::vector<double> log_increments() const {
        std::vector<double> out(prices_.size() - 1);
        for (std::size_t i = 0; i + 1 < prices_.size(); ++i) out[i] = std::log(prices_[i + 1] / prices_[i]);
        return out;
    }

private:
    std::vector<double> times_;
    std::vector<double> prices_;
    std::string label_;
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// A CSV column chosen by 0-based position or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

/// Which columns hold the timestamp and the price. An empty `time` means the
/// file has no time column and samples are indexed 0, 1, 2, ...
struct CsvColumns {
    std::optional<ColumnRef> time = ColumnRef{std::size_t{0}};
    ColumnRef price = ColumnRef{std::size_t{1}};

    static CsvColumns price_only(ColumnRef price) { return CsvColumns{std::nullopt, std::move(price)}; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\"";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline std::optional<double> parse_real(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string_view>& header,
                                  std::size_t line_no) {
    if (const auto* idx = std::get_if<std::size_t>(&ref)) return *idx;
    const auto& name = std::get<std::string>(ref);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw parse_error(line_no, "column '" + name + "' not found in header");
}

}  // namespace detail

/// Read a price path from comma-separated text.
///
/// Blank lines and lines starting with '#' are ignored. The first data line is
/// treated as a header when its price field is not numeric, and a header is
/// required when columns are selected by name.
inline PricePath load_price_csv(std::istream& in, const CsvColumns& columns = {}, std::string label = {}) {
    const bool by_name = std::holds_alternative<std::string>(columns.price) ||
                         (columns.time && std::holds_alternative<std::string>(*columns.time));

    std::vector<double> times;
    std::vector<double> prices;
    std::optional<std::size_t> time_col;
    std::size_t price_col = 0;
    bool resolved = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto fields = detail::split_csv(line);

        if (!resolved) {
            resolved = true;
            if (by_name) {
                price_col = detail::resolve_column(columns.price, fields, line_no);
                if (columns.time) time_col = detail::resolve_column(*columns.time, fields, line_no);
                continue;
            }
            price_col = std::get<std::size_t>(columns.price);
            if (columns.time) time_col = std::get<std::size_t>(*columns.time);
            if (price_col < fields.size() && !detail::parse_real(fields[price_col])) continue;  // header row
        }

        const std::size_t needed = std::max(price_col, time_col.value_or(0)) + 1;
        if (fields.size() < needed) {
            throw parse_error(line_no, "expected at least " + std::to_string(needed) + " fields, got " +
                                           std::to_string(fields.size()));
        }
        const auto price = detail::parse_real(fields[price_col]);
        if (!price) throw parse_error(line_no, "price '" + std::string(fields[price_col]) + "' is not a number");
        if (!(*price > 0.0)) throw parse_error(line_no, "price " + std::string(fields[price_col]) + " is not positive");

        double t = static_cast<double>(prices.size());
        if (time_col) {
            const auto parsed = detail::parse_real(fields[*time_col]);
            if (!parsed) {
                throw parse_error(line_no, "timestamp '" + std::string(fields[*time_col]) + "' is not a number");
            }
            t = *parsed;
            if (!times.empty() && !(t > times.back())) {
                throw ordering_error(line_no, "timestamp " + std::string(fields[*time_col]) +
                                                  " does not increase");
            }
        }
        times.push_back(t);
        prices.push_back(*price);
    }
    if (prices.size() < 2) {
        throw insufficient_data_error("need at least 2 valid rows, got " + std::to_string(prices.size()));
    }
    return PricePath(std::move(times), std::move(prices), std::move(label));
}

// ---------------------------------------------------------------------------
// Geometric Brownian motion
// ---------------------------------------------------------------------------

struct GbmParams {
    double mu = 0.0;
    double sigma = 0.2;
    double s0 = 100.0;
    double dt = 1.0;
    double horizon = 1000.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(sigma > 0.0)) throw config_error("gbm: sigma must be > 0");
        if (!(s0 > 0.0)) throw config_error("gbm: s0 must be > 0");
        if (!(dt > 0.0)) throw config_error("gbm: dt must be > 0");
        if (!(horizon >= dt)) throw config_error("gbm: horizon must be >= dt");
    }

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }
};

/// GBM sampled every dt up to the horizon: log-increments are i.i.d.
/// Normal((mu - sigma^2/2) dt, sigma^2 dt). Deterministic in the seed.
inline PricePath generate_gbm(const GbmParams& p, std::string label = "gbm") {
    p.validate();
    const std::size_t n = p.steps();
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double drift = (p.mu - 0.5 * p.sigma * p.sigma) * p.dt;
    const double vol = p.sigma * std::sqrt(p.dt);

    std::vector<double> times(n + 1);
    std::vector<double> prices(n + 1);
    double log_s = std::log(p.s0);
    times[0] = 0.0;
    prices[0] = p.s0;
    for (std::size_t k = 1; k <= n; ++k) {
        log_s += drift + vol * normal(rng);
        times[k] = static_cast<double>(k) * p.dt;
        prices[k] = std::exp(log_s);
    }
    return PricePath(std::move(times), std::move(prices), std::move(label));
}

// ---------------------------------------------------------------------------
// Exponentiated fractional Brownian motion
// ---------------------------------------------------------------------------

struct FbmParams {
    double hurst = 0.5;
    double sigma = 1.0;
    double s0 = 100.0;
    std::size_t n = 1024;  ///< number of steps; the path has n + 1 samples
    double dt = 1.0;
    std::uint64_t seed = 1;

    /// Largest n accepted: the circulant embedding works on 2 * 2^25 points
    /// (1 GiB of complex doubles).
    static constexpr std::size_t max_steps = std::size_t{1} << 25;

    void validate() const {
        if (!(hurst > 0.0 && hurst < 1.0)) throw config_error("fbm: hurst must lie in (0,1)");
        if (!(sigma > 0.0)) throw config_error("fbm: sigma must be > 0");
        if (!(s0 > 0.0)) throw config_error("fbm: s0 must be > 0");
        if (!(dt > 0.0)) throw config_error("fbm: dt must be > 0");
        if (n < 1) throw config_error("fbm: n must be >= 1");
    }
};

namespace detail {

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
struct FftwPlanDestroy {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDestroy>;

// FFTW's planner is not reentrant; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Autocovariance of unit fractional Gaussian noise at integer lag k.
inline double fgn_autocovariance(double hurst, std::size_t k) {
    const double h2 = 2.0 * hurst;
    const double x = static_cast<double>(k);
    if (k == 0) return 1.0;
    if (k < 64) return 0.5 * (std::pow(x + 1.0, h2) - 2.0 * std::pow(x, h2) + std::pow(x - 1.0, h2));
    // Large lags: the second difference cancels badly, so expand
    // (1 + 1/x)^{2H} + (1 - 1/x)^{2H} - 2 = 2 sum_j C(2H, 2j) x^{-2j} instead.
    double coef = h2 * (h2 - 1.0) / 2.0;  // C(2H, 2)
    const double inv2 = 1.0 / (x * x);
    double term = coef;
    double sum = coef;
    for (int j = 2; j <= 5; ++j) {
        coef *= (h2 - 2.0 * j + 2.0) * (h2 - 2.0 * j + 1.0) / ((2.0 * j - 1.0) * (2.0 * j));
        term = coef;
        for (int i = 1; i < j; ++i) term *= inv2;
        sum += term;
    }
    return std::pow(x, h2 - 2.0) * sum;
}

}  // namespace detail

/// Unit-variance fractional Gaussian noise of length n by circulant embedding
/// (Davies-Harte). Exact in distribution; throws capacity_error when
/// n > FbmParams::max_steps.
inline std::vector<double> fractional_gaussian_noise(double hurst, std::size_t n, std::uint64_t seed) {
    if (n > FbmParams::max_steps) {
        throw capacity_error("fbm: n = " + std::to_string(n) + " exceeds the exact-method limit of " +
                             std::to_string(FbmParams::max_steps) + " steps");
    }
    if (!(hurst > 0.0 && hurst < 1.0)) throw config_error("fbm: hurst must lie in (0,1)");

    std::size_t half = 1;
    while (half < n) half <<= 1;
    const std::size_t m = 2 * half;

    detail::FftwBuffer buf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m)));
    if (!buf) throw capacity_error("fbm: cannot allocate circulant buffer");
    detail::FftwPlan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan.reset(fftw_plan_dft_1d(static_cast<int>(m), buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    }

    // First row of the circulant: c_k = gamma(k) for k <= half, mirrored after.
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t lag = k <= half ? k : m - k;
        buf[k][0] = detail::fgn_autocovariance(hurst, lag);
        buf[k][1] = 0.0;
    }
    fftw_execute(plan.get());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        double lambda = buf[k][0];
        // Eigenvalues are non-negative for every H in (0,1); tiny negatives are rounding.
        if (lambda < 0.0) {
            if (lambda < -1e-8) throw capacity_error("fbm: circulant embedding is not non-negative definite");
            lambda = 0.0;
        }
        const double scale = std::sqrt(lambda * inv_m);
        buf[k][0] = scale * normal(rng);
        buf[k][1] = scale * normal(rng);
    }
    fftw_execute(plan.get());

    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k][0];
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan.reset();
    }
    return out;
}

/// prices[k] = s0 * exp(sigma * B_H(k dt)) with B_H a standard fractional
/// Brownian motion (Var B_H(t) = t^{2H}). Deterministic in the seed.
inline PricePath generate_fbm_exp(const FbmParams& p, std::string label = "fbm") {
    p.validate();
    const auto noise = fractional_gaussian_noise(p.hurst, p.n, p.seed);
    const double step_scale = p.sigma * std::pow(p.dt, p.hurst);

    std::vector<double> times(p.n + 1);
    std::vector<double> prices(p.n + 1);
    const double log_s0 = std::log(p.s0);
    double b = 0.0;
    times[0] = 0.0;
    prices[0] = p.s0;
    for (std::size_t k = 1; k <= p.n; ++k) {
        b += noise[k - 1];
        times[k] = static_cast<double>(k) * p.dt;
        prices[k] = std::exp(log_s0 + step_scale * b);
    }
    return PricePath(std::move(times), std::move(prices), std::move(label));
}

}  // namespace mhtest

#endif  // MHTEST_PATH_MODEL_HPP
