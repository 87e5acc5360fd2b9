#ifndef MHTEST_DIAGNOSTICS_HPP
#define MHTEST_DIAGNOSTICS_HPP

// Running empirical probabilities, Hoelder-exponent estimates and
// eta-variation statistics of an embedded game.

#include "mhtest/embedding.hpp"
#include "mhtest/error.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

namespace mhtest {

/// Hoelder exponent H solving 1 / (2^{1/H} - 1) = p, i.e. H = log 2 / log(1 + 1/p).
inline double holder_from_prob(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw domain_error("holder_from_prob: p must lie in (0,1]");
    return std::numbers::ln2 / std::log1p(1.0 / p);
}

/// Inverse of holder_from_prob: p = 1 / (2^{1/H} - 1).
inline double prob_from_holder(double h) {
    if (!(h > 0.0 && h <= 1.0)) throw domain_error("prob_from_holder: H must lie in (0,1]");
    return 1.0 / std::expm1(std::numbers::ln2 / h);
}

/// Per-round empirical probabilities. Entry n - 1 describes rounds 1..n.
/// Ratios with an empty denominator are missing (nullopt), never zero.
struct EmpiricalStats {
    std::vector<std::optional<double>> p11;  ///< q11 / (q11 + q10)
    std::vector<std::optional<double>> p00;  ///< q00 / (q01 + q00)
    std::vector<double> p1;                  ///< h_n / n
    std::vector<std::optional<double>> h1;   ///< Hoelder estimate from p11
    std::vector<std::optional<double>> h0;   ///< Hoelder estimate from p00

    std::size_t rounds() const noexcept { return p1.size(); }
};

inline EmpiricalStats empirical_probs(const Embedding& e) {
    EmpiricalStats s;
    const std::size_t n = e.n_star();
    s.p11.reserve(n);
    s.p00.reserve(n);
    s.p1.reserve(n);
    s.h1.reserve(n);
    s.h0.reserve(n);

    PairCounts c;
    std::optional<std::uint8_t> last;
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    auto holder = [](const std::optional<double>& p) -> std::optional<double> {
        if (!p || !(*p > 0.0)) return std::nullopt;
        return holder_from_prob(*p);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t x = e.directions[i];
        c.push(last, x);
        last = x;
        const auto p11 = ratio(c.q11, c.q11 + c.q10);
        const auto p00 = ratio(c.q00, c.q01 + c.q00);
        s.p11.push_back(p11);
        s.p00.push_back(p00);
        s.p1.push_back(static_cast<double>(c.heads) / static_cast<double>(i + 1));
        s.h1.push_back(holder(p11));
        s.h0.push_back(holder(p00));
    }
    return s;
}

/// Total eta-variation, net log change at the last hit and their ratio zeta.
struct PathStats {
    double tv = 0.0;
    double l = 0.0;
    double zeta = 0.0;
};

/// Empty when there are no hits.
inline std::optional<PathStats> path_stats(const Embedding& e) {
    const std::size_t n = e.n_star();
    if (n == 0) return std::nullopt;
    std::size_t h = 0;
    for (const auto x : e.directions) h += x;
    const auto up = static_cast<double>(h);
    const auto down = static_cast<double>(n - h);
    PathStats s;
    s.tv = static_cast<double>(n) * e.grid.eta;
    s.l = e.grid.eta * (up - down);
    s.zeta = (up - down) / static_cast<double>(n);
    return s;
}

/// Lag-1 sample autocorrelation of the direction sequence; empty for fewer
/// than 3 rounds or a constant sequence.
inline std::optional<double> direction_autocorrelation(const Embedding& e) {
    const auto& d = e.directions;
    const std::size_t n = d.size();
    if (n < 3) return std::nullopt;
    double mean = 0.0;
    for (const auto x : d) mean += x;
    mean /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = d[i] - mean;
        den += dev * dev;
        if (i + 1 < n) num += dev * (d[i + 1] - mean);
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

/// Columnar file of the empirical series; missing entries are empty fields.
inline void write_stats_csv(std::ostream& out, const EmpiricalStats& s, const Embedding& e) {
    const auto saved = out.precision(15);
    auto opt = [&out](const std::optional<double>& v) {
        if (v) out << *v;
    };
    out << "# eta=" << e.grid.eta << " rho=" << e.grid.rho << " missing values are empty fields\n";
    out << "round,time,p11,p00,p1,h1,h0\n";
    for (std::size_t i = 0; i < s.rounds(); ++i) {
        out << (i + 1) << ',' << e.hit_times[i] << ',';
        opt(s.p11[i]);
        out << ',';
        opt(s.p00[i]);
        out << ',' << s.p1[i] << ',';
        opt(s.h1[i]);
        out << ',';
        opt(s.h0[i]);
        out << '\n';
    }
    out.precision(saved);
}

}  // namespace mhtest

#endif  // MHTEST_DIAGNOSTICS_HPP
