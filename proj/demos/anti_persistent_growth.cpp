// Markov strategy on an anti-persistent price path.
//
// Generates an exponentiated fBm path with H = 0.4, embeds it on a grid, and
// compares the per-hit log-capital growth of the beta-binomial and Markov
// strategies with the theoretical Markov rate.

#include "mhtest/mhtest.hpp"

#include <cmath>
#include <cstdio>

int main() {
    mhtest::FbmParams f;
    f.hurst = 0.4;
    f.sigma = 0.001;
    f.n = std::size_t{1} << 22;
    f.seed = 2024;
    const auto path = mhtest::generate_fbm_exp(f, "fbm-0.4");

    // roughly 1000 samples between consecutive hits
    const double eta = f.sigma * std::pow(1000.0, f.hurst);
    const auto e = mhtest::embed(path, mhtest::grid_from_eta(eta));
    const auto params = mhtest::BetaBinomialParams::for_eta(eta);
    const auto bb = mhtest::run_bb(e, params);
    const auto mk = mhtest::run_markov(e, params);

    mhtest::TestConfig cfg;
    cfg.alpha = 1e-3;
    const auto outcome = mhtest::run_stopping_test(mk, cfg, e.hit_times);
    const auto stats = mhtest::empirical_probs(e);

    std::printf("samples          %zu\n", path.size());
    std::printf("eta              %.6f (rho = %.6f)\n", eta, e.grid.rho);
    std::printf("hits n*          %zu\n", e.n_star());
    std::printf("p11 / p00        %.4f / %.4f\n", stats.p11.back().value_or(NAN), stats.p00.back().value_or(NAN));
    std::printf("H from p11       %.4f\n", stats.h1.back().value_or(NAN));
    std::printf("bb growth/hit    %.5f\n", bb.final_log_capital() / static_cast<double>(e.n_star()));
    std::printf("markov growth    %.5f (theory %.5f)\n", mk.final_log_capital() / static_cast<double>(e.n_star()),
                mhtest::markov_growth_rate(f.hurst));
    if (outcome.rejected) {
        std::printf("rejected at round %zu (alpha = %.0e)\n", *outcome.first_crossing_round, cfg.alpha);
    } else {
        std::printf("not rejected (p = %.3g)\n", outcome.p_value);
    }
    return 0;
}
