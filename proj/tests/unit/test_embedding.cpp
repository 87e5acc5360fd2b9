#include "mhtest/embedding.hpp"
#include "mhtest/path_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

using mhtest::CrossingRule;
using mhtest::EmbedOptions;
using mhtest::PricePath;

TEST(Grid, LogTwoGivesUnitStep) {
    const auto g = mhtest::grid_from_eta(std::log(2.0));
    EXPECT_NEAR(g.delta, 1.0, 1e-15);
    EXPECT_NEAR(g.rho, 1.0 / 3.0, 1e-15);
}

TEST(Grid, TwoToTheMinusEight) {
    const auto g = mhtest::grid_from_eta(std::ldexp(1.0, -8));
    EXPECT_NEAR(g.delta, 0.0039138893383475734, 1e-16);
    EXPECT_NEAR(g.rho, 0.49902343874176154, 1e-16);
    EXPECT_GT(g.rho, 0.0);
    EXPECT_LT(g.rho, 0.5);
}

TEST(Grid, RhoIdentity) {
    for (double eta : {1e-6, 1e-3, 0.0078125, 0.1, 1.0, 3.0}) {
        const auto g = mhtest::grid_from_eta(eta);
        EXPECT_NEAR(g.rho, 1.0 / (1.0 + std::exp(eta)), 1e-15) << eta;
        EXPECT_NEAR(g.delta, std::exp(eta) - 1.0, 1e-15 * std::max(1.0, g.delta)) << eta;
    }
}

TEST(Grid, RejectsNonPositiveEta) {
    EXPECT_THROW(mhtest::grid_from_eta(0.0), mhtest::domain_error);
    EXPECT_THROW(mhtest::grid_from_eta(-0.1), mhtest::domain_error);
}

TEST(Embed, ConstantPathHasNoHits) {
    const auto p = PricePath::from_prices(std::vector<double>(100, 42.0));
    const auto e = mhtest::embed(p, mhtest::grid_from_eta(0.01));
    EXPECT_EQ(e.n_star(), 0u);
    EXPECT_TRUE(e.directions.empty());
}

TEST(Embed, DoubleLevelJumpEmitsTwoInterpolatedHits) {
    const auto g = mhtest::grid_from_eta(std::ldexp(1.0, -8));
    const auto p = PricePath::from_prices({100.0, 100.0 * (1 + g.delta) * (1 + g.delta)});
    const auto e = mhtest::embed(p, g);
    ASSERT_EQ(e.n_star(), 2u);
    EXPECT_EQ(e.directions, (std::vector<std::uint8_t>{1, 1}));
    EXPECT_NEAR(e.hit_times[0], 0.5, 1e-9);
    EXPECT_NEAR(e.hit_times[1], 1.0, 1e-9);
    EXPECT_NEAR(e.waiting_times[0], e.waiting_times[1], 1e-9);
    EXPECT_EQ(e.hit_indices[0], 1u);
    EXPECT_EQ(e.hit_indices[1], 1u);
}

TEST(Embed, MonotoneGridPath) {
    const auto g = mhtest::grid_from_eta(0.01);
    std::vector<double> prices;
    for (int k = 0; k <= 5; ++k) prices.push_back(100.0 * std::pow(1.0 + g.delta, k));
    const auto e = mhtest::embed(PricePath::from_prices(prices), g);
    ASSERT_EQ(e.n_star(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(e.directions[i], 1);
        EXPECT_NEAR(e.waiting_times[i], 1.0, 1e-9);
        EXPECT_NEAR(e.hit_prices[i], prices[i + 1], 1e-9 * prices[i + 1]);
    }
}

TEST(Embed, DownMovesAndReversal) {
    const auto g = mhtest::grid_from_eta(0.1);
    const double u = std::exp(0.1);
    // down three levels in one step, then up one level
    const auto p = PricePath::from_prices({100.0, 100.0 / (u * u * u) * 0.999, 100.0 / (u * u)});
    const auto e = mhtest::embed(p, g);
    EXPECT_EQ(e.directions, (std::vector<std::uint8_t>{0, 0, 0, 1}));
    EXPECT_NEAR(std::log(e.hit_prices[2] / 100.0), -0.3, 1e-12);
    EXPECT_NEAR(std::log(e.hit_prices[3] / 100.0), -0.2, 1e-12);
    EXPECT_LT(e.hit_times[0], e.hit_times[1]);
    EXPECT_LT(e.hit_times[1], e.hit_times[2]);
}

TEST(Embed, SampleOnLevelCountsAsHit) {
    const auto g = mhtest::grid_from_eta(0.05);
    const auto p = PricePath::from_prices({10.0, 10.0 * std::exp(0.05)});
    EXPECT_EQ(mhtest::embed(p, g).n_star(), 1u);
}

TEST(Embed, HorizonKeepsHitsStrictlyBefore) {
    const auto g = mhtest::grid_from_eta(0.01);
    std::vector<double> prices;
    for (int k = 0; k <= 10; ++k) prices.push_back(100.0 * std::pow(1.0 + g.delta, k));
    const auto path = PricePath::from_prices(prices);
    EmbedOptions opts;
    opts.horizon = 4.0;
    const auto e = mhtest::embed(path, g, opts);
    // hits at t = 1, 2, 3 are before T = 4; the hit at t = 4 is not.
    EXPECT_EQ(e.n_star(), 3u);
    EXPECT_LT(e.hit_times.back(), 4.0);
}

TEST(Embed, SingleHitRuleEmitsAtMostOneHitPerSample) {
    const auto g = mhtest::grid_from_eta(0.01);
    const double u = std::exp(0.01);
    const auto p = PricePath::from_prices({100.0, 100.0 * u * u * u, 100.0 * u * u * u, 100.0 * u * u * u});
    EmbedOptions opts;
    opts.rule = CrossingRule::single_hit;
    const auto e = mhtest::embed(p, g, opts);
    ASSERT_EQ(e.n_star(), 3u);
    EXPECT_EQ(e.hit_indices, (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_DOUBLE_EQ(e.hit_times[0], 1.0);
    EXPECT_NEAR(std::log(e.hit_prices[2] / 100.0), 0.03, 1e-12);
}

TEST(Embed, ReconstructsHitPricesFromDirections) {
    mhtest::GbmParams gp;
    gp.sigma = 0.3;
    gp.dt = 1e-3;
    gp.horizon = 50.0;
    gp.seed = 5;
    const auto path = mhtest::generate_gbm(gp);
    for (double eta : {0.005, 0.02, 0.2}) {
        const auto e = mhtest::embed(path, mhtest::grid_from_eta(eta));
        ASSERT_GT(e.n_star(), 0u);
        double lp = std::log(path.prices()[0]);
        for (std::size_t i = 0; i < e.n_star(); ++i) {
            lp += e.directions[i] ? eta : -eta;
            ASSERT_NEAR(std::log(e.hit_prices[i]), lp, 1e-9) << "eta " << eta << " hit " << i;
            if (i > 0) {
                ASSERT_GE(e.hit_times[i], e.hit_times[i - 1]);
            }
        }
        ASSERT_EQ(e.waiting_times.size(), e.n_star());
        ASSERT_EQ(e.hit_prices.size(), e.n_star());
    }
}

TEST(Embed, InvariantUnderPriceRescaling) {
    mhtest::GbmParams gp;
    gp.sigma = 0.25;
    gp.dt = 1e-3;
    gp.horizon = 20.0;
    gp.seed = 77;
    const auto path = mhtest::generate_gbm(gp);
    const auto g = mhtest::grid_from_eta(0.01);
    const auto base = mhtest::embed(path, g);
    for (double scale : {0.001, 3.7, 1e4}) {
        std::vector<double> scaled(path.prices().begin(), path.prices().end());
        for (double& s : scaled) s *= scale;
        const PricePath sp(std::vector<double>(path.times().begin(), path.times().end()), scaled);
        const auto e = mhtest::embed(sp, g);
        EXPECT_EQ(e.directions, base.directions) << scale;
        ASSERT_EQ(e.waiting_times.size(), base.waiting_times.size());
        for (std::size_t i = 0; i < e.n_star(); ++i) EXPECT_NEAR(e.waiting_times[i], base.waiting_times[i], 1e-9);
    }
}

TEST(Counts, AlternatingSequence) {
    const std::vector<std::uint8_t> x{1, 0, 1, 0};
    const auto c = mhtest::counts(x, 4);
    EXPECT_EQ(c.heads, 2u);
    EXPECT_EQ(c.tails, 2u);
    EXPECT_EQ(c.q11, 0u);
    EXPECT_EQ(c.q10, 2u);
    EXPECT_EQ(c.q01, 1u);
    EXPECT_EQ(c.q00, 0u);
}

TEST(Counts, EmptyPrefix) {
    const std::vector<std::uint8_t> x{1, 1, 0};
    const auto c = mhtest::counts(x, 0);
    EXPECT_EQ(c.heads + c.tails + c.q11 + c.q10 + c.q01 + c.q00, 0u);
}

TEST(Counts, AllUp) {
    const std::vector<std::uint8_t> x(5, 1);
    const auto c = mhtest::counts(x, 5);
    EXPECT_EQ(c.heads, 5u);
    EXPECT_EQ(c.q11, 4u);
    EXPECT_EQ(c.tails + c.q10 + c.q01 + c.q00, 0u);
}

TEST(Counts, SumsMatchPrefixLength) {
    std::vector<std::uint8_t> x;
    std::uint32_t state = 12345;
    for (int i = 0; i < 500; ++i) {
        state = state * 1664525u + 1013904223u;
        x.push_back(static_cast<std::uint8_t>(state >> 31));
    }
    for (std::size_t n = 1; n <= x.size(); n += 37) {
        const auto c = mhtest::counts(x, n);
        EXPECT_EQ(c.heads + c.tails, n);
        EXPECT_EQ(c.q11 + c.q10 + c.q01 + c.q00, n - 1);
    }
}

TEST(Counts, OutOfRange) {
    const std::vector<std::uint8_t> x{1, 0};
    EXPECT_THROW(mhtest::counts(x, 3), mhtest::domain_error);
}

TEST(Embed, AuditFileHasOneRowPerHit) {
    const auto g = mhtest::grid_from_eta(0.01);
    const auto p = PricePath::from_prices({100.0, 100.0 * std::exp(0.025), 100.0});
    const auto e = mhtest::embed(p, g);
    std::ostringstream out;
    mhtest::write_embedding_csv(out, e);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# eta=", 0), 0u);
    std::getline(in, line);
    EXPECT_EQ(line, "hit,sample_index,time,price,direction,waiting_time");
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, e.n_star());
}
