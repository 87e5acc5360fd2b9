#include "mhtest/diagnostics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace {

mhtest::Embedding embedding_of(std::vector<std::uint8_t> dirs, double eta = 0.01) {
    mhtest::Embedding e;
    e.grid = mhtest::grid_from_eta(eta);
    e.directions = std::move(dirs);
    for (std::size_t i = 0; i < e.directions.size(); ++i) {
        e.hit_times.push_back(static_cast<double>(i + 1));
        e.waiting_times.push_back(1.0);
    }
    return e;
}

}  // namespace

TEST(HolderFromProb, Examples) {
    EXPECT_NEAR(mhtest::holder_from_prob(1.0 / 3.0), 0.5, 1e-15);
    EXPECT_NEAR(mhtest::holder_from_prob(1.0), 1.0, 1e-15);
    EXPECT_NEAR(mhtest::holder_from_prob(0.423), 0.57136128354669314, 1e-12);
    EXPECT_THROW(mhtest::holder_from_prob(0.0), mhtest::domain_error);
    EXPECT_THROW(mhtest::holder_from_prob(-0.1), mhtest::domain_error);
}

TEST(HolderFromProb, RoundTripAndMonotone) {
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double p = i / 1000.0;
        const double h = mhtest::holder_from_prob(p);
        EXPECT_GT(h, prev);
        prev = h;
        EXPECT_NEAR(mhtest::prob_from_holder(h), p, 1e-12 * p);
        // 1 / (2^{1/H} - 1) = p, evaluated directly
        EXPECT_NEAR(1.0 / (std::pow(2.0, 1.0 / h) - 1.0), p, 1e-12);
    }
}

TEST(EmpiricalProbs, PerfectAlternation) {
    std::vector<std::uint8_t> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<std::uint8_t>(i % 2 == 0);
    const auto s = mhtest::empirical_probs(embedding_of(x));
    ASSERT_EQ(s.rounds(), 1000u);
    EXPECT_FALSE(s.p11[0].has_value());
    EXPECT_DOUBLE_EQ(*s.p11.back(), 0.0);
    EXPECT_DOUBLE_EQ(*s.p00.back(), 0.0);
    EXPECT_DOUBLE_EQ(s.p1.back(), 0.5);
    EXPECT_FALSE(s.h1.back().has_value());  // zero continuation probability has no finite exponent
}

TEST(EmpiricalProbs, AllUp) {
    const auto s = mhtest::empirical_probs(embedding_of(std::vector<std::uint8_t>(20, 1)));
    EXPECT_DOUBLE_EQ(*s.p11.back(), 1.0);
    EXPECT_FALSE(s.p00.back().has_value());
    EXPECT_DOUBLE_EQ(*s.h1.back(), 1.0);
    EXPECT_FALSE(s.h0.back().has_value());
}

TEST(EmpiricalProbs, UsesPredecessorCounts) {
    // x = 1 1 0 1: pairs (11)(10)(01); predecessors that are 1: x1, x2 -> p11 = 1/2.
    const auto s = mhtest::empirical_probs(embedding_of({1, 1, 0, 1}));
    EXPECT_DOUBLE_EQ(*s.p11[3], 0.5);
    EXPECT_DOUBLE_EQ(*s.p00[3], 0.0);
    EXPECT_DOUBLE_EQ(s.p1[3], 0.75);
    EXPECT_DOUBLE_EQ(*s.p11[1], 1.0);
    EXPECT_FALSE(s.p00[1].has_value());
}

TEST(PathStats, Examples) {
    EXPECT_FALSE(mhtest::path_stats(embedding_of({})).has_value());
    const auto up = *mhtest::path_stats(embedding_of({1, 1, 1}, 0.02));
    EXPECT_DOUBLE_EQ(up.zeta, 1.0);
    EXPECT_DOUBLE_EQ(up.tv, 0.06);
    EXPECT_NEAR(up.l, 0.06, 1e-15);
    const auto flat = *mhtest::path_stats(embedding_of({1, 0, 0, 1}, 0.02));
    EXPECT_DOUBLE_EQ(flat.zeta, 0.0);
}

TEST(PathStats, TvIsSumOfAbsoluteLogIncrements) {
    mhtest::GbmParams gp;
    gp.sigma = 0.3;
    gp.dt = 1e-3;
    gp.horizon = 30.0;
    const auto path = mhtest::generate_gbm(gp);
    const auto e = mhtest::embed(path, mhtest::grid_from_eta(0.01));
    const auto s = *mhtest::path_stats(e);
    double tv = 0.0;
    double prev = std::log(path.prices()[0]);
    for (double p : e.hit_prices) {
        tv += std::fabs(std::log(p) - prev);
        prev = std::log(p);
    }
    EXPECT_NEAR(s.tv, tv, 1e-9);
    EXPECT_NEAR(s.l, std::log(e.hit_prices.back() / path.prices()[0]), 1e-9);
    EXPECT_LE(std::fabs(s.zeta), 1.0);
}

TEST(DirectionAutocorrelation, Basics) {
    EXPECT_FALSE(mhtest::direction_autocorrelation(embedding_of({1, 0})).has_value());
    EXPECT_FALSE(mhtest::direction_autocorrelation(embedding_of({1, 1, 1, 1})).has_value());
    std::vector<std::uint8_t> alt(100);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = static_cast<std::uint8_t>(i % 2);
    EXPECT_NEAR(*mhtest::direction_autocorrelation(embedding_of(alt)), -0.99, 1e-12);
}

TEST(StatsCsv, MissingValuesAreEmptyFields) {
    const auto e = embedding_of({1, 1, 0});
    std::ostringstream out;
    mhtest::write_stats_csv(out, mhtest::empirical_probs(e), e);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "round,time,p11,p00,p1,h1,h0");
    std::getline(in, line);
    EXPECT_EQ(line, "1,1,,,1,,");
}
