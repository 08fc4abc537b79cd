#include <abcrl/abc.hpp>
#include <abcrl/lspi.hpp>
#include <abcrl/verify.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace abcrl;

namespace {

using OracleObs = Observation<1>;

/// Distance is the same constant for every pair of histories.
struct ConstantDistance {
    using value_type = int;
    double d;
    template <class Obs>
    int compute(const History<Obs>&) const { return 0; }
    double distance(int, int) const { return d; }
};

struct OracleSetup {
    DiscretePrior prior = DiscretePrior::uniform_over({{0.2}, {0.5}, {0.8}});
    UniformRandomPolicy policy{2};
    ReplaySimulator<DiscreteOracle, UniformRandomPolicy> sim{policy, 1, 10};
    OracleHistory observed;

    OracleSetup() {
        Rng rng(99);
        observed = collect_history(DiscreteOracle({0.8}), policy, 1, 10, rng);
    }
};

/// LSPI with a tabular basis on 200 uniform-random episodes of the model.
GreedyPolicy<TabularBasis> oracle_solver(const ModelParams& theta, std::uint64_t seed) {
    Rng rng(seed);
    const auto h = collect_history(DiscreteOracle({theta[0]}), UniformRandomPolicy(2), 200, 10, rng);
    const auto samples = transitions_of(h);
    TabularBasis basis(2, 2);
    auto res = lspi_train(std::span<const TransitionSample<OracleObs>>(samples), basis, DiscountFactor(0.9));
    return GreedyPolicy<TabularBasis>(basis, res.weights);
}

} // namespace

TEST(AbcSample, InfiniteThresholdAcceptsEverything) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = std::numeric_limits<double>::infinity();
    cfg.max_samples = 50;
    auto out = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 1);
    EXPECT_EQ(out.accepted.size(), 50u);
    EXPECT_EQ(out.attempts, 50u);
    cfg.target = 7;
    out = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 1);
    EXPECT_EQ(out.accepted.size(), 7u);
    EXPECT_EQ(out.attempts, 7u);
}

TEST(AbcSample, AcceptedDistancesAreBelowThreshold) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.3;
    cfg.max_samples = 2000;
    const auto out = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 4);
    ASSERT_FALSE(out.accepted.empty());
    for (const auto& a : out.accepted) EXPECT_LT(a.distance, 0.3);
}

TEST(AbcSample, ZeroThresholdMeansIdenticalStatistic) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.0;
    cfg.max_samples = 20000;
    const auto out = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 5);
    ASSERT_FALSE(out.accepted.empty());
    for (const auto& a : out.accepted) EXPECT_EQ(a.distance, 0.0);
}

TEST(AbcSample, SmallerThresholdAcceptsASubsetOfTheSameStream) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.max_samples = 3000;
    cfg.epsilon = 0.5;
    const auto wide = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 8);
    cfg.epsilon = 0.2;
    const auto narrow = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 8);
    EXPECT_LT(narrow.accepted.size(), wide.accepted.size());
    std::size_t j = 0;
    for (const auto& a : narrow.accepted) {
        while (j < wide.accepted.size() && wide.accepted[j].candidate_index < a.candidate_index) ++j;
        ASSERT_LT(j, wide.accepted.size());
        EXPECT_EQ(wide.accepted[j].candidate_index, a.candidate_index);
        EXPECT_EQ(wide.accepted[j].theta, a.theta);
    }
}

TEST(AbcSample, CandidateLogMatchesAcceptances) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.3;
    cfg.max_samples = 500;
    cfg.record_candidates = true;
    const auto out = abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, 3);
    ASSERT_EQ(out.candidates.size(), 500u);
    std::size_t accepted = 0;
    for (const auto& c : out.candidates) {
        EXPECT_EQ(c.accepted, abc_accepts(c.distance, 0.3));
        accepted += c.accepted;
    }
    EXPECT_EQ(accepted, out.accepted.size());
}

TEST(AbcSample, PendulumAttemptsBoundedByBudget) {
    const Pendulum real;
    const UniformRandomPolicy policy(3);
    Rng rng(1);
    const auto observed = collect_history(real, policy, 10, Pendulum::horizon, rng);
    const ReplaySimulator<Pendulum, UniformRandomPolicy> sim(policy, 100, Pendulum::horizon);
    AbcConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.max_samples = 1000;
    const auto out = abc_sample(PriorBox::centered(PendulumParams{}.to_vector()), observed, sim,
                                HoeffdingStatistic(DiscountFactor(0.99), 1.0, {}), cfg, 2);
    EXPECT_LE(out.attempts, 1000u);
    EXPECT_EQ(out.attempts, 1000u);
}

TEST(AbcSample, RejectsHistoryFromAnotherPolicy) {
    OracleSetup s;
    s.observed.policy_id = "someone-else";
    EXPECT_THROW(abc_sample(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), AbcConfig{}, 1),
                 std::invalid_argument);
}

TEST(AbcSample, MatchesExactPosteriorAtZeroThreshold) {
    const auto r = run_exact_match_check({});
    EXPECT_LT(r.total_variation, 0.05);
    EXPECT_EQ(r.attempts, 100000u);
}

TEST(AbcAdaptive, FirstRoundSuccessKeepsThreshold) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.5;
    cfg.epsilon_doubling = true;
    const auto out = abc_sample_adaptive(s.prior, s.observed, s.sim, ConstantDistance{0.25}, cfg, 1);
    EXPECT_EQ(out.final_epsilon, 0.5);
    EXPECT_EQ(out.accepted.front().round, 0u);
}

TEST(AbcAdaptive, DoublesUntilTheDistanceFits) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.01;
    cfg.max_samples = 5;
    cfg.epsilon_doubling = true;
    // 0.01 * 2^2 = 0.04 < D = 0.05 < 0.08 = 0.01 * 2^3
    const auto out = abc_sample_adaptive(s.prior, s.observed, s.sim, ConstantDistance{0.05}, cfg, 1);
    EXPECT_DOUBLE_EQ(out.final_epsilon, 0.08);
    EXPECT_EQ(out.accepted.front().round, 3u);
    EXPECT_EQ(out.attempts, 3 * 5u + 5u);
}

TEST(AbcAdaptive, InfiniteDistanceExhausts) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.max_samples = 3;
    cfg.max_doublings = 4;
    cfg.epsilon_doubling = true;
    EXPECT_THROW(abc_sample_adaptive(s.prior, s.observed, s.sim,
                                     ConstantDistance{std::numeric_limits<double>::infinity()}, cfg, 1),
                 NoModelAccepted);
}

TEST(AbcRl, PointPriorRunsSolverOnTruth) {
    const ModelParams star = PendulumParams{}.to_vector();
    const UniformRandomPolicy policy(3);
    Rng rng(1);
    const auto observed = collect_history(Pendulum{}, policy, 5, Pendulum::horizon, rng);
    const ReplaySimulator<Pendulum, UniformRandomPolicy> sim(policy, 10, Pendulum::horizon);
    ModelParams seen;
    auto solver = [&](const ModelParams& theta, std::uint64_t) {
        seen = theta;
        return theta;
    };
    const auto res = abc_rl(PriorBox::point(star), observed, sim, HoeffdingStatistic(DiscountFactor(0.99), 1.0, {}),
                            AbcConfig{}, solver, 3);
    EXPECT_EQ(seen, star);
    EXPECT_EQ(res.policy, star);
    EXPECT_EQ(res.model(), star);
}

TEST(AbcRl, OraclePolicyIsGreedyForAcceptedModel) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.05;
    const auto res = abc_rl(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, oracle_solver, 11);
    // Value iteration on the accepted model: advancing earns p now and leaves the
    // continuation unchanged, so action 1 is optimal in both states for any p > 0.
    const double p = res.model()[0], gamma = 0.9;
    double v = 0.0;
    for (int i = 0; i < 1000; ++i) v = std::max(p + gamma * v, gamma * v);
    ASSERT_GT(p + gamma * v, gamma * v);
    Rng rng(0);
    for (double st : {0.0, 1.0}) EXPECT_EQ(res.policy.act({}, OracleObs{{st}}, rng).index, 1u);
}

TEST(AbcRl, SeededRunsRepeatExactly) {
    OracleSetup s;
    AbcConfig cfg;
    cfg.epsilon = 0.05;
    const auto a = abc_rl(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, oracle_solver, 17);
    const auto b = abc_rl(s.prior, s.observed, s.sim, TransitionCountStatistic(2, 2), cfg, oracle_solver, 17);
    EXPECT_EQ(a.model(), b.model());
    EXPECT_EQ(a.samples.accepted.front().candidate_index, b.samples.accepted.front().candidate_index);
    EXPECT_TRUE(a.policy.weights().w == b.policy.weights().w);
}

TEST(AbcConfig, Validation) {
    AbcConfig cfg;
    cfg.epsilon = -1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.epsilon = 0.1;
    cfg.max_samples = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
