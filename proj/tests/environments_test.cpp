#include <abcrl/environments.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace abcrl;

namespace {

MountainCar noiseless_car() {
    MountainCarParams p;
    p.noise_level = 0.0;
    return MountainCar(p);
}

Pendulum noiseless_pendulum() {
    PendulumParams p;
    p.noise_level = 0.0;
    return Pendulum(p);
}

} // namespace

TEST(MountainCar, ReachingTheGoalTerminates) {
    Rng rng(1);
    const auto env = noiseless_car();
    const auto out = env.step({{0.5 - 1e-9, 0.07}}, Action{2}, rng);
    EXPECT_TRUE(out.terminal);
    EXPECT_EQ(out.reward, -1.0);
}

TEST(MountainCar, CoastingFromRestFollowsGravity) {
    Rng rng(1);
    const auto out = noiseless_car().step({{0.0, 0.0}}, Action{1}, rng);
    EXPECT_DOUBLE_EQ(out.next[1], -0.0025);
    EXPECT_DOUBLE_EQ(out.next[0], -0.0025);
    EXPECT_FALSE(out.terminal);
}

TEST(MountainCar, ThrottleAddsMaxAcceleration) {
    Rng rng(1);
    const auto env = noiseless_car();
    const double pos = -0.5;
    const auto out = env.step({{pos, 0.01}}, Action{2}, rng);
    EXPECT_NEAR(out.next[1], 0.01 + 0.001 - 0.0025 * std::cos(3.0 * pos), 1e-15);
}

TEST(MountainCar, RewardIsAlwaysMinusOne) {
    Rng rng(3);
    const MountainCar env;
    for (int i = 0; i < 2000; ++i) {
        const auto s = env.uniform_state(rng);
        const auto out = env.step(s, Action{uniform_index(rng, 3)}, rng);
        ASSERT_EQ(out.reward, -1.0);
        ASSERT_GE(out.next[0], -1.2);
        ASSERT_LE(out.next[0], 0.5);
        ASSERT_LE(std::abs(out.next[1]), 0.07);
    }
}

TEST(MountainCar, LeftWallStopsTheCar) {
    Rng rng(1);
    const auto out = noiseless_car().step({{-1.19, -0.07}}, Action{0}, rng);
    EXPECT_EQ(out.next[0], -1.2);
    EXPECT_EQ(out.next[1], 0.0);
}

TEST(MountainCar, InitialStateRange) {
    Rng rng(2);
    const MountainCar env;
    for (int i = 0; i < 1000; ++i) {
        const auto s = env.initial_state(rng);
        EXPECT_GE(s[0], -1.2);
        EXPECT_LT(s[0], 0.1);
        EXPECT_EQ(s[1], 0.0);
    }
}

TEST(MountainCar, RejectsInvertedBox) {
    MountainCarParams p;
    p.pos_lower = 1.0;
    EXPECT_THROW(MountainCar{p}, std::invalid_argument);
}

TEST(Pendulum, PastHorizontalIsTerminalWithZeroReward) {
    Rng rng(1);
    const Pendulum env;
    for (std::size_t a = 0; a < 3; ++a) {
        const auto out = env.step({{std::numbers::pi / 2 + 0.01, 0.0}}, Action{a}, rng);
        EXPECT_TRUE(out.terminal);
        EXPECT_EQ(out.reward, 0.0);
    }
}

TEST(Pendulum, UprightRestIsAFixedPoint) {
    Rng rng(1);
    const auto out = noiseless_pendulum().step({{0.0, 0.0}}, Action{1}, rng);
    EXPECT_EQ(out.next[0], 0.0);
    EXPECT_EQ(out.next[1], 0.0);
    EXPECT_EQ(out.reward, 1.0);
    EXPECT_FALSE(out.terminal);
}

TEST(Pendulum, GravityTipsATiltedPoleFurther) {
    // Reference: fine RK4 integration of the same dynamics over one control interval.
    const double g = 9.8, m = 2.0, M = 8.0, l = 0.5;
    auto accel = [&](double x, double v) {
        const double alpha = 1.0 / (m + M);
        return (g * std::sin(x) - alpha * m * l * v * v * std::sin(2 * x) / 2) /
               (4 * l / 3 - alpha * m * l * std::cos(x) * std::cos(x));
    };
    double x = 0.05, v = 0.0;
    const double h = 1e-4;
    for (int i = 0; i < 1000; ++i) {
        const double k1x = v, k1v = accel(x, v);
        const double k2x = v + h / 2 * k1v, k2v = accel(x + h / 2 * k1x, v + h / 2 * k1v);
        const double k3x = v + h / 2 * k2v, k3v = accel(x + h / 2 * k2x, v + h / 2 * k2v);
        const double k4x = v + h * k3v, k4v = accel(x + h * k3x, v + h * k3v);
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    Rng rng(1);
    const auto out = noiseless_pendulum().step({{0.05, 0.0}}, Action{1}, rng);
    EXPECT_GT(out.next[0], 0.05);
    EXPECT_GT(out.next[1], 0.0);
    // First-order Euler with 0.01 s sub-steps lags the reference displacement by about 10%.
    EXPECT_NEAR(out.next[0] - 0.05, x - 0.05, 0.15 * (x - 0.05));
}

TEST(Pendulum, PushRightAcceleratesPoleLeft) {
    Rng rng(1);
    const auto out = noiseless_pendulum().step({{0.0, 0.0}}, Action{2}, rng);
    EXPECT_LT(out.next[1], 0.0);
}

TEST(Pendulum, SubStepMustFitTheControlInterval) {
    PendulumParams p;
    p.sim_dt = 0.2;
    EXPECT_THROW(Pendulum{p}, std::invalid_argument);
}

TEST(Pendulum, ShortenedLastSubStepCoversTheInterval) {
    // sim_dt 0.03 gives sub-steps 0.03, 0.03, 0.03, 0.01; with constant velocity
    // and no torque the angle advances by exactly 0.1 * velocity.
    PendulumParams p;
    p.noise_level = 0.0;
    p.sim_dt = 0.03;
    p.gravity = 1e-300;
    Rng rng(1);
    const auto out = Pendulum(p).step({{0.0, 1e-9}}, Action{1}, rng);
    EXPECT_NEAR(out.next[0], 1e-10, 1e-22);
}

TEST(Oracle, CertainSuccess) {
    Rng rng(1);
    const DiscreteOracle env({1.0});
    for (int i = 0; i < 100; ++i) {
        const auto out = env.step({{static_cast<double>(i % 2)}}, Action{1}, rng);
        EXPECT_EQ(out.next[0], 1.0);
        EXPECT_EQ(out.reward, 1.0);
    }
}

TEST(Oracle, ResetIsDeterministic) {
    Rng rng(1);
    const DiscreteOracle env({0.9});
    for (int i = 0; i < 100; ++i) {
        const auto out = env.step({{1.0}}, Action{0}, rng);
        EXPECT_EQ(out.next[0], 0.0);
        EXPECT_EQ(out.reward, 0.0);
    }
}

TEST(Oracle, EmpiricalSuccessRateMatches) {
    Rng rng(12345);
    const DiscreteOracle env({0.5});
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += env.step({{0.0}}, Action{1}, rng).next[0] == 1.0;
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.5, 0.01);
}

TEST(Oracle, TransitionProbabilitiesSumToOne) {
    const DiscreteOracle env({0.3});
    for (std::size_t a = 0; a < 2; ++a)
        EXPECT_DOUBLE_EQ(env.transition_probability(0, Action{a}, 0) + env.transition_probability(0, Action{a}, 1), 1.0);
    EXPECT_DOUBLE_EQ(env.transition_probability(1, Action{1}, 1), 0.3);
}

TEST(Oracle, RejectsProbabilityOutsideUnitInterval) {
    EXPECT_THROW(DiscreteOracle({1.5}), std::invalid_argument);
}

TEST(PriorBox, CenteredBoxStaysInsideHalfToOneAndHalf) {
    const auto box = PriorBox::centered({0.5, -1.2});
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const auto t = box.sample(rng);
        ASSERT_GE(t[0], 0.25);
        ASSERT_LE(t[0], 0.75);
        ASSERT_GE(t[1], -1.8);
        ASSERT_LE(t[1], -0.6);
        ASSERT_TRUE(box.contains(t));
    }
}

TEST(PriorBox, SampleMeanIsCentre) {
    const auto box = PriorBox::centered({0.5});
    Rng rng(77);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += box.sample(rng)[0];
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(PriorBox, PointMassReturnsTheCentre) {
    const auto box = PriorBox::point({1.0, 2.0});
    Rng rng(1);
    EXPECT_EQ(box.sample(rng), (ModelParams{1.0, 2.0}));
}

TEST(DiscretePrior, FrequenciesFollowWeights) {
    const DiscretePrior prior({{0.2}, {0.5}, {0.8}}, {1.0, 2.0, 1.0});
    Rng rng(3);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 40000; ++i) ++counts[prior.sample_index(rng)];
    EXPECT_NEAR(counts[1] / 40000.0, 0.5, 0.01);
    EXPECT_NEAR(counts[0] / 40000.0, 0.25, 0.01);
}

TEST(Params, ParseAndFormatRoundTrip) {
    const ModelParams theta = PendulumParams{}.to_vector();
    EXPECT_EQ(parse_params(format_params(theta)), theta);
    EXPECT_THROW(parse_params("1,abc"), std::invalid_argument);
}

TEST(Params, MakeEnvironmentFromVector) {
    const auto env = make_environment<MountainCar>(MountainCarParams{}.to_vector());
    EXPECT_EQ(env.params().gravity_coeff, 0.0025);
    EXPECT_THROW(make_environment<Pendulum>({1.0}), std::invalid_argument);
}
