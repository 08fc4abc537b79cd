#pragma once

#include <abcrl/core.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace abcrl {

/// Generalised mountain car. Positions in m, velocities in m/s per step.
struct MountainCarParams {
    double pos_upper = 0.5;
    double pos_lower = -1.2;
    double vel_upper = 0.07;
    double vel_lower = -0.07;
    double max_accel = 0.001;
    double gravity_coeff = 0.0025;
    double noise_level = 0.2;

    static constexpr std::size_t size = 7;

    static MountainCarParams from_vector(const ModelParams& theta) {
        if (theta.size() != size) throw std::invalid_argument("mountain car takes 7 parameters");
        MountainCarParams p{theta[0], theta[1], theta[2], theta[3], theta[4], theta[5], theta[6]};
        p.validate();
        return p;
    }
    ModelParams to_vector() const {
        return {pos_upper, pos_lower, vel_upper, vel_lower, max_accel, gravity_coeff, noise_level};
    }
    void validate() const {
        if (!(pos_upper > pos_lower)) throw std::invalid_argument("mountain car: pos_upper must exceed pos_lower");
        if (!(vel_upper > vel_lower)) throw std::invalid_argument("mountain car: vel_upper must exceed vel_lower");
        if (!(max_accel > 0.0)) throw std::invalid_argument("mountain car: max_accel must be positive");
        if (!(gravity_coeff > 0.0)) throw std::invalid_argument("mountain car: gravity_coeff must be positive");
        if (!(noise_level >= 0.0)) throw std::invalid_argument("mountain car: noise_level must be nonnegative");
    }
};

/**
 * Sutton and Barto's mountain car with its constants exposed as parameters.
 *
 *   vel' = clamp(vel + max_accel (a - 1) - gravity_coeff cos(3 pos) + noise, vel bounds)
 *   pos' = clamp(pos + vel', pos bounds), vel' = 0 on hitting the left wall
 *
 * The noise term is uniform on +-noise_level * max_accel. Reward is -1 per
 * step; the episode ends once pos' reaches pos_upper.
 */
class MountainCar {
public:
    using observation_type = Observation<2>;
    using params_type = MountainCarParams;
    static constexpr std::size_t horizon = 1000;

    explicit MountainCar(MountainCarParams params = {}) : p_(params) { p_.validate(); }

    const MountainCarParams& params() const { return p_; }
    std::size_t action_count() const { return 3; }
    double reward_range() const { return 1.0; }

    /// pos ~ U(pos_lower, 0.2 pos_upper), vel = 0.
    observation_type initial_state(Rng& rng) const {
        return {{uniform(rng, p_.pos_lower, 0.2 * p_.pos_upper), 0.0}};
    }

    observation_type uniform_state(Rng& rng) const {
        const double pos = uniform(rng, p_.pos_lower, p_.pos_upper);
        const double vel = uniform(rng, p_.vel_lower, p_.vel_upper);
        return {{pos, vel}};
    }

    std::array<double, 2> state_lower() const { return {p_.pos_lower, p_.vel_lower}; }
    std::array<double, 2> state_upper() const { return {p_.pos_upper, p_.vel_upper}; }

    Outcome<observation_type> step(const observation_type& s, Action a, Rng& rng) const {
        const double spread = p_.noise_level * p_.max_accel;
        const double noise = uniform(rng, -spread, spread);
        const double push = static_cast<double>(a.index) - 1.0;
        double vel = s[1] + p_.max_accel * push - p_.gravity_coeff * std::cos(3.0 * s[0]) + noise;
        vel = std::clamp(vel, p_.vel_lower, p_.vel_upper);
        double pos = std::clamp(s[0] + vel, p_.pos_lower, p_.pos_upper);
        if (pos <= p_.pos_lower) vel = 0.0;
        const bool done = pos >= p_.pos_upper;
        return {{{pos, vel}}, -1.0, done};
    }

private:
    MountainCarParams p_;
};

} // namespace abcrl
