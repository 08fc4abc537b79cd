#pragma once

#include <abcrl/core.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace abcrl {

struct PendulumParams {
    double pend_mass = 2.0;  // kg
    double cart_mass = 8.0;  // kg
    double length = 0.5;     // m
    double gravity = 9.8;    // m/s^2
    double noise_level = 0.01;
    double sim_dt = 0.01;    // s, Euler sub-step

    static constexpr std::size_t size = 6;

    static PendulumParams from_vector(const ModelParams& theta) {
        if (theta.size() != size) throw std::invalid_argument("pendulum takes 6 parameters");
        PendulumParams p{theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]};
        p.validate();
        return p;
    }
    ModelParams to_vector() const { return {pend_mass, cart_mass, length, gravity, noise_level, sim_dt}; }
    void validate() const;
};

/**
 * Inverted pendulum on a cart, as used in the LSPI literature, with no track
 * limits. State is (angle rad, angular velocity rad/s) with 0 upright.
 *
 * Each control step holds the force 50 (a - 1) + noise for 0.1 s, integrated
 * with explicit Euler sub-steps of sim_dt (the last sub-step is shortened so
 * the interval is exact). Noise is uniform on +-50 noise_level newtons.
 * Reward is 1 while |angle| <= pi/2; falling past that ends the episode.
 */
class Pendulum {
public:
    using observation_type = Observation<2>;
    using params_type = PendulumParams;
    static constexpr std::size_t horizon = 1000;
    static constexpr double control_interval = 0.1;
    static constexpr double max_force = 50.0;
    static constexpr double velocity_bound = 4.0;

    explicit Pendulum(PendulumParams params = {}) : p_(params) { p_.validate(); }

    const PendulumParams& params() const { return p_; }
    std::size_t action_count() const { return 3; }
    double reward_range() const { return 1.0; }

    observation_type initial_state(Rng& rng) const {
        const double angle = uniform(rng, -0.1, 0.1);
        const double vel = uniform(rng, -0.1, 0.1);
        return {{angle, vel}};
    }

    /// Uniform over [-pi/2, pi/2] x [-4, 4].
    observation_type uniform_state(Rng& rng) const {
        const double angle = uniform(rng, -std::numbers::pi / 2, std::numbers::pi / 2);
        const double vel = uniform(rng, -velocity_bound, velocity_bound);
        return {{angle, vel}};
    }

    std::array<double, 2> state_lower() const { return {-std::numbers::pi / 2, -velocity_bound}; }
    std::array<double, 2> state_upper() const { return {std::numbers::pi / 2, velocity_bound}; }

    double angular_acceleration(double angle, double vel, double force) const {
        const double alpha = 1.0 / (p_.pend_mass + p_.cart_mass);
        const double c = std::cos(angle);
        const double num = p_.gravity * std::sin(angle) -
                           alpha * p_.pend_mass * p_.length * vel * vel * std::sin(2.0 * angle) / 2.0 -
                           alpha * c * force;
        const double den = 4.0 * p_.length / 3.0 - alpha * p_.pend_mass * p_.length * c * c;
        return num / den;
    }

    Outcome<observation_type> step(const observation_type& s, Action a, Rng& rng) const {
        const double spread = p_.noise_level * max_force;
        const double force = max_force * (static_cast<double>(a.index) - 1.0) + uniform(rng, -spread, spread);
        double angle = s[0];
        double vel = s[1];
        double remaining = control_interval;
        while (remaining > 1e-12) {
            const double h = remaining < p_.sim_dt ? remaining : p_.sim_dt;
            const double acc = angular_acceleration(angle, vel, force);
            angle += h * vel;
            vel += h * acc;
            remaining -= h;
        }
        const bool fallen = std::abs(angle) > std::numbers::pi / 2;
        return {{{angle, vel}}, fallen ? 0.0 : 1.0, fallen};
    }

private:
    PendulumParams p_;
};

inline void PendulumParams::validate() const {
    if (!(pend_mass > 0.0 && cart_mass > 0.0 && length > 0.0 && gravity > 0.0 && sim_dt > 0.0))
        throw std::invalid_argument("pendulum: masses, length, gravity and sim_dt must be positive");
    if (!(noise_level >= 0.0)) throw std::invalid_argument("pendulum: noise_level must be nonnegative");
    if (!(sim_dt <= Pendulum::control_interval))
        throw std::invalid_argument("pendulum: sim_dt cannot exceed the 0.1 s control interval");
}

} // namespace abcrl
