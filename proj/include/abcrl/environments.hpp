#pragma once

#include <abcrl/env/mountain_car.hpp>
#include <abcrl/env/oracle.hpp>
#include <abcrl/env/pendulum.hpp>
#include <abcrl/env/prior.hpp>

namespace abcrl {

/// Builds a family member from its parameter vector.
template <class E>
E make_environment(const ModelParams& theta) {
    return E(E::params_type::from_vector(theta));
}

} // namespace abcrl
