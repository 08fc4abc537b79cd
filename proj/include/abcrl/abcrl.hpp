#pragma once

#include <abcrl/abc.hpp>
#include <abcrl/analysis.hpp>
#include <abcrl/core.hpp>
#include <abcrl/environments.hpp>
#include <abcrl/harness.hpp>
#include <abcrl/lspi.hpp>
#include <abcrl/random.hpp>
#include <abcrl/statistics.hpp>
#include <abcrl/verify.hpp>
