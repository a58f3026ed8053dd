#pragma once

#include <cstdint>
#include <random>

#include "declqr/linalg.hpp"

namespace declqr {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based child seed: independent of evaluation order, so parallel
/// replications see the same streams as serial ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// i.i.d. N(0, sigma^2) entries.
VectorXd gaussian_vector(Rng& rng, int n, double sigma);

}  // namespace declqr
