#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cmle/linalg.hpp"

namespace cmle {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective mix of the 64-bit input.
std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive hash of a list of integers, used to derive independent
/// streams from (seed, n, p, replication) style keys.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// rows x cols matrix of independent N(0, 1) draws, filled row by row.
Mat standard_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace cmle
