#pragma once

#include <cstdint>
#include <random>

namespace nsd {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for one Monte Carlo trial; depends only on (master, trial).
Engine trial_engine(std::uint64_t master_seed, std::uint64_t trial);

}  // namespace nsd
