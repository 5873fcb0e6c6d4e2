#include "nsd/rng.hpp"

namespace nsd {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Engine trial_engine(std::uint64_t master_seed, std::uint64_t trial) {
    std::uint64_t a = splitmix64(master_seed);
    std::uint64_t b = splitmix64(a ^ splitmix64(trial + 0x632be59bd9b4e019ull));
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
    return Engine(seq);
}

}  // namespace nsd
