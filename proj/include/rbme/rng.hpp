#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace rbme {

using Engine = std::mt19937_64;

/// One step of the splitmix64 sequence; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministically combines a base seed with stream indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

Engine make_engine(std::uint64_t seed);

/// Uniform direction on the unit sphere in R^d.
std::vector<double> random_unit(std::size_t d, Engine& engine);

}  // namespace rbme
