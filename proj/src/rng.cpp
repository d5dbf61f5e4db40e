#include "rbme/rng.hpp"

#include <cmath>

namespace rbme {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

std::vector<double> random_unit(std::size_t d, Engine& engine) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> u(d);
  double norm = 0.0;
  while (norm < 1e-12) {
    norm = 0.0;
    for (auto& x : u) {
      x = gauss(engine);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  for (auto& x : u) x /= norm;
  return u;
}

}  // namespace rbme
