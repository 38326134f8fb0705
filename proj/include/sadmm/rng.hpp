#ifndef SADMM_RNG_HPP
#define SADMM_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace sadmm {

// splitmix64 step; used to derive decorrelated substream seeds from a master seed.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Deterministic seed for substream `stream_id` of master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

// Deterministic random stream with explicit, platform-independent distributions.
// std::mt19937_64 output is fully specified by the standard; the distribution
// transforms here are our own so results are bit-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (caches the second deviate).
  double normal();

  // Unbiased uniform index in [0, n) via rejection sampling.
  std::size_t uniform_index(std::size_t n);

  // k distinct indices from [0, n), partial Fisher-Yates order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sadmm

#endif  // SADMM_RNG_HPP
