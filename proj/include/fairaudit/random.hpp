#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fairaudit {

// Derives an independent stream seed from a root seed and a task label.
// FNV-1a over the label, mixed with the root through splitmix64.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Portable pseudo-random source. Only the 64-bit engine comes from the
// standard library; every transformation is spelled out here so that draws
// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform01();
  // Uniform integer on [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal(double mean = 0.0, double std = 1.0);
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fairaudit
