#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>

namespace sere {

// Reproducible random numbers. The engine is std::mt19937_64, but every
// distribution transform is written out here because the standard library's
// distribution objects are implementation-defined: relying on them would make
// "same seed, same bytes" hold on one toolchain only.
//
// Stream splitting: independent per-purpose generators are derived as
// Rng(derive_seed(base_seed, tag)) with a documented mix (FNV-1a of the tag
// XORed into the seed, then SplitMix64). Tags in use: "truth", "gps", "toa",
// "tdoa", "acc", "outlier", "init".
uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(const std::string& s);
uint64_t derive_seed(uint64_t base_seed, const std::string& tag);

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) from the top 53 bits of one engine draw.
  double uniform();

  // Standard normal via the trigonometric Box-Muller transform; generates
  // pairs and caches the second value.
  double gauss();

  Eigen::VectorXd gauss_vector(int n);

  // Uniform integer in [0, n) without modulo bias (rejection sampling).
  uint64_t uniform_int(uint64_t n);

  // Bernoulli(p) event.
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sere
