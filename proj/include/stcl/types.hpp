#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

namespace stcl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Deterministic, platform-independent RNG. std::mt19937 with the standard
// distributions is implementation-defined in its output stream, so we
// hand-roll splitmix64 plus the few distributions we need.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  Index uniform_index(Index n) {
    return static_cast<Index>(uniform() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from (seed, index); used to make
// per-chain sampling order-independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace stcl
