// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_RNG_HPP
#define STAGGER_RNG_HPP

#include <cstdint>
#include <vector>

namespace stagger {

// splitmix64 step: advances *state and returns the next output. Used both to
// expand seeds into xoshiro state and as the mixing function of hash64.
std::uint64_t splitmix64(std::uint64_t* state);

// Order-sensitive 64-bit combiner: h = finalize(a) combined with b via the
// boost-style hash_combine recipe, with the splitmix64 finalizer as the mixer.
// hash64(a, b) != hash64(b, a) in general; used to derive stream seeds such as
// hash64(base_seed, replication) and fold assignments.
std::uint64_t hash64(std::uint64_t a, std::uint64_t b);

// xoshiro256++ generator with distribution helpers. The sampling algorithms
// are pinned (not stdlib distributions) so that streams are reproducible
// across platforms and standard libraries:
//   - uniform:   53-bit mantissa draw, (next() >> 11) * 2^-53, in [0, 1)
//   - normal:    trigonometric Box-Muller with one cached spare
//   - chisq(nu): sum of nu squared independent normals
//   - student_t: Z / sqrt(chisq(nu) / nu)
//   - bernoulli / categorical: inverse-CDF on a single uniform
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double normal();                       // standard normal
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double chisq(int nu);                  // nu >= 1
  double student_t(int nu);              // nu >= 1
  bool bernoulli(double p);              // P(true) = p
  // Index i with probability probs[i] / sum(probs); probs need not be
  // normalized but must be nonnegative with a positive sum.
  int categorical(const std::vector<double>& probs);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stagger

#endif  // STAGGER_RNG_HPP
