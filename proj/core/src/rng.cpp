// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/rng.hpp"

#include <cmath>
#include <numbers>

#include "stagger/errors.hpp"

namespace stagger {

std::uint64_t splitmix64(std::uint64_t* state) {
  std::uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
// splitmix64 finalizer applied to a fixed value (stateless mix).
std::uint64_t mix64(std::uint64_t z) {
  std::uint64_t s = z;
  return splitmix64(&s);
}
}  // namespace

std::uint64_t hash64(std::uint64_t a, std::uint64_t b) {
  // boost-style hash_combine with a 64-bit golden-ratio constant, using the
  // splitmix64 finalizer as the per-element mixer.
  std::uint64_t h = mix64(a);
  h ^= mix64(b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return mix64(h);
}

Rng::Rng(std::uint64_t seed) {
  // Expand the seed into four state words with splitmix64, per the xoshiro
  // authors' recommendation. All-zero state is impossible this way.
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(&sm);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

std::uint64_t Rng::next_u64() {
  // xoshiro256++ (Blackman & Vigna).
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Trigonometric Box-Muller. 1 - u1 is in (0, 1], so the log is finite.
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::chisq(int nu) {
  if (nu < 1) fail(Errc::BadConfig, "chisq requires nu >= 1");
  double acc = 0.0;
  for (int i = 0; i < nu; ++i) {
    const double z = normal();
    acc += z * z;
  }
  return acc;
}

double Rng::student_t(int nu) {
  if (nu < 1) fail(Errc::BadConfig, "student_t requires nu >= 1");
  const double z = normal();
  return z / std::sqrt(chisq(nu) / static_cast<double>(nu));
}

bool Rng::bernoulli(double p) { return uniform() < p; }

int Rng::categorical(const std::vector<double>& probs) {
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) fail(Errc::BadConfig, "categorical probabilities must be nonnegative");
    total += p;
  }
  if (!(total > 0.0)) fail(Errc::BadConfig, "categorical probabilities sum to zero");
  const double u = uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // u == total edge case
}

}  // namespace stagger
