// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_NOISE_H_
#define DPAGG_NOISE_H_

#include <cstdint>
#include <string_view>

#include "dpagg/model.h"

namespace dpagg {

// Keyed pseudorandom function. Every random quantity in the system is a
// pure function of (seed, domain_tag, payload), so any pipeline run is
// replayable and independent of dataflow or scheduling order.
//
// The PRF is SipHash-2-4 over `LE64(len(tag)) || tag || payload` with key
// (seed, seed ^ kSeedMix). Statistical quality is what matters here; this
// is NOT a security boundary and real deployments need a secure noise
// source.
class Prf {
 public:
  explicit Prf(uint64_t seed) : seed_(seed) {}

  uint64_t Hash(std::string_view domain_tag, std::string_view payload) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

// Raw SipHash-2-4 of `data` under key (k0, k1). Exposed for test vectors.
uint64_t SipHash24(uint64_t k0, uint64_t k1, const void* data, size_t len);

// Maps a 64-bit hash to a uniform in the open interval (0, 1); the +0.5
// offset keeps the endpoints unreachable.
double UniformFromBits(uint64_t bits);

// Inverse-CDF Laplace sample: x = -b * sign(u - 0.5) * ln(1 - 2|u - 0.5|).
// Requires 0 < u < 1 and b > 0 (InvalidParameter otherwise).
double LaplaceFromUniform(double u, double b);

// Pseudorandom rank of `key` for `user` in one bounding round. Defines, per
// (seed, round, user), a total order over keys once ties are broken by key
// bytes; distinct round tags give independent orders.
uint64_t KeyRank(const Prf& prf, std::string_view round_tag,
                 const UserId& user, const Key& key);

// Laplace(b) noise addressed by (seed, stage_tag, key): identical across
// pipelines, worker counts, and record orderings.
double NoiseForKey(const Prf& prf, std::string_view stage_tag, const Key& key,
                   double b);

// Uniform in (0, 1) addressed by (seed, domain_tag, payload).
double UniformForPayload(const Prf& prf, std::string_view domain_tag,
                         std::string_view payload);

}  // namespace dpagg

#endif  // DPAGG_NOISE_H_
