// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/noise.h"

#include <cmath>
#include <cstring>
#include <string>

#include "dpagg/error.h"

namespace dpagg {
namespace {

constexpr uint64_t kSeedMix = 0x9e3779b97f4a7c15ULL;

inline uint64_t Rotl(uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

struct SipState {
  uint64_t v0, v1, v2, v3;
};

inline void SipRound(SipState& s) {
  s.v0 += s.v1;
  s.v1 = Rotl(s.v1, 13);
  s.v1 ^= s.v0;
  s.v0 = Rotl(s.v0, 32);
  s.v2 += s.v3;
  s.v3 = Rotl(s.v3, 16);
  s.v3 ^= s.v2;
  s.v0 += s.v3;
  s.v3 = Rotl(s.v3, 21);
  s.v3 ^= s.v0;
  s.v2 += s.v1;
  s.v1 = Rotl(s.v1, 17);
  s.v1 ^= s.v2;
  s.v2 = Rotl(s.v2, 32);
}

// Little-endian load regardless of host byte order.
inline uint64_t Load64(const uint8_t* p) {
  return static_cast<uint64_t>(p[0]) | (static_cast<uint64_t>(p[1]) << 8) |
         (static_cast<uint64_t>(p[2]) << 16) |
         (static_cast<uint64_t>(p[3]) << 24) |
         (static_cast<uint64_t>(p[4]) << 32) |
         (static_cast<uint64_t>(p[5]) << 40) |
         (static_cast<uint64_t>(p[6]) << 48) |
         (static_cast<uint64_t>(p[7]) << 56);
}

inline void AppendLe64(std::string& out, uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(x >> (8 * i)));
}

}  // namespace

uint64_t SipHash24(uint64_t k0, uint64_t k1, const void* data, size_t len) {
  SipState s{k0 ^ 0x736f6d6570736575ULL, k1 ^ 0x646f72616e646f6dULL,
             k0 ^ 0x6c7967656e657261ULL, k1 ^ 0x7465646279746573ULL};
  const uint8_t* in = static_cast<const uint8_t*>(data);
  const size_t full = len - (len % 8);
  for (size_t i = 0; i < full; i += 8) {
    const uint64_t m = Load64(in + i);
    s.v3 ^= m;
    SipRound(s);
    SipRound(s);
    s.v0 ^= m;
  }
  uint64_t tail = static_cast<uint64_t>(len & 0xff) << 56;
  for (size_t i = full; i < len; ++i) {
    tail |= static_cast<uint64_t>(in[i]) << (8 * (i - full));
  }
  s.v3 ^= tail;
  SipRound(s);
  SipRound(s);
  s.v0 ^= tail;
  s.v2 ^= 0xff;
  SipRound(s);
  SipRound(s);
  SipRound(s);
  SipRound(s);
  return s.v0 ^ s.v1 ^ s.v2 ^ s.v3;
}

uint64_t Prf::Hash(std::string_view domain_tag,
                   std::string_view payload) const {
  // Length-prefixing the tag makes (tag, payload) framing unambiguous.
  std::string message;
  message.reserve(8 + domain_tag.size() + payload.size());
  AppendLe64(message, domain_tag.size());
  message.append(domain_tag);
  message.append(payload);
  return SipHash24(seed_, seed_ ^ kSeedMix, message.data(), message.size());
}

double UniformFromBits(uint64_t bits) {
  const double u = (static_cast<double>(bits) + 0.5) * 0x1p-64;
  // bits >= 2^64 - 1024 round up to 2^64 in double, which would map to 1.0
  // and leave the open interval; pin those to the largest double below 1.
  return u < 1.0 ? u : 0x1.fffffffffffffp-1;
}

double LaplaceFromUniform(double u, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw InvalidParameter("laplace scale must be positive and finite");
  }
  if (!(u > 0.0) || !(u < 1.0)) {
    throw InvalidParameter("laplace uniform must lie in (0, 1)");
  }
  const double centered = u - 0.5;
  if (centered == 0.0) return 0.0;
  const double sign = centered > 0.0 ? 1.0 : -1.0;
  return -b * sign * std::log(1.0 - 2.0 * std::fabs(centered));
}

uint64_t KeyRank(const Prf& prf, std::string_view round_tag,
                 const UserId& user, const Key& key) {
  std::string payload;
  payload.reserve(8 + user.size() + key.size());
  AppendLe64(payload, user.size());
  payload.append(user);
  payload.append(key);
  return prf.Hash(round_tag, payload);
}

double NoiseForKey(const Prf& prf, std::string_view stage_tag, const Key& key,
                   double b) {
  return LaplaceFromUniform(UniformFromBits(prf.Hash(stage_tag, key)), b);
}

double UniformForPayload(const Prf& prf, std::string_view domain_tag,
                         std::string_view payload) {
  return UniformFromBits(prf.Hash(domain_tag, payload));
}

}  // namespace dpagg
