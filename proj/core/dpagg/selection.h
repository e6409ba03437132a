// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_SELECTION_H_
#define DPAGG_SELECTION_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_set>

#include "dpagg/model.h"
#include "dpagg/noise.h"

namespace dpagg {

// Laplace-threshold key selection parameters. Retaining a key contributed
// by a single user has probability (1/2) * exp(-(tau - 1) / b) = delta_s / L
// exactly, so a union bound over a user's <= L keys spends delta_s.
struct SelectionParams {
  double b = 0.0;    // Laplace noise scale, L / epsilon_s.
  double tau = 0.0;  // Retention threshold, always > 1.
};

// Derives (b, tau) from the budget: b = L / epsilon_s,
// tau = 1 + b * ln(L / (2 * delta_s)). Throws InvalidParameter when the
// parameters are degenerate (delta_s >= L / 2 forces tau <= 1).
SelectionParams SelectionThreshold(const PrivacyBudget& budget);

// Number of distinct users contributing each key. The input must satisfy
// the per-user L-bound; repeated (user, key) pairs count once.
std::map<Key, int64_t> UniqueUserCounts(const Dataset& d_l);

// Retain iff count + Laplace(b) >= tau, with the noise addressed by
// (seed, "select", key) so the decision is identical wherever it is
// evaluated. Monotone in count for a fixed draw.
bool DpRetainKey(int64_t count, const SelectionParams& params, const Prf& prf,
                 const Key& key);

enum class LookupMode {
  kBroadcast,    // |S| small: replicated in-memory set per worker.
  kSharedTable,  // |S| large: one shared read-only table, probes counted as
                 // requests.
};

// The selected key set S with its size-adaptive lookup representation T.
// Contains() answers identically in both modes; only the cost model
// (replication vs instrumented shared requests) differs. Read-only after
// construction and safe to probe from any number of workers.
class KeyLookup {
 public:
  KeyLookup(std::set<Key> keys, size_t memory_cutoff);

  bool Contains(const Key& key) const;

  const std::set<Key>& keys() const { return keys_; }
  int64_t size() const { return static_cast<int64_t>(keys_.size()); }
  LookupMode mode() const { return mode_; }
  uint64_t probes() const { return probes_.load(std::memory_order_relaxed); }

 private:
  std::set<Key> keys_;
  std::unordered_set<std::string_view> index_;  // Views into keys_.
  LookupMode mode_;
  mutable std::atomic<uint64_t> probes_{0};
};

// Builds T from S: broadcast set at or below `memory_cutoff` keys, shared
// read-only table above it.
std::unique_ptr<KeyLookup> BuildLookup(std::set<Key> keys,
                                       size_t memory_cutoff);

}  // namespace dpagg

#endif  // DPAGG_SELECTION_H_
