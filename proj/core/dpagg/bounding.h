// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_BOUNDING_H_
#define DPAGG_BOUNDING_H_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dpagg/model.h"
#include "dpagg/noise.h"

namespace dpagg {

class KeyLookup;

// Per-user container retaining the values of at most `l_bound` distinct
// keys: exactly those with the smallest pseudorandom ranks among all keys
// ever inserted (ties broken by key bytes). Because ranks are a pure
// function of (seed, round_tag, user, key), insertion order is irrelevant
// and an evicted key can never re-enter with a better rank.
//
// Insert, lookup, and merge are O(L log L) time and O(L) memory.
class BoundedKeyHeap {
 public:
  BoundedKeyHeap(UserId user, int64_t l_bound, std::string round_tag);

  void Insert(const Prf& prf, const Key& key, double value);

  // Folds `other` into this heap. Value lists of shared keys are
  // concatenated, then canonicalized, so merge order cannot leak into
  // results. Throws ContractViolation on mismatched user/L/round.
  void Merge(const BoundedKeyHeap& other);

  // Emits one record per retained value, keys in byte order, values in
  // canonical order within each key.
  std::vector<Record> ToRecords() const;

  int64_t distinct_keys() const {
    return static_cast<int64_t>(entries_.size());
  }
  const UserId& user() const { return user_; }
  int64_t l_bound() const { return l_bound_; }
  const std::string& round_tag() const { return round_tag_; }

  // Retained keys in byte order, for tests and selection counting.
  std::vector<Key> RetainedKeys() const;

  bool operator==(const BoundedKeyHeap& other) const;

 private:
  struct Entry {
    uint64_t rank = 0;
    std::vector<double> values;
  };

  void Admit(const Key& key, uint64_t rank, std::vector<double> values);

  UserId user_;
  int64_t l_bound_;
  std::string round_tag_;
  std::map<Key, Entry> entries_;
  // (rank, key) index over entries_, ordered worst-last.
  std::set<std::pair<uint64_t, Key>> by_rank_;
};

// Builds a user's heap from their records, discarding keys that fail
// `filter` (when non-null) before insertion.
BoundedKeyHeap BuildUserHeap(const Prf& prf, const UserId& user,
                             std::span<const Record> records, int64_t l_bound,
                             const std::string& round_tag,
                             const KeyLookup* filter = nullptr);

}  // namespace dpagg

#endif  // DPAGG_BOUNDING_H_
