// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/selection.h"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

#include "dpagg/error.h"

namespace dpagg {

SelectionParams SelectionThreshold(const PrivacyBudget& budget) {
  if (!(budget.epsilon_s > 0.0)) {
    throw InvalidParameter("selection epsilon must be positive");
  }
  if (!(budget.delta_s > 0.0) || !(budget.delta_s < 1.0)) {
    throw InvalidParameter("selection delta must lie in (0, 1)");
  }
  if (budget.l_bound < 1) throw InvalidParameter("l_bound must be >= 1");
  SelectionParams params;
  params.b = static_cast<double>(budget.l_bound) / budget.epsilon_s;
  const double log_arg =
      static_cast<double>(budget.l_bound) / (2.0 * budget.delta_s);
  if (!(std::log(log_arg) > 0.0)) {
    // delta_s >= L / 2 would drive tau to or below 1, making single-user
    // keys more likely kept than dropped; the budget is degenerate.
    throw InvalidParameter("selection delta too large for l_bound");
  }
  params.tau = 1.0 + params.b * std::log(log_arg);
  return params;
}

std::map<Key, int64_t> UniqueUserCounts(const Dataset& d_l) {
  std::vector<std::pair<std::string_view, std::string_view>> pairs;
  pairs.reserve(d_l.records.size());
  for (const Record& record : d_l.records) {
    pairs.emplace_back(record.key, record.user);
  }
  std::sort(pairs.begin(), pairs.end());
  std::map<Key, int64_t> counts;
  for (size_t i = 0; i < pairs.size();) {
    const std::string_view key = pairs[i].first;
    int64_t distinct_users = 0;
    size_t j = i;
    while (j < pairs.size() && pairs[j].first == key) {
      const std::string_view user = pairs[j].second;
      ++distinct_users;
      while (j < pairs.size() && pairs[j].first == key &&
             pairs[j].second == user) {
        ++j;
      }
    }
    counts.emplace(Key(key), distinct_users);
    i = j;
  }
  return counts;
}

bool DpRetainKey(int64_t count, const SelectionParams& params, const Prf& prf,
                 const Key& key) {
  if (count < 1) throw ContractViolation("dp_retain_key requires count >= 1");
  return static_cast<double>(count) +
             NoiseForKey(prf, "select", key, params.b) >=
         params.tau;
}

KeyLookup::KeyLookup(std::set<Key> keys, size_t memory_cutoff)
    : keys_(std::move(keys)),
      mode_(keys_.size() <= memory_cutoff ? LookupMode::kBroadcast
                                          : LookupMode::kSharedTable) {
  index_.reserve(keys_.size());
  for (const Key& key : keys_) index_.insert(std::string_view(key));
}

bool KeyLookup::Contains(const Key& key) const {
  probes_.fetch_add(1, std::memory_order_relaxed);
  return index_.contains(std::string_view(key));
}

std::unique_ptr<KeyLookup> BuildLookup(std::set<Key> keys,
                                       size_t memory_cutoff) {
  return std::make_unique<KeyLookup>(std::move(keys), memory_cutoff);
}

}  // namespace dpagg
