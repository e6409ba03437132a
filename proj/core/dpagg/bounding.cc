// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/bounding.h"

#include <algorithm>

#include "dpagg/error.h"
#include "dpagg/selection.h"

namespace dpagg {

BoundedKeyHeap::BoundedKeyHeap(UserId user, int64_t l_bound,
                               std::string round_tag)
    : user_(std::move(user)), l_bound_(l_bound),
      round_tag_(std::move(round_tag)) {
  if (l_bound_ < 1) throw InvalidParameter("heap l_bound must be >= 1");
}

void BoundedKeyHeap::Admit(const Key& key, uint64_t rank,
                           std::vector<double> values) {
  if (static_cast<int64_t>(entries_.size()) >= l_bound_) {
    const auto worst = std::prev(by_rank_.end());
    if (std::pair<uint64_t, Key>(rank, key) >= *worst) return;
    entries_.erase(worst->second);
    by_rank_.erase(worst);
  }
  entries_[key] = Entry{rank, std::move(values)};
  by_rank_.emplace(rank, key);
}

void BoundedKeyHeap::Insert(const Prf& prf, const Key& key, double value) {
  if (auto it = entries_.find(key); it != entries_.end()) {
    it->second.values.push_back(value);
    return;
  }
  Admit(key, KeyRank(prf, round_tag_, user_, key), {value});
}

void BoundedKeyHeap::Merge(const BoundedKeyHeap& other) {
  if (user_ != other.user_ || l_bound_ != other.l_bound_ ||
      round_tag_ != other.round_tag_) {
    throw ContractViolation("heap merge across user/L/round boundaries");
  }
  for (const auto& [key, entry] : other.entries_) {
    if (auto it = entries_.find(key); it != entries_.end()) {
      it->second.values.insert(it->second.values.end(), entry.values.begin(),
                               entry.values.end());
    } else {
      Admit(key, entry.rank, entry.values);
    }
  }
  for (auto& [key, entry] : entries_) {
    std::sort(entry.values.begin(), entry.values.end(), CanonicalValueLess);
  }
}

std::vector<Record> BoundedKeyHeap::ToRecords() const {
  std::vector<Record> records;
  for (const auto& [key, entry] : entries_) {
    std::vector<double> values = entry.values;
    std::sort(values.begin(), values.end(), CanonicalValueLess);
    for (double value : values) records.push_back({user_, key, value});
  }
  return records;
}

std::vector<Key> BoundedKeyHeap::RetainedKeys() const {
  std::vector<Key> keys;
  keys.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) keys.push_back(key);
  return keys;
}

bool BoundedKeyHeap::operator==(const BoundedKeyHeap& other) const {
  if (user_ != other.user_ || l_bound_ != other.l_bound_ ||
      round_tag_ != other.round_tag_) {
    return false;
  }
  if (entries_.size() != other.entries_.size()) return false;
  for (auto it = entries_.begin(), jt = other.entries_.begin();
       it != entries_.end(); ++it, ++jt) {
    if (it->first != jt->first || it->second.rank != jt->second.rank) {
      return false;
    }
    std::vector<double> a = it->second.values;
    std::vector<double> b = jt->second.values;
    std::sort(a.begin(), a.end(), CanonicalValueLess);
    std::sort(b.begin(), b.end(), CanonicalValueLess);
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (CanonicalValueLess(a[i], b[i]) || CanonicalValueLess(b[i], a[i])) {
        return false;
      }
    }
  }
  return true;
}

BoundedKeyHeap BuildUserHeap(const Prf& prf, const UserId& user,
                             std::span<const Record> records, int64_t l_bound,
                             const std::string& round_tag,
                             const KeyLookup* filter) {
  BoundedKeyHeap heap(user, l_bound, round_tag);
  // Each distinct key is probed against the filter once per user.
  std::map<Key, bool> probed;
  for (const Record& record : records) {
    if (filter != nullptr) {
      auto [it, fresh] = probed.try_emplace(record.key, false);
      if (fresh) it->second = filter->Contains(record.key);
      if (!it->second) continue;
    }
    heap.Insert(prf, record.key, record.value);
  }
  return heap;
}

}  // namespace dpagg
