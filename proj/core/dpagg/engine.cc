// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/engine.h"

#include <algorithm>
#include <string_view>
#include <utility>

namespace dpagg {
namespace {

// Sort key: group id first, then canonical record order.
bool IndexLess(const std::vector<Record>& records, GroupBy by, uint32_t a,
               uint32_t b) {
  const Record& ra = records[a];
  const Record& rb = records[b];
  const std::string_view ia = by == GroupBy::kUser ? ra.user : ra.key;
  const std::string_view ib = by == GroupBy::kUser ? rb.user : rb.key;
  if (ia != ib) return ia < ib;
  return CanonicalRecordLess(ra, rb);
}

}  // namespace

Engine::Engine(EngineOptions options)
    : workers_(options.workers), max_records_per_user_(options.max_records_per_user) {
  if (workers_ < 0) throw InvalidParameter("workers must be >= 1");
  if (workers_ == 0) {
    workers_ = std::max(1u, std::thread::hardware_concurrency());
  }
  if (max_records_per_user_ < 1) {
    throw InvalidParameter("per-user record cap must be >= 1");
  }
}

std::vector<Group> Engine::Shuffle(const Dataset& d, GroupBy by,
                                   ShuffleStats& stats) const {
  stats.shuffle_stages += 1;
  stats.shuffled_records += static_cast<int64_t>(d.records.size());

  std::vector<uint32_t> order(d.records.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return IndexLess(d.records, by, a, b);
  });

  std::vector<Group> groups;
  for (size_t i = 0; i < order.size();) {
    const Record& first = d.records[order[i]];
    Group group;
    group.id = by == GroupBy::kUser ? first.user : first.key;
    size_t j = i;
    while (j < order.size()) {
      const Record& record = d.records[order[j]];
      const std::string& id = by == GroupBy::kUser ? record.user : record.key;
      if (id != group.id) break;
      group.records.push_back(record);
      ++j;
    }
    if (by == GroupBy::kUser &&
        static_cast<int64_t>(group.records.size()) > max_records_per_user_) {
      throw ContractViolation("user '" + group.id + "' has " +
                              std::to_string(group.records.size()) +
                              " records, above the per-user cap of " +
                              std::to_string(max_records_per_user_));
    }
    groups.push_back(std::move(group));
    i = j;
  }
  return groups;
}

std::vector<Group> Engine::MapSideJoin(const std::vector<Group>& d0,
                                       const KeyLookup& t) const {
  std::vector<Group> joined = MapGroups<Group>(d0, [&](const Group& group) {
    Group out;
    out.id = group.id;
    // Records within a user group are key-sorted, so each distinct key is
    // one contiguous run: probe at run starts only.
    for (size_t i = 0; i < group.records.size();) {
      const Key& key = group.records[i].key;
      size_t j = i;
      while (j < group.records.size() && group.records[j].key == key) ++j;
      if (t.Contains(key)) {
        out.records.insert(out.records.end(), group.records.begin() + i,
                           group.records.begin() + j);
      }
      i = j;
    }
    return out;
  });
  return joined;
}

Dataset Engine::ReduceSideJoin(const Dataset& d, const std::set<Key>& s,
                               ShuffleStats& stats) const {
  Dataset join_input;
  join_input.records.reserve(d.records.size() + s.size());
  join_input.records = d.records;
  for (const Key& key : s) {
    // Marker records ride the shuffle alongside real data; the empty user
    // id can never collide with input users.
    join_input.records.push_back({UserId(), key, 0.0});
  }
  const std::vector<Group> groups = Shuffle(join_input, GroupBy::kKey, stats);

  const std::vector<Group> surviving =
      MapGroups<Group>(groups, [](const Group& group) {
        // The marker sorts first within its group.
        if (group.records.empty() || !group.records.front().user.empty()) {
          return Group{group.id, {}};
        }
        Group out;
        out.id = group.id;
        for (const Record& record : group.records) {
          if (!record.user.empty()) out.records.push_back(record);
        }
        return out;
      });

  Dataset d_s;
  d_s.provenance = Provenance::kJoined;
  for (const Group& group : surviving) {
    d_s.records.insert(d_s.records.end(), group.records.begin(),
                       group.records.end());
  }
  return d_s;
}

}  // namespace dpagg
