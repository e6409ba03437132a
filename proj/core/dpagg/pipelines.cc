// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/pipelines.h"

#include <algorithm>
#include <chrono>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "dpagg/bounding.h"
#include "dpagg/error.h"
#include "dpagg/noise.h"
#include "dpagg/selection.h"

namespace dpagg {
namespace {

constexpr std::string_view kBoundRound1 = "bound1";
constexpr std::string_view kBoundRound2 = "bound2";

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  int64_t ElapsedMs() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

Engine MakeEngine(const PipelineConfig& config) {
  return Engine(
      EngineOptions{config.workers, config.max_records_per_user});
}

PrivacyBudget MakeBudget(const PipelineConfig& config) {
  return SplitBudget(config.epsilon, config.delta, config.l_bound,
                     config.selection_fraction);
}

// Bounds each user group to L distinct keys; emits the flat bounded dataset
// in group (user) order.
Dataset BoundGroups(const Engine& engine, const std::vector<Group>& groups,
                    const Prf& prf, int64_t l_bound, std::string_view round_tag,
                    Provenance provenance) {
  const std::string tag(round_tag);
  std::vector<std::vector<Record>> bounded = engine.MapGroups<
      std::vector<Record>>(groups, [&](const Group& group) {
    return BuildUserHeap(prf, group.id, group.records, l_bound, tag)
        .ToRecords();
  });
  Dataset out;
  out.provenance = provenance;
  for (const std::vector<Record>& records : bounded) {
    out.records.insert(out.records.end(), records.begin(), records.end());
  }
  return out;
}

// Distinct users in a key group; records arrive sorted by user.
int64_t CountDistinctUsers(const Group& group) {
  int64_t count = 0;
  for (size_t i = 0; i < group.records.size();) {
    const UserId& user = group.records[i].user;
    ++count;
    while (i < group.records.size() && group.records[i].user == user) ++i;
  }
  return count;
}

// Runs the selection decision over key groups of D_L.
std::set<Key> SelectKeys(const Engine& engine,
                         const std::vector<Group>& key_groups,
                         const PipelineConfig& config,
                         const PrivacyBudget& budget, const Prf& prf) {
  std::optional<SelectionParams> params;
  if (!config.debug_no_noise) {
    params = SelectionThreshold(budget);
  }
  std::vector<char> retained =
      engine.MapGroups<char>(key_groups, [&](const Group& group) {
        if (config.debug_no_noise) return char(1);
        const int64_t count = CountDistinctUsers(group);
        return char(DpRetainKey(count, *params, prf, group.id) ? 1 : 0);
      });
  std::set<Key> s;
  for (size_t i = 0; i < key_groups.size(); ++i) {
    if (retained[i]) s.insert(key_groups[i].id);
  }
  return s;
}

// The full mechanism over one key group: per-user raw-combine and
// preprocess, keyed-combine in user order, then the noiser. Sentinel
// (empty-user) dummy records keep the key present but contribute nothing.
double AggregateKeyGroup(const Group& group, const MechanismSpec& spec,
                         const PrivacyBudget& budget, const Prf& prf,
                         bool debug_no_noise) {
  std::vector<double> contributions;
  std::vector<double> values;
  for (size_t i = 0; i < group.records.size();) {
    const UserId& user = group.records[i].user;
    values.clear();
    while (i < group.records.size() && group.records[i].user == user) {
      values.push_back(group.records[i].value);
      ++i;
    }
    if (user.empty()) continue;  // Dummy.
    contributions.push_back(Preprocess(RawCombine(values, spec), spec));
  }
  const double partial = KeyedCombine(contributions);
  return AddNoise(partial, spec, budget, prf, group.id, debug_no_noise);
}

// Final stage shared by the five- and three-shuffle flows: add one dummy
// record per selected key, shuffle by key, apply the mechanism.
std::map<Key, double> AggregateWithDummies(
    const Engine& engine, Dataset d_safe, const std::set<Key>& s,
    const PipelineConfig& config, const PrivacyBudget& budget, const Prf& prf,
    ShuffleStats& stats) {
  d_safe.records.reserve(d_safe.records.size() + s.size());
  for (const Key& key : s) {
    d_safe.records.push_back({UserId(), key, 0.0});
  }
  const std::vector<Group> key_groups =
      engine.Shuffle(d_safe, GroupBy::kKey, stats);
  const std::vector<double> results =
      engine.MapGroups<double>(key_groups, [&](const Group& group) {
        return AggregateKeyGroup(group, config.mechanism, budget, prf,
                                 config.debug_no_noise);
      });
  std::map<Key, double> outputs;
  for (size_t i = 0; i < key_groups.size(); ++i) {
    outputs.emplace(key_groups[i].id, results[i]);
  }
  return outputs;
}

// The empty user id is reserved for dummy and marker records; real input
// containing it could impersonate pipeline internals (a forged join marker
// would resurrect an unselected key). Empty keys are equally malformed.
void CheckNoSentinelRecords(const Dataset& d) {
  for (const Record& record : d.records) {
    if (record.user.empty() || record.key.empty()) {
      throw ContractViolation(
          "input contains a record with an empty user or key");
    }
  }
}

void CheckStageCount(const ShuffleStats& stats, int64_t expected,
                     std::string_view pipeline) {
  if (stats.shuffle_stages != expected) {
    throw ContractViolation(std::string(pipeline) + " executed " +
                            std::to_string(stats.shuffle_stages) +
                            " shuffles, expected " +
                            std::to_string(expected));
  }
}

}  // namespace

int64_t MaxDistinctKeysPerUser(const Dataset& d) {
  std::vector<std::pair<std::string_view, std::string_view>> pairs;
  pairs.reserve(d.records.size());
  for (const Record& record : d.records) {
    pairs.emplace_back(record.user, record.key);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  int64_t max_keys = 0;
  for (size_t i = 0; i < pairs.size();) {
    const std::string_view user = pairs[i].first;
    size_t j = i;
    while (j < pairs.size() && pairs[j].first == user) ++j;
    max_keys = std::max(max_keys, static_cast<int64_t>(j - i));
    i = j;
  }
  return max_keys;
}

PipelineReport RunExact(const Dataset& d, const MechanismSpec& spec) {
  WallTimer timer;
  PipelineReport report;
  report.n_records = static_cast<int64_t>(d.records.size());
  std::set<std::string_view> users;
  for (const Record& record : d.records) {
    users.insert(record.user);
    double& slot = report.outputs[record.key];
    slot += spec.kind == MechanismKind::kCount ? 1.0 : record.value;
  }
  report.n_users = static_cast<int64_t>(users.size());
  report.retained = static_cast<int64_t>(report.outputs.size());
  report.max_user_distinct_keys = MaxDistinctKeysPerUser(d);
  report.wall_ms = timer.ElapsedMs();
  return report;
}

PipelineReport RunNaive(const Dataset& d, const PipelineConfig& config) {
  WallTimer timer;
  CheckNoSentinelRecords(d);
  const Engine engine = MakeEngine(config);
  const PrivacyBudget budget = MakeBudget(config);
  const Prf prf(config.seed);
  PipelineReport report;
  report.n_records = static_cast<int64_t>(d.records.size());

  // Shuffle 1: group by user, bound to L keys.
  const std::vector<Group> user_groups =
      engine.Shuffle(d, GroupBy::kUser, report.stats);
  report.n_users = static_cast<int64_t>(user_groups.size());
  const Dataset d_l = BoundGroups(engine, user_groups, prf, config.l_bound,
                                  kBoundRound1, Provenance::kBounded);

  // Shuffle 2: unique-user counts per key, DP selection.
  const std::vector<Group> count_groups =
      engine.Shuffle(d_l, GroupBy::kKey, report.stats);
  const std::set<Key> s = SelectKeys(engine, count_groups, config, budget, prf);
  report.retained = static_cast<int64_t>(s.size());

  // Shuffle 3: reduce-side join of the raw data with S.
  const Dataset d_s = engine.ReduceSideJoin(d, s, report.stats);

  // Shuffle 4: regroup by user, bound again (independent round).
  const std::vector<Group> safe_groups =
      engine.Shuffle(d_s, GroupBy::kUser, report.stats);
  Dataset d_safe = BoundGroups(engine, safe_groups, prf, config.l_bound,
                               kBoundRound2, Provenance::kSafe);
  report.max_user_distinct_keys = MaxDistinctKeysPerUser(d_safe);

  // Shuffle 5: aggregate, with a dummy per selected key.
  report.outputs = AggregateWithDummies(engine, std::move(d_safe), s, config,
                                        budget, prf, report.stats);
  CheckStageCount(report.stats, 5, "naive");
  report.wall_ms = timer.ElapsedMs();
  return report;
}

PipelineReport RunFast(const Dataset& d, const PipelineConfig& config) {
  WallTimer timer;
  CheckNoSentinelRecords(d);
  const Engine engine = MakeEngine(config);
  const PrivacyBudget budget = MakeBudget(config);
  const Prf prf(config.seed);
  PipelineReport report;
  report.n_records = static_cast<int64_t>(d.records.size());

  // Shuffle 1: group by user, bound to L keys.
  const std::vector<Group> user_groups =
      engine.Shuffle(d, GroupBy::kUser, report.stats);
  report.n_users = static_cast<int64_t>(user_groups.size());
  const Dataset d_l = BoundGroups(engine, user_groups, prf, config.l_bound,
                                  kBoundRound1, Provenance::kBounded);
  report.max_user_distinct_keys = MaxDistinctKeysPerUser(d_l);

  // Shuffle 2: one keyed pass; selection and aggregation fused.
  std::optional<SelectionParams> params;
  if (!config.debug_no_noise) {
    params = SelectionThreshold(budget);
  }
  const std::vector<Group> key_groups =
      engine.Shuffle(d_l, GroupBy::kKey, report.stats);
  struct KeyResult {
    bool retained = false;
    double value = 0.0;
  };
  const std::vector<KeyResult> results =
      engine.MapGroups<KeyResult>(key_groups, [&](const Group& group) {
        const bool keep =
            config.debug_no_noise ||
            DpRetainKey(CountDistinctUsers(group), *params, prf, group.id);
        if (!keep) return KeyResult{};
        return KeyResult{true,
                         AggregateKeyGroup(group, config.mechanism, budget,
                                           prf, config.debug_no_noise)};
      });
  for (size_t i = 0; i < key_groups.size(); ++i) {
    if (results[i].retained) {
      report.outputs.emplace(key_groups[i].id, results[i].value);
    }
  }
  report.retained = static_cast<int64_t>(report.outputs.size());
  CheckStageCount(report.stats, 2, "fast");
  report.wall_ms = timer.ElapsedMs();
  return report;
}

PipelineReport RunPlume(const Dataset& d, const PipelineConfig& config) {
  WallTimer timer;
  CheckNoSentinelRecords(d);
  const Engine engine = MakeEngine(config);
  const PrivacyBudget budget = MakeBudget(config);
  const Prf prf(config.seed);
  PipelineReport report;
  report.n_records = static_cast<int64_t>(d.records.size());

  // Shuffle 1: group by user. D_0 is cached; bounding is a map over it.
  const std::vector<Group> d0 = engine.Shuffle(d, GroupBy::kUser, report.stats);
  report.n_users = static_cast<int64_t>(d0.size());
  const Dataset d_l = BoundGroups(engine, d0, prf, config.l_bound,
                                  kBoundRound1, Provenance::kBounded);

  // Shuffle 2: unique-user counts per key, DP selection.
  const std::vector<Group> count_groups =
      engine.Shuffle(d_l, GroupBy::kKey, report.stats);
  const std::set<Key> s = SelectKeys(engine, count_groups, config, budget, prf);
  report.retained = static_cast<int64_t>(s.size());

  // Map-side join against the size-adaptive lookup table, then the second
  // bounding round, all over the cached user grouping: no shuffle.
  const std::unique_ptr<KeyLookup> lookup =
      BuildLookup(s, config.lookup_cutoff);
  const std::vector<Group> joined = engine.MapSideJoin(d0, *lookup);
  Dataset d_safe = BoundGroups(engine, joined, prf, config.l_bound,
                               kBoundRound2, Provenance::kSafe);
  report.max_user_distinct_keys = MaxDistinctKeysPerUser(d_safe);

  // Shuffle 3: aggregate, with a dummy per selected key.
  report.outputs = AggregateWithDummies(engine, std::move(d_safe), s, config,
                                        budget, prf, report.stats);
  report.stats.lookup_probes = lookup->probes();
  CheckStageCount(report.stats, 3, "plume");
  report.wall_ms = timer.ElapsedMs();
  return report;
}

}  // namespace dpagg
