// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_PIPELINES_H_
#define DPAGG_PIPELINES_H_

#include <cstdint>
#include <map>
#include <string>

#include "dpagg/engine.h"
#include "dpagg/mechanisms.h"
#include "dpagg/model.h"

namespace dpagg {

struct PipelineConfig {
  MechanismSpec mechanism;
  double epsilon = 0.0;
  double delta = 0.0;
  int64_t l_bound = 1;
  double selection_fraction = 0.5;
  int workers = 0;  // 0 = machine parallelism.
  size_t lookup_cutoff = 100'000;
  // Disables every Laplace draw and retains all keys present in the bounded
  // data. The no-privacy limit, for debugging and exact-recovery checks.
  bool debug_no_noise = false;
  uint64_t seed = 0;
  int64_t max_records_per_user = 10'000'000;
};

struct PipelineReport {
  // One entry per selected key, exactly; dummy contributions guarantee
  // coverage and the join guarantees nothing outside S survives.
  std::map<Key, double> outputs;
  int64_t retained = 0;
  ShuffleStats stats;
  int64_t wall_ms = 0;
  int64_t n_records = 0;
  int64_t n_users = 0;
  // Post-hoc audit over the final bounded dataset: largest number of
  // distinct keys any user contributes to the aggregation stage.
  int64_t max_user_distinct_keys = 0;
};

// Non-private baseline: per key, the count of records or the raw value sum,
// with no bounding, no clamping, no selection, and no noise.
PipelineReport RunExact(const Dataset& d, const MechanismSpec& spec);

// Five shuffles: bound, select, reduce-side join, re-bound, aggregate.
PipelineReport RunNaive(const Dataset& d, const PipelineConfig& config);

// Two shuffles: bound, then one keyed pass fusing selection and
// aggregation. Cheap, but users commit to L keys before selection, which
// under-counts keys competing with never-selected ones.
PipelineReport RunFast(const Dataset& d, const PipelineConfig& config);

// Three shuffles: like the five-shuffle flow, but the first user grouping
// is cached and reused, and the join runs map-side against the selected-key
// lookup table.
PipelineReport RunPlume(const Dataset& d, const PipelineConfig& config);

// Post-hoc L-bound audit: max distinct keys per user in `d`.
int64_t MaxDistinctKeysPerUser(const Dataset& d);

}  // namespace dpagg

#endif  // DPAGG_PIPELINES_H_
