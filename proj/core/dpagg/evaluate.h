// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_EVALUATE_H_
#define DPAGG_EVALUATE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpagg/model.h"
#include "dpagg/pipelines.h"

namespace dpagg {

enum class ErrorMode {
  kRetained,  // Mean over the dp result's keys.
  kAll,       // Mean over the exact result's keys; missing dp keys read 0.
};

// Mean absolute difference. Retained mode requires dp keys to be a subset
// of exact keys (selected keys always exist in the data). An empty key set
// on the averaged-over side is an undefined-metric contract violation.
double AbsoluteError(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact, ErrorMode mode);

// Mean of |dp - exact| / exact over the dp result's keys. Every exact value
// must be positive; keys dropped during selection are never included.
double RelativeError(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact);

struct ErrorReport {
  double abs_retained = 0.0;
  double rel_retained = 0.0;
  double abs_all_keys = 0.0;
  int64_t retained = 0;
  double runtime_factor = 0.0;  // dp wall time / exact wall time.
};

ErrorReport Evaluate(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact, int64_t dp_wall_ms,
                     int64_t exact_wall_ms);

// One sweep row: a full pipeline run at one (pipeline, L, seed).
struct SweepRow {
  std::string pipeline;
  int64_t n_users = 0;
  int64_t l = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  uint64_t seed = 0;
  int64_t retained = 0;
  double abs_all_keys = 0.0;
  // Undefined when no keys were retained.
  std::optional<double> rel_retained;
  double runtime_factor = 0.0;
};

// Runs naive, fast, and plume over every L in `l_values` and every seed in
// `seeds` (the budget is re-split per L), comparing each run against one
// shared exact baseline. Rows come back grouped by L, then pipeline, then
// seed. The exact-comparison metrics consume the privacy budget once per
// run; sweep outputs are tuning data, not private releases.
std::vector<SweepRow> SweepL(const Dataset& d, const PipelineConfig& base,
                             const std::vector<int64_t>& l_values,
                             const std::vector<uint64_t>& seeds);

// Writes sweep rows plus, when several seeds were swept, one aggregate row
// per (pipeline, L) with seed column "all" carrying means and both spread
// columns (sigma and sigma/sqrt(n)).
void WriteSweepCsv(const std::string& path, const std::vector<SweepRow>& rows,
                   size_t seeds_per_cell);

}  // namespace dpagg

#endif  // DPAGG_EVALUATE_H_
