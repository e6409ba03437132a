// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_MODEL_H_
#define DPAGG_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dpagg {

// Users and keys are opaque, nonempty byte strings. Equality is byte
// equality. The empty string is reserved as the internal sentinel for
// synthetic records (dummies, join markers) and never appears in input data.
using UserId = std::string;
using Key = std::string;

// One (user, key, value) contribution. A user may contribute arbitrarily
// many records, including repeats of the same (user, key) pair;
// deduplication is the mechanism's job, not the model's.
struct Record {
  UserId user;
  Key key;
  double value = 0.0;

  bool operator==(const Record& other) const = default;
};

// Where a dataset sits in the pipeline dataflow.
enum class Provenance {
  kRaw,            // D: as ingested
  kBounded,        // D_L: at most L distinct keys per user
  kJoined,         // D_S: D restricted to the selected key set
  kSafe,           // D_safe: joined then re-bounded
  kGroupedByUser,  // D_0: one contiguous run of records per user
};

struct Dataset {
  std::vector<Record> records;
  Provenance provenance = Provenance::kRaw;
};

// Total order on finite doubles: numeric order with ties (notably -0.0 vs
// +0.0) broken by bit pattern. Canonical value ordering must be a strict
// total order or shuffle nondeterminism could leak into results.
bool CanonicalValueLess(double a, double b);

// Canonical record order: (user, key, value) with CanonicalValueLess on the
// value component.
bool CanonicalRecordLess(const Record& a, const Record& b);

// The (epsilon, delta) budget and its split between key selection (S) and
// the per-key mechanism (M), with the contribution bound L tying them
// together: epsilon_s + L * epsilon_m = epsilon and
// delta_s + L * delta_m = delta.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  int64_t l_bound = 0;
  double epsilon_s = 0.0;
  double delta_s = 0.0;
  double epsilon_m = 0.0;
  double delta_m = 0.0;
};

// Splits (epsilon, delta) across selection and mechanism. selection_fraction
// is the share of epsilon given to selection; the remainder is divided
// evenly over the L per-key mechanism invocations. All of delta goes to
// selection. Throws InvalidParameter on out-of-range arguments.
PrivacyBudget SplitBudget(double epsilon, double delta, int64_t l_bound,
                          double selection_fraction = 0.5);

// Reads a `user<TAB>key<TAB>value` file, one record per nonempty line.
// Malformed lines, empty user/key fields, and non-finite values raise
// IoError with the offending line number.
Dataset ReadTsv(const std::string& path);

// Writes records back out in the same TSV format, in dataset order.
void WriteTsv(const std::string& path, const Dataset& dataset);

// Formats a double with 17 significant digits (round-trippable).
std::string FormatValue(double value);

// Writes `key,value` rows (with a header) sorted lexicographically by key
// bytes. Values are printed with 17 significant digits. Fields containing
// CSV metacharacters are quoted.
void WriteResultCsv(const std::string& path,
                    const std::map<Key, double>& results);

// Reads a result CSV produced by WriteResultCsv.
std::map<Key, double> ReadResultCsv(const std::string& path);

}  // namespace dpagg

#endif  // DPAGG_MODEL_H_
