// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_MECHANISMS_H_
#define DPAGG_MECHANISMS_H_

#include <span>
#include <string>

#include "dpagg/model.h"
#include "dpagg/noise.h"

namespace dpagg {

// The per-key mechanism M is never a black box: it is always the four-stage
// composition raw-combine -> preprocess -> keyed-combine -> noise. All four
// stages are pure, and keyed-combine is associative, so any stage may run
// early (right after user grouping) or late (inside the final reduce) and
// as a parallel hierarchical reduction, without changing the result.

enum class MechanismKind { kCount, kSum };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kCount;
  // Sum clamp range; ignored by count. The per-user-per-key sensitivity is
  // max(|clamp_low|, |clamp_high|).
  double clamp_low = 0.0;
  double clamp_high = 0.0;

  // Largest magnitude a single (user, key) pair can contribute post
  // preprocessing; the numerator of the noise scale.
  double per_key_cap() const;
};

MechanismSpec MakeCountSpec();

// Throws InvalidParameter unless clamp_low < clamp_high and the cap is
// positive.
MechanismSpec MakeSumSpec(double clamp_high, double clamp_low = 0.0);

// Stage 1: reduce one (user, key) pair's raw values to a single
// accumulator. Count ignores the values (presence semantics); sum adds
// them. An empty list is a contract violation: every real (user, key) group
// has at least one record.
double RawCombine(std::span<const double> values, const MechanismSpec& spec);

// Stage 2: map the accumulator to the bounded per-user contribution.
// Count always contributes 1.0; sum clamps into [clamp_low, clamp_high].
double Preprocess(double accumulator, const MechanismSpec& spec);

// Stage 3: associative reduction over per-user contributions. The empty
// list is the dummy-key case and combines to 0.0.
double KeyedCombine(std::span<const double> contributions);

// Stage 4: add Laplace(per_key_cap / epsilon_m) noise addressed by
// (seed, "agg", key). With noise disabled the partial is returned exactly.
double AddNoise(double partial, const MechanismSpec& spec,
                const PrivacyBudget& budget, const Prf& prf, const Key& key,
                bool debug_no_noise = false);

}  // namespace dpagg

#endif  // DPAGG_MECHANISMS_H_
