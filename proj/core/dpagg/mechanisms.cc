// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/mechanisms.h"

#include <algorithm>
#include <cmath>

#include "dpagg/error.h"

namespace dpagg {

double MechanismSpec::per_key_cap() const {
  if (kind == MechanismKind::kCount) return 1.0;
  return std::max(std::fabs(clamp_low), std::fabs(clamp_high));
}

MechanismSpec MakeCountSpec() {
  return MechanismSpec{MechanismKind::kCount, 0.0, 0.0};
}

MechanismSpec MakeSumSpec(double clamp_high, double clamp_low) {
  if (!std::isfinite(clamp_high) || !std::isfinite(clamp_low) ||
      !(clamp_low < clamp_high)) {
    throw InvalidParameter("sum clamp range must be finite with low < high");
  }
  MechanismSpec spec{MechanismKind::kSum, clamp_low, clamp_high};
  if (!(spec.per_key_cap() > 0.0)) {
    throw InvalidParameter("sum clamp range must allow nonzero contributions");
  }
  return spec;
}

double RawCombine(std::span<const double> values, const MechanismSpec& spec) {
  if (values.empty()) {
    throw ContractViolation("raw_combine over an empty (user, key) group");
  }
  if (spec.kind == MechanismKind::kCount) return 1.0;
  double sum = 0.0;
  for (double value : values) sum += value;
  return sum;
}

double Preprocess(double accumulator, const MechanismSpec& spec) {
  if (spec.kind == MechanismKind::kCount) return 1.0;
  return std::clamp(accumulator, spec.clamp_low, spec.clamp_high);
}

double KeyedCombine(std::span<const double> contributions) {
  double sum = 0.0;
  for (double contribution : contributions) sum += contribution;
  return sum;
}

double AddNoise(double partial, const MechanismSpec& spec,
                const PrivacyBudget& budget, const Prf& prf, const Key& key,
                bool debug_no_noise) {
  if (debug_no_noise) return partial;
  if (!(budget.epsilon_m > 0.0)) {
    throw InvalidParameter("mechanism epsilon must be positive");
  }
  return partial +
         NoiseForKey(prf, "agg", key, spec.per_key_cap() / budget.epsilon_m);
}

}  // namespace dpagg
