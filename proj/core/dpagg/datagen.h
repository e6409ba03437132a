// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_DATAGEN_H_
#define DPAGG_DATAGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dpagg/model.h"

namespace dpagg {

// Zipf-Mandelbrot distribution over the integers [1, n]:
// pmf(x) proportional to (x + q)^(-s). Sampling is an inverse-CDF lookup
// over a precomputed table, so exact moments are cheap to query.
class ZipfMandelbrot {
 public:
  ZipfMandelbrot(double s, double q, int64_t n);

  // Requires u in (0, 1).
  int64_t Sample(double u) const;

  double ExactMean() const;
  double TailProbGreater(int64_t x) const;  // P(X > x)
  double HeadMass(int64_t first) const;     // P(X <= first)
  double Pmf(int64_t x) const;

  int64_t n() const { return n_; }
  const std::vector<double>& cdf() const { return cdf_; }

 private:
  double s_;
  double q_;
  int64_t n_;
  std::vector<double> cdf_;
};

// Heavy-tailed synthetic workload: each user's record count is drawn from
// ZM(4.67, 25, [1, 1e5]) and every record's key independently from
// ZM(1.4, 1000, [1, 1e6]), rendered as "k" + zero-padded index with value
// 1.0. Each user's stream is addressed by (seed, "gen", user index), so
// generation is reproducible and parallelizes over users. workers = 0
// selects machine parallelism.
Dataset GenSynth(int64_t n_users, uint64_t seed, int workers = 0);

// Toy locations workload: user i contributes exactly two records, their
// unique key "home_<i>" and the shared key "landmark", both with value 1.0.
// Fully deterministic; the seed is accepted for interface symmetry.
Dataset GenLandmark(int64_t n_users, uint64_t seed = 0);

// Word-count ingestion: lines of `user<TAB>free text`. Tokens are
// whitespace-separated and ASCII-lowercased; the output holds one record
// per (user, word) with the total utterance count as its value, sorted by
// (user, word). Malformed lines raise IoError with their line number.
Dataset IngestCorpus(const std::string& path);

}  // namespace dpagg

#endif  // DPAGG_DATAGEN_H_
