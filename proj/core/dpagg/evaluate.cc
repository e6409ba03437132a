// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/evaluate.h"

#include <cmath>
#include <fstream>

#include "dpagg/error.h"

namespace dpagg {
namespace {

double MeanOrZero(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double SampleSigma(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = MeanOrZero(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

double AbsoluteError(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact, ErrorMode mode) {
  if (mode == ErrorMode::kRetained) {
    if (dp.empty()) {
      throw ContractViolation("undefined metric: no retained keys");
    }
    double sum = 0.0;
    for (const auto& [key, value] : dp) {
      const auto it = exact.find(key);
      if (it == exact.end()) {
        throw ContractViolation("retained key '" + key +
                                "' missing from the exact result");
      }
      sum += std::fabs(value - it->second);
    }
    return sum / static_cast<double>(dp.size());
  }
  if (exact.empty()) {
    throw ContractViolation("undefined metric: exact result has no keys");
  }
  double sum = 0.0;
  for (const auto& [key, value] : exact) {
    const auto it = dp.find(key);
    const double estimate = it == dp.end() ? 0.0 : it->second;
    sum += std::fabs(estimate - value);
  }
  return sum / static_cast<double>(exact.size());
}

double RelativeError(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact) {
  if (dp.empty()) {
    throw ContractViolation("undefined metric: no retained keys");
  }
  double sum = 0.0;
  for (const auto& [key, value] : dp) {
    const auto it = exact.find(key);
    if (it == exact.end()) {
      throw ContractViolation("retained key '" + key +
                              "' missing from the exact result");
    }
    if (!(it->second > 0.0)) {
      throw ContractViolation("relative error needs exact['" + key +
                              "'] > 0");
    }
    sum += std::fabs(value - it->second) / it->second;
  }
  return sum / static_cast<double>(dp.size());
}

ErrorReport Evaluate(const std::map<Key, double>& dp,
                     const std::map<Key, double>& exact, int64_t dp_wall_ms,
                     int64_t exact_wall_ms) {
  ErrorReport report;
  report.abs_retained = AbsoluteError(dp, exact, ErrorMode::kRetained);
  report.rel_retained = RelativeError(dp, exact);
  report.abs_all_keys = AbsoluteError(dp, exact, ErrorMode::kAll);
  report.retained = static_cast<int64_t>(dp.size());
  report.runtime_factor = exact_wall_ms > 0 ? static_cast<double>(dp_wall_ms) /
                                                  static_cast<double>(
                                                      exact_wall_ms)
                                            : 0.0;
  return report;
}

std::vector<SweepRow> SweepL(const Dataset& d, const PipelineConfig& base,
                             const std::vector<int64_t>& l_values,
                             const std::vector<uint64_t>& seeds) {
  if (l_values.empty()) throw InvalidParameter("l_values must be nonempty");
  if (seeds.empty()) throw InvalidParameter("seeds must be nonempty");
  const PipelineReport exact = RunExact(d, base.mechanism);

  struct Variant {
    const char* name;
    PipelineReport (*run)(const Dataset&, const PipelineConfig&);
  };
  constexpr Variant kVariants[] = {
      {"naive", RunNaive}, {"fast", RunFast}, {"plume", RunPlume}};

  std::vector<SweepRow> rows;
  for (int64_t l : l_values) {
    for (const Variant& variant : kVariants) {
      for (uint64_t seed : seeds) {
        PipelineConfig config = base;
        config.l_bound = l;
        config.seed = seed;
        const PipelineReport report = variant.run(d, config);
        SweepRow row;
        row.pipeline = variant.name;
        row.n_users = report.n_users;
        row.l = l;
        row.epsilon = config.epsilon;
        row.delta = config.delta;
        row.seed = seed;
        row.retained = report.retained;
        row.abs_all_keys =
            AbsoluteError(report.outputs, exact.outputs, ErrorMode::kAll);
        if (!report.outputs.empty()) {
          row.rel_retained = RelativeError(report.outputs, exact.outputs);
        }
        row.runtime_factor =
            exact.wall_ms > 0 ? static_cast<double>(report.wall_ms) /
                                    static_cast<double>(exact.wall_ms)
                              : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void WriteSweepCsv(const std::string& path, const std::vector<SweepRow>& rows,
                   size_t seeds_per_cell) {
  if (seeds_per_cell == 0 || rows.size() % seeds_per_cell != 0) {
    throw ContractViolation("sweep rows do not tile into seed groups");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << "pipeline,n_users,l,epsilon,delta,seed,retained,abs_all_keys,"
         "rel_retained,runtime_factor,abs_all_sigma,abs_all_se,rel_sigma,"
         "rel_se\n";
  for (size_t i = 0; i < rows.size(); i += seeds_per_cell) {
    std::vector<double> abs_all;
    std::vector<double> rel;
    std::vector<double> retained;
    std::vector<double> runtime;
    for (size_t j = i; j < i + seeds_per_cell; ++j) {
      const SweepRow& row = rows[j];
      out << row.pipeline << ',' << row.n_users << ',' << row.l << ','
          << FormatValue(row.epsilon) << ',' << FormatValue(row.delta) << ','
          << row.seed << ',' << row.retained << ','
          << FormatValue(row.abs_all_keys) << ',';
      if (row.rel_retained.has_value()) {
        out << FormatValue(*row.rel_retained);
        rel.push_back(*row.rel_retained);
      }
      out << ',' << FormatValue(row.runtime_factor) << ",,,,\n";
      abs_all.push_back(row.abs_all_keys);
      retained.push_back(static_cast<double>(row.retained));
      runtime.push_back(row.runtime_factor);
    }
    if (seeds_per_cell < 2) continue;
    const SweepRow& first = rows[i];
    out << first.pipeline << ',' << first.n_users << ',' << first.l << ','
        << FormatValue(first.epsilon) << ',' << FormatValue(first.delta)
        << ",all," << FormatValue(MeanOrZero(retained)) << ','
        << FormatValue(MeanOrZero(abs_all)) << ',';
    if (!rel.empty()) out << FormatValue(MeanOrZero(rel));
    out << ',' << FormatValue(MeanOrZero(runtime)) << ','
        << FormatValue(SampleSigma(abs_all)) << ','
        << FormatValue(SampleSigma(abs_all) /
                       std::sqrt(static_cast<double>(abs_all.size())))
        << ',';
    if (rel.size() >= 2) {
      out << FormatValue(SampleSigma(rel)) << ','
          << FormatValue(SampleSigma(rel) /
                         std::sqrt(static_cast<double>(rel.size())));
    } else {
      out << ',';
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace dpagg
