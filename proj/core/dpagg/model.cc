// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/model.h"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpagg/error.h"

namespace dpagg {
namespace {

// Parses a strict double: the whole field must be consumed and the result
// finite.
double ParseValue(const std::string& field, size_t line_number) {
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_number) +
                  ": unparseable value '" + field + "'");
  }
  if (consumed != field.size() || !std::isfinite(value)) {
    throw IoError("line " + std::to_string(line_number) +
                  ": value must be a finite number, got '" + field + "'");
  }
  return value;
}

bool NeedsCsvQuoting(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string CsvQuote(const std::string& field) {
  if (!NeedsCsvQuoting(field)) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV line into exactly two fields, honoring quoting.
std::pair<std::string, std::string> SplitCsvPair(const std::string& line,
                                                 size_t line_number) {
  std::string key;
  size_t i = 0;
  if (!line.empty() && line[0] == '"') {
    i = 1;
    while (i < line.size()) {
      if (line[i] == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          key += '"';
          i += 2;
          continue;
        }
        i += 1;
        break;
      }
      key += line[i++];
    }
  } else {
    while (i < line.size() && line[i] != ',') key += line[i++];
  }
  if (i >= line.size() || line[i] != ',') {
    throw IoError("line " + std::to_string(line_number) +
                  ": expected `key,value`");
  }
  return {key, line.substr(i + 1)};
}

}  // namespace

bool CanonicalValueLess(double a, double b) {
  if (a != b) return a < b;
  return std::bit_cast<uint64_t>(a) < std::bit_cast<uint64_t>(b);
}

bool CanonicalRecordLess(const Record& a, const Record& b) {
  if (a.user != b.user) return a.user < b.user;
  if (a.key != b.key) return a.key < b.key;
  return CanonicalValueLess(a.value, b.value);
}

PrivacyBudget SplitBudget(double epsilon, double delta, int64_t l_bound,
                          double selection_fraction) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameter("epsilon must be positive and finite");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw InvalidParameter("delta must lie in (0, 1)");
  }
  if (l_bound < 1) {
    throw InvalidParameter("l_bound must be >= 1");
  }
  if (!(selection_fraction > 0.0) || !(selection_fraction < 1.0)) {
    throw InvalidParameter("selection_fraction must lie in (0, 1)");
  }
  PrivacyBudget budget;
  budget.epsilon = epsilon;
  budget.delta = delta;
  budget.l_bound = l_bound;
  budget.epsilon_s = selection_fraction * epsilon;
  budget.delta_s = delta;
  budget.epsilon_m =
      (1.0 - selection_fraction) * epsilon / static_cast<double>(l_bound);
  budget.delta_m = 0.0;
  return budget;
}

Dataset ReadTsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  Dataset dataset;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab1 = line.find('\t');
    const size_t tab2 = tab1 == std::string::npos
                            ? std::string::npos
                            : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos) {
      throw IoError("line " + std::to_string(line_number) +
                    ": expected `user<TAB>key<TAB>value`");
    }
    Record record;
    record.user = line.substr(0, tab1);
    record.key = line.substr(tab1 + 1, tab2 - tab1 - 1);
    if (record.user.empty() || record.key.empty()) {
      throw IoError("line " + std::to_string(line_number) +
                    ": user and key must be nonempty");
    }
    record.value = ParseValue(line.substr(tab2 + 1), line_number);
    dataset.records.push_back(std::move(record));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return dataset;
}

void WriteTsv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  for (const Record& record : dataset.records) {
    out << record.user << '\t' << record.key << '\t'
        << FormatValue(record.value) << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

std::string FormatValue(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void WriteResultCsv(const std::string& path,
                    const std::map<Key, double>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << "key,value\n";
  for (const auto& [key, value] : results) {
    out << CsvQuote(key) << ',' << FormatValue(value) << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

std::map<Key, double> ReadResultCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  std::map<Key, double> results;
  std::string line;
  size_t line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (line == "key,value") continue;
      // Headerless files are accepted; fall through and parse the row.
    }
    auto [key, value_field] = SplitCsvPair(line, line_number);
    if (key.empty()) {
      throw IoError("line " + std::to_string(line_number) + ": empty key");
    }
    results[key] = ParseValue(value_field, line_number);
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return results;
}

}  // namespace dpagg
