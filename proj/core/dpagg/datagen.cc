// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#include "dpagg/datagen.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "dpagg/error.h"
#include "dpagg/noise.h"

namespace dpagg {
namespace {

constexpr double kRecordsPerUserS = 4.67;
constexpr double kRecordsPerUserQ = 25.0;
constexpr int64_t kRecordsPerUserMax = 100'000;

constexpr double kKeyS = 1.4;
constexpr double kKeyQ = 1000.0;
constexpr int64_t kKeyMax = 1'000'000;

std::string FormatIndexed(const char* prefix, int64_t index, int width) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%s%0*lld", prefix, width,
                static_cast<long long>(index));
  return buffer;
}

std::string GenPayload(int64_t user_index, int64_t draw_index) {
  std::string payload(16, '\0');
  for (int i = 0; i < 8; ++i) {
    payload[i] = static_cast<char>(static_cast<uint64_t>(user_index) >>
                                   (8 * i));
    payload[8 + i] = static_cast<char>(static_cast<uint64_t>(draw_index) >>
                                       (8 * i));
  }
  return payload;
}

}  // namespace

ZipfMandelbrot::ZipfMandelbrot(double s, double q, int64_t n)
    : s_(s), q_(q), n_(n) {
  if (!(s > 0.0) || !(q >= 0.0) || n < 1) {
    throw InvalidParameter("zipf-mandelbrot requires s > 0, q >= 0, n >= 1");
  }
  cdf_.resize(n);
  double total = 0.0;
  for (int64_t x = 1; x <= n; ++x) {
    total += std::pow(static_cast<double>(x) + q, -s);
    cdf_[x - 1] = total;
  }
  for (double& c : cdf_) c /= total;
}

int64_t ZipfMandelbrot::Sample(double u) const {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw InvalidParameter("zipf-mandelbrot uniform must lie in (0, 1)");
  }
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return n_;
  return (it - cdf_.begin()) + 1;
}

double ZipfMandelbrot::ExactMean() const {
  double mean = 0.0;
  double prev = 0.0;
  for (int64_t x = 1; x <= n_; ++x) {
    mean += static_cast<double>(x) * (cdf_[x - 1] - prev);
    prev = cdf_[x - 1];
  }
  return mean;
}

double ZipfMandelbrot::TailProbGreater(int64_t x) const {
  if (x < 1) return 1.0;
  if (x >= n_) return 0.0;
  return 1.0 - cdf_[x - 1];
}

double ZipfMandelbrot::HeadMass(int64_t first) const {
  if (first < 1) return 0.0;
  if (first >= n_) return 1.0;
  return cdf_[first - 1];
}

double ZipfMandelbrot::Pmf(int64_t x) const {
  if (x < 1 || x > n_) return 0.0;
  return cdf_[x - 1] - (x == 1 ? 0.0 : cdf_[x - 2]);
}

Dataset GenSynth(int64_t n_users, uint64_t seed, int workers) {
  if (n_users < 1) throw InvalidParameter("n_users must be >= 1");
  if (workers < 0) throw InvalidParameter("workers must be >= 1");
  // Parameter-fixed tables, built once per process (the key table is 8 MB).
  static const ZipfMandelbrot& records_dist = *new ZipfMandelbrot(
      kRecordsPerUserS, kRecordsPerUserQ, kRecordsPerUserMax);
  static const ZipfMandelbrot& key_dist =
      *new ZipfMandelbrot(kKeyS, kKeyQ, kKeyMax);

  const Prf prf(seed);
  const int thread_count = static_cast<int>(std::min<int64_t>(
      workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                   : workers,
      n_users));

  // Contiguous user ranges per thread, concatenated in range order: output
  // is user-major and independent of the worker count.
  std::vector<std::vector<Record>> chunks(thread_count);
  auto generate_range = [&](int64_t first_user, int64_t last_user,
                            std::vector<Record>& out) {
    for (int64_t i = first_user; i <= last_user; ++i) {
      const UserId user = FormatIndexed("u", i, 8);
      const int64_t m = records_dist.Sample(
          UniformForPayload(prf, "gen", GenPayload(i, 0)));
      for (int64_t j = 1; j <= m; ++j) {
        const int64_t key_index =
            key_dist.Sample(UniformForPayload(prf, "gen", GenPayload(i, j)));
        out.push_back({user, FormatIndexed("k", key_index, 7), 1.0});
      }
    }
  };
  const int64_t per_thread = (n_users + thread_count - 1) / thread_count;
  std::vector<std::thread> threads;
  for (int t = 0; t < thread_count; ++t) {
    const int64_t first = 1 + t * per_thread;
    const int64_t last = std::min<int64_t>(n_users, first + per_thread - 1);
    if (first > last) break;
    threads.emplace_back(generate_range, first, last, std::ref(chunks[t]));
  }
  for (std::thread& thread : threads) thread.join();

  Dataset dataset;
  size_t total = 0;
  for (const auto& chunk : chunks) total += chunk.size();
  dataset.records.reserve(total);
  for (auto& chunk : chunks) {
    dataset.records.insert(dataset.records.end(), chunk.begin(), chunk.end());
  }
  return dataset;
}

Dataset GenLandmark(int64_t n_users, uint64_t /*seed*/) {
  if (n_users < 1) throw InvalidParameter("n_users must be >= 1");
  Dataset dataset;
  dataset.records.reserve(2 * n_users);
  for (int64_t i = 1; i <= n_users; ++i) {
    const UserId user = FormatIndexed("u", i, 8);
    dataset.records.push_back({user, FormatIndexed("home_", i, 8), 1.0});
    dataset.records.push_back({user, "landmark", 1.0});
  }
  return dataset;
}

Dataset IngestCorpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  std::map<std::pair<UserId, Key>, double> counts;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw IoError("line " + std::to_string(line_number) +
                    ": expected `user<TAB>free text`");
    }
    const UserId user = line.substr(0, tab);
    size_t i = tab + 1;
    while (i < line.size()) {
      while (i < line.size() &&
             std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
      }
      size_t j = i;
      std::string word;
      while (j < line.size() &&
             !std::isspace(static_cast<unsigned char>(line[j]))) {
        word.push_back(static_cast<char>(
            std::tolower(static_cast<unsigned char>(line[j]))));
        ++j;
      }
      if (!word.empty()) counts[{user, word}] += 1.0;
      i = j;
    }
  }
  if (in.bad()) throw IoError("read failure on " + path);
  Dataset dataset;
  dataset.records.reserve(counts.size());
  for (const auto& [user_word, count] : counts) {
    dataset.records.push_back({user_word.first, user_word.second, count});
  }
  return dataset;
}

}  // namespace dpagg
