// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_ENGINE_H_
#define DPAGG_ENGINE_H_

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dpagg/error.h"
#include "dpagg/model.h"
#include "dpagg/selection.h"

namespace dpagg {

// Shuffle accounting: the cost structure the pipelines trade against each
// other. Every shuffle increments shuffle_stages and adds the record count
// crossing it to shuffled_records.
struct ShuffleStats {
  int64_t shuffle_stages = 0;
  int64_t shuffled_records = 0;
  uint64_t lookup_probes = 0;
};

// One shuffle output group: all records sharing an id (user or key), in
// canonical record order. Groups themselves are produced in id order, so
// downstream results cannot depend on worker count or scheduling.
struct Group {
  std::string id;
  std::vector<Record> records;
};

enum class GroupBy { kUser, kKey };

struct EngineOptions {
  // 0 selects std::thread::hardware_concurrency().
  int workers = 0;
  // A single user's records must fit on one worker.
  int64_t max_records_per_user = 10'000'000;
};

// In-process data-parallel executor. Workers process disjoint groups with
// no shared mutable state; stage functions must be pure. All results are
// written into preassigned slots in canonical group order, which makes
// every stage byte-identical across worker counts.
class Engine {
 public:
  explicit Engine(EngineOptions options = {});

  int workers() const { return workers_; }

  // Groups `d` by user or key. Counts one shuffle stage and |d| shuffled
  // records. Enforces the per-user record cap for user shuffles.
  std::vector<Group> Shuffle(const Dataset& d, GroupBy by,
                             ShuffleStats& stats) const;

  // Filters each user group of `d0` down to keys present in `t`, probing
  // once per distinct (user, key). A map over the existing grouping: no
  // shuffle is counted. Probes are tallied by `t` itself.
  std::vector<Group> MapSideJoin(const std::vector<Group>& d0,
                                 const KeyLookup& t) const;

  // The literal reduce-side join: marker records for `s` are shuffled
  // together with `d` by key (counting |d| + |s| shuffled records), and a
  // key's records survive iff its group holds a marker.
  Dataset ReduceSideJoin(const Dataset& d, const std::set<Key>& s,
                         ShuffleStats& stats) const;

  // Applies `fn` to every group in parallel; results come back in group
  // order, equal to the sequential application. Errors thrown by `fn`
  // propagate with the offending group's id attached (the lowest-index
  // failure wins, deterministically).
  template <typename T, typename Fn>
  std::vector<T> MapGroups(const std::vector<Group>& groups, Fn&& fn) const {
    std::vector<T> results(groups.size());
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    size_t error_index = SIZE_MAX;
    std::exception_ptr error;
    auto worker = [&] {
      while (true) {
        const size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= groups.size()) return;
        try {
          results[i] = fn(groups[i]);
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (i < error_index) {
            error_index = i;
            error = std::make_exception_ptr(Error(
                e.code(), "group '" + groups[i].id + "': " + e.what()));
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
        }
      }
    };
    RunWorkers(worker, groups.size());
    if (error) std::rethrow_exception(error);
    return results;
  }

 private:
  template <typename Fn>
  void RunWorkers(Fn& worker, size_t task_count) const {
    const size_t thread_count =
        std::min<size_t>(static_cast<size_t>(workers_), task_count);
    if (thread_count <= 1) {
      worker();
      return;
    }
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (std::thread& thread : threads) thread.join();
  }

  int workers_;
  int64_t max_records_per_user_;
};

}  // namespace dpagg

#endif  // DPAGG_ENGINE_H_
