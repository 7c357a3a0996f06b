#pragma once

// Exhaustive enumeration of k-column subsets, partitioned over the
// lexicographic rank space so chunks can run on separate threads.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qenv {

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

/// The combination of lexicographic rank `rank` among the k-subsets of [0, n).
inline std::vector<int> unrank_combination(int n, int k, std::uint64_t rank) {
  std::vector<int> c(static_cast<std::size_t>(k));
  int next = 0;
  for (int i = 0; i < k; ++i) {
    for (;; ++next) {
      const std::uint64_t count = binomial(n - next - 1, k - i - 1);
      if (rank < count) break;
      rank -= count;
    }
    c[static_cast<std::size_t>(i)] = next++;
  }
  return c;
}

/// Advances to the next combination in lexicographic order; false at the end.
inline bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++c[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j) - 1] + 1;
  return true;
}

class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(std::uint64_t count, std::uint64_t cap)
      : std::runtime_error("subset enumeration needs " + std::to_string(count) +
                           " subsets, above the cap of " + std::to_string(cap) +
                           "; rerun with --force to enumerate anyway"),
        count_(count),
        cap_(cap) {}
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_, cap_;
};

struct EnumerationOptions {
  std::uint64_t cap = 2'000'000;
  bool force = false;
  unsigned threads = 0;  // 0: hardware concurrency
  std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

/// Visits every k-subset of [0, n). `make_state` builds a per-chunk
/// accumulator, `visit(state, subset)` folds one subset in and `merge`
/// combines chunk results in chunk order, so the reduction is independent of
/// the thread count.
template <class State, class MakeState, class Visit, class Merge>
State for_each_subset(int n, int k, const EnumerationOptions& opts, MakeState make_state,
                      Visit visit, Merge merge) {
  const std::uint64_t total = binomial(n, k);
  if (!opts.force && total > opts.cap) throw EnumerationCapExceeded(total, opts.cap);
  State result = make_state();
  if (total == 0) return result;

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t chunk = std::max<std::uint64_t>(4096, total / (std::uint64_t{threads} * 16) + 1);
  const std::uint64_t chunks = (total + chunk - 1) / chunk;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));

  std::vector<State> slots;
  slots.reserve(static_cast<std::size_t>(chunks));
  for (std::uint64_t i = 0; i < chunks; ++i) slots.push_back(make_state());

  std::atomic<std::uint64_t> next_chunk{0};
  std::atomic<std::uint64_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t ci = next_chunk.fetch_add(1);
      if (ci >= chunks) return;
      const std::uint64_t begin = ci * chunk;
      const std::uint64_t end = std::min(total, begin + chunk);
      std::vector<int> subset = unrank_combination(n, k, begin);
      State& st = slots[static_cast<std::size_t>(ci)];
      for (std::uint64_t r = begin; r < end; ++r) {
        visit(st, subset);
        if (r + 1 < end) next_combination(subset, n);
      }
      const std::uint64_t d = done.fetch_add(end - begin) + (end - begin);
      if (opts.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        opts.progress(d, total);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& s : slots) merge(result, s);
  return result;
}

}  // namespace qenv
