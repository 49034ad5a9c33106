#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace mdsllt {

/// Deterministic random stream identified by (seed, stream index).
///
/// Monte Carlo work is split into fixed-size blocks and every block draws
/// from its own stream, so results never depend on how many workers run the
/// blocks.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x6d64736cu};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::size_t kMonteCarloBlock = 4096;

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(block, begin, end) for every block of [0, count). Blocks are
/// claimed dynamically; fn must write only to its own slice of any output.
template <class Fn>
void for_each_block(std::size_t count, unsigned workers, Fn&& fn,
                    std::size_t block = kMonteCarloBlock) {
  const std::size_t blocks = (count + block - 1) / block;
  if (blocks == 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
      const std::size_t begin = b * block;
      fn(b, begin, std::min(count, begin + block));
    }
  };
  if (workers == 1) {
    run();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

}  // namespace mdsllt
