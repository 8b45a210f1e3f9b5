#ifndef CREACH_RNG_HPP
#define CREACH_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace creach::rng {

using Engine = std::mt19937_64;

// Seed-derivation scheme used throughout the library: every random stream
// is identified by a master seed plus an integer path, e.g.
//   make_stream(seed, {kTrial, trial_index, kEvalPhase})
// so results are reproducible independent of evaluation order or threading.
inline Engine make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (path.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (std::uint64_t p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

/// First output of the derived stream; used to pass child seeds around.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return make_stream(master, path)();
}

/// Uniform double in [0, 1) with 53 random mantissa bits.
/// Hand-rolled so datasets are bit-identical across standard libraries.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t v;
  do {
    v = eng();
  } while (v >= limit);
  return v % n;
}

/// Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<std::size_t> permutation(std::size_t n, Engine& eng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(eng, i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

// Stream-purpose tags for the documented derivation paths.
inline constexpr std::uint64_t kSample = 1;
inline constexpr std::uint64_t kOutliers = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kTrial = 5;

} // namespace creach::rng

#endif
