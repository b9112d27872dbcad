#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace avp {

// splitmix64 generator. The output stream, and every derived draw below, is
// defined bit-for-bit so that seeded runs reproduce across platforms and
// implementation languages.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 bits: (x >> 11) * 2^-53.
  double uniform() noexcept;

  // Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double uniform_open() noexcept;

  // Uniform integer on [0, n) by rejection of the biased low range. n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  // True with probability p (uniform() < p), so p = 0 never and p = 1 always.
  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Standard normal via Box-Muller on (u1, u2) = two uniform_open() draws;
  // the sine branch is cached and returned by the next call.
  double gaussian() noexcept;

  // Fisher-Yates from the back: for i = n-1 .. 1, swap(i, below(i + 1)).
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Combines a seed with a stream index into an independent seed
// (splitmix64 finalizer of seed ^ rotl(stream * golden, 17)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace avp
