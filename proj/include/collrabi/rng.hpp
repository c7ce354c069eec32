#pragma once

#include <cstdint>

namespace collrabi {

// SplitMix64 (Steele, Lea, Flood 2014). The constants and the 53-bit uniform
// mapping are fixed so that streams are reproducible on every platform.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  constexpr double uniform_open_low() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Independent stream for (seed, counter): the pair is hashed through one
// SplitMix64 round so neighbouring counters do not share state.
constexpr SplitMix64 counter_stream(std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 mixer(seed ^ (counter * 0xD1B54A32D192ED03ULL));
  return SplitMix64(mixer.next());
}

}  // namespace collrabi
