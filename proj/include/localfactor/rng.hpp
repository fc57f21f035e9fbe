#pragma once

#include <cstdint>

namespace localfactor {

// Counter-mode SplitMix64. Output i of a stream with key k is
// finalize(k + (i+1)*GOLDEN), i.e. the i-th value of the classic SplitMix64
// sequence seeded with k. Being a pure function of (key, counter) lets label
// i of a trial be computed without drawing labels 0..i-1, which is what keeps
// batch runs independent of thread count.
class StreamRng {
 public:
  StreamRng() = default;
  explicit StreamRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t at(std::uint64_t i) const {
    return finalize(key_ + (i + 1) * kGolden);
  }

  // Uniform double in [0,1) from the top 53 bits of output i.
  double unit_at(std::uint64_t i) const {
    return static_cast<double>(at(i) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return at(counter_++); }
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Derives the key of an independent substream. Trial t of a batch run uses
// derive_stream(seed, t); nested roles (labels x/z/w of one trial) derive
// again from the trial key.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = StreamRng::finalize(seed + 0x9E3779B97F4A7C15ull);
  const std::uint64_t b = StreamRng::finalize(stream ^ 0xD1B54A32D192ED03ull);
  return StreamRng::finalize(a + (b << 1 | 1));
}

inline StreamRng substream(std::uint64_t seed, std::uint64_t stream) {
  return StreamRng(derive_stream(seed, stream));
}

}  // namespace localfactor
