#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace wclab {

// Philox 4x32-10 block cipher (Salmon et al., SC 2011). Counter-based:
// every 128-bit output block is a pure function of (counter, key), so
// draws are reproducible independent of evaluation order and threading.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Rolling hash used to derive independent substream ids from structural
// paths (sample index, coordinate encodings, node tags).
class StreamHash {
 public:
  explicit StreamHash(std::uint64_t init = 0x9e3779b97f4a7c15ull) : state_(init) {}
  void absorb(std::uint64_t v) { state_ = splitmix64(state_ ^ splitmix64(v)); }
  void absorb_i64(std::int64_t v) { absorb(static_cast<std::uint64_t>(v)); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t chain(std::uint64_t stream, std::uint64_t v) {
  return splitmix64(stream ^ splitmix64(v));
}

// One logical random stream, keyed by (seed, stream id). Successive draws
// walk the Philox counter; no state is shared between streams.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on [0,1), 53-bit mantissa.
  double next_unit();
  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double next_gaussian();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double gauss_cache_ = 0.0;
  bool has_gauss_ = false;
};

// Index into a categorical distribution by CDF walk. `weights` must be
// positive and sum to 1 (validated by callers at construction time).
int sample_categorical(std::span<const double> weights, double u);

}  // namespace wclab
