#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>

namespace drsgk {

/// Philox4x32 block: 128-bit counter, 64-bit key.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Purpose of a random stream; keeps e.g. filter samples and simulator noise apart.
enum class Channel : std::uint16_t {
  kFilterSample = 1,
  kTrueNoise = 2,
  kDataset = 3,
  kOracle = 4,
  kTest = 5,
};

/*!
 * Identifies one independent random stream.
 *
 * The trial seed becomes the Philox key; (sample, time, candidate, channel)
 * fill three counter words, the fourth word counts blocks within the stream.
 */
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t time = 0;
  std::uint16_t candidate = 0;
  std::uint32_t sample = 0;
  Channel channel = Channel::kTest;

  PhiloxKey philox_key() const {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  /// Counter words 1..3; word 0 is the block index.
  std::array<std::uint32_t, 3> counter_words() const {
    return {sample, time,
            (static_cast<std::uint32_t>(candidate) << 16) |
                static_cast<std::uint32_t>(channel)};
  }

  friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

/*!
 * Counter-based random stream.
 *
 * A stream is a pure function of its key: two streams built from equal keys
 * produce identical draws regardless of which thread uses them or when.
 * Satisfies UniformRandomBitGenerator, but the distribution helpers below are
 * preferred since they are bit-reproducible across standard libraries.
 */
class RngStream {
 public:
  using result_type = std::uint32_t;

  explicit RngStream(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n); n > 0. Lemire's multiply-and-reject.
  std::uint64_t uniform_below(std::uint64_t n);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  const StreamKey& key() const { return key_; }

 private:
  void refill();

  StreamKey key_;
  PhiloxKey philox_key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int next_word_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace drsgk
