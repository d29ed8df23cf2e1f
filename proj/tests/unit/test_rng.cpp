#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "drsgk/rng.hpp"
#include "drsgk/rollout.hpp"

using namespace drsgk;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("equal keys give equal streams") {
  StreamKey key{42, 7, 3, 11, Channel::kFilterSample};
  RngStream a(key), b(key);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u32() == b.next_u32());
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("distinct key fields give distinct streams") {
  const StreamKey base{42, 7, 3, 11, Channel::kFilterSample};
  std::vector<StreamKey> keys{base};
  StreamKey k = base;
  k.seed = 43;
  keys.push_back(k);
  k = base;
  k.time = 8;
  keys.push_back(k);
  k = base;
  k.candidate = 4;
  keys.push_back(k);
  k = base;
  k.sample = 12;
  keys.push_back(k);
  k = base;
  k.channel = Channel::kTrueNoise;
  keys.push_back(k);
  std::set<std::uint64_t> firsts;
  for (const auto& key : keys) {
    RngStream s(key);
    firsts.insert(s.next_u64());
  }
  CHECK(firsts.size() == keys.size());
}

TEST_CASE("filter sample keys never collide across the (m, i) grid") {
  std::set<std::array<std::uint32_t, 3>> words;
  const std::size_t M = 20, N = 500;
  for (long t : {0L, 1L, 1000L}) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t i = 0; i < N; ++i) {
        const StreamKey key = filter_sample_key(9, t, m, i);
        CHECK(key.channel == Channel::kFilterSample);
        words.insert(key.counter_words());
      }
    }
  }
  CHECK(words.size() == 3 * M * N);
}

TEST_CASE("uniform and normal moments") {
  RngStream s(StreamKey{1, 0, 0, 0, Channel::kTest});
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = s.normal();
    sn += z;
    sn2 += z * z;
  }
  const double mu = su / n, vu = su2 / n - mu * mu;
  const double mn = sn / n, vn = sn2 / n - mn * mn;
  CHECK(std::abs(mu - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(vu - 1.0 / 12) < 5e-3);
  CHECK(std::abs(mn) < 5 / std::sqrt(double(n)));
  CHECK(std::abs(vn - 1.0) < 5 * std::sqrt(2.0 / n));
}

TEST_CASE("uniform_below is unbiased and in range") {
  RngStream s(StreamKey{2, 0, 0, 0, Channel::kTest});
  const std::uint64_t k = 7;
  std::vector<int> hist(k, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = s.uniform_below(k);
    REQUIRE(v < k);
    ++hist[v];
  }
  const double expect = double(n) / k;
  for (int h : hist) CHECK(std::abs(h - expect) < 5 * std::sqrt(expect));
  CHECK(s.uniform_below(1) == 0);
}
