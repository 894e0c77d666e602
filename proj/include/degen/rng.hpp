// Copyright 2026 The degen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace degen {

// Counter-based random numbers. Every draw is a pure function of
// (key, stream, index), so results never depend on consumption order or on
// how replications are scheduled across threads.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream identifiers used by the sampler and the experiment harness.
enum class Stream : std::uint64_t {
  kDistance = 0,
  kSign = 1,
  kNoise = 2,
};

inline constexpr std::uint64_t counter_bits(std::uint64_t key,
                                            std::uint64_t stream,
                                            std::uint64_t index) {
  const std::uint64_t k = splitmix64(key ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  return splitmix64(k + splitmix64(index));
}

/// Uniform variate in the open interval (0, 1) with 53 random bits.
inline double uniform01(std::uint64_t key, Stream stream, std::uint64_t index) {
  const std::uint64_t bits = counter_bits(key, static_cast<std::uint64_t>(stream), index);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal quantile, accurate in both tails.
inline double normal_quantile(double u) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

/// Standard normal variate by inverse-CDF transform of the counter stream.
inline double standard_normal(std::uint64_t key, Stream stream, std::uint64_t index) {
  return normal_quantile(uniform01(key, stream, index));
}

/// Seed of replication `rep` at sample size `n` under `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n,
                                           std::uint64_t rep) {
  return splitmix64(splitmix64(master ^ splitmix64(n)) + 0xd1b54a32d192ed03ULL * (rep + 1));
}

}  // namespace degen
