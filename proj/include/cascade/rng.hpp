// Copyright 2026 The Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cascade {

/// Deterministic random stream identified by (seed, stream_id).
///
/// Streams with equal identifiers replay identical draw sequences. Child
/// streams are derived by hashing, so work split across tasks (or threads)
/// draws from streams that depend only on the task identity and never on
/// the execution schedule.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent stream keyed by `child_id`; does not advance this stream.
  RngStream child(std::uint64_t child_id) const;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Gamma(shape, 1) draw; shape > 0.
  double gamma(double shape);
  /// Index drawn from an (unnormalized, non-negative) weight vector.
  std::size_t categorical(std::span<const double> weights);
  /// Uniformly random permutation of `items` in place.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace cascade
