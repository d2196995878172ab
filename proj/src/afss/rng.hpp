// Copyright 2026  The AFSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace afss {

// Stable 64-bit FNV-1a; used to turn identifiers into substream keys.
std::uint64_t HashString(std::string_view s);

// Deterministic random substream. A stream is identified by a root seed, a
// sample identifier and a stage tag; the same triple always yields the same
// draws, regardless of which worker thread consumes it or in what order.
//
// Draws are produced from the raw engine output so that results do not depend
// on the standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view sample_id, std::string_view stage_tag);
  explicit RngStream(std::uint64_t key);

  // Child stream keyed off this stream's key (not its current position).
  RngStream Derive(std::string_view stage_tag) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1).
  double Uniform();
  // Uniform on [lo, hi]; returns lo when lo == hi.
  double Uniform(double lo, double hi);
  // Uniform integer on [lo, hi] inclusive.
  long UniformInt(long lo, long hi);
  // Uniform index on [0, n).
  std::size_t Index(std::size_t n);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace afss
