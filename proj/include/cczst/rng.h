// Copyright 2026 The cczst Authors
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

#include <cstdint>
#include <limits>

namespace cczst {

/// 64-bit finalizer from SplitMix64. Used for every seed derivation in the
/// project (session seeds, sub-streams, key ids).
constexpr uint64_t mix64(uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Derives an independent child seed from a parent seed and a tag.
constexpr uint64_t derive_seed(uint64_t parent, uint64_t tag) noexcept {
    return mix64(mix64(parent + kGoldenGamma) ^ (tag * kGoldenGamma + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: output i is mix64(key + (i+1) * gamma).
///
/// Satisfies UniformRandomBitGenerator. Copying a generator copies its
/// position, so replay is a matter of keeping the seed.
class CounterRng {
   public:
    using result_type = uint64_t;

    explicit CounterRng(uint64_t seed) noexcept : key_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGoldenGamma); }

    /// Uniform integer in [0, bound). bound must be nonzero.
    uint64_t below(uint64_t bound) noexcept {
        // Lemire's multiply-shift with rejection; exact.
        uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<uint64_t>(m);
        if (low < bound) {
            uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    int bit() noexcept { return static_cast<int>((*this)() >> 63); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    uint64_t seed() const noexcept { return key_; }
    uint64_t position() const noexcept { return counter_; }

   private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace cczst
