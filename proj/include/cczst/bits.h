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

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cczst {

/// Bit strings up to 32 bits wide are carried as the low bits of a uint32_t.
/// Text form is MSB-first '0'/'1' characters, exactly `width` of them.
using Word = uint32_t;

inline int parity(Word x) noexcept { return std::popcount(x) & 1; }

/// Inner product mod 2.
inline int dot(Word a, Word b) noexcept { return parity(a & b); }

inline std::string format_bits(Word value, int width) {
    std::string out(static_cast<size_t>(width), '0');
    for (int i = 0; i < width; i++) {
        if ((value >> (width - 1 - i)) & 1u) {
            out[static_cast<size_t>(i)] = '1';
        }
    }
    return out;
}

inline Word parse_bits(std::string_view text, int width) {
    if (static_cast<int>(text.size()) != width) {
        throw std::invalid_argument(
            "bit string '" + std::string(text) + "' has length " + std::to_string(text.size()) +
            ", expected " + std::to_string(width));
    }
    Word v = 0;
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bit string '" + std::string(text) + "' contains a non-binary character");
        }
        v = (v << 1) | static_cast<Word>(c - '0');
    }
    return v;
}

/// Three single bits, index 0 is the first qubit / coordinate.
using Bits3 = std::array<int, 3>;

/// Packs (b1,b2,b3) into an integer with b1 as the most significant bit,
/// matching the basis-state index convention of qsim.
inline unsigned pack3(const Bits3 &b) noexcept {
    return static_cast<unsigned>((b[0] << 2) | (b[1] << 1) | b[2]);
}

inline Bits3 unpack3(unsigned v) noexcept {
    return {static_cast<int>((v >> 2) & 1u), static_cast<int>((v >> 1) & 1u), static_cast<int>(v & 1u)};
}

inline std::string format3(const Bits3 &b) { return format_bits(pack3(b), 3); }

inline Bits3 parse3(std::string_view text) { return unpack3(parse_bits(text, 3)); }

}  // namespace cczst
