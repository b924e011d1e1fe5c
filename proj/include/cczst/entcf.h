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

// Idealized extended trapdoor claw-free function families.
//
// Both families are built on a secret permutation P_k of {0,1}^{w+1}:
//
//   G (injective pair):  f_{k,b}(x) = P_k(b || x)
//   F (claw-free pair):  f_{k,b}(x) = P_k(0 || (x ^ b*s_k)),  s_k != 0
//
// Outputs are deterministic (singleton distributions). Claw-freeness is a
// modeling assumption: provers only see KeyHandles and reach the functions
// through Oracle::eval / chk / sample_commitment.

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cczst/bits.h"
#include "cczst/rng.h"

namespace cczst::entcf {

constexpr int kMinWidth = 4;
constexpr int kMaxWidth = 24;

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnknownKeyError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Raised when a decoding map is applied to a trapdoor of the wrong family.
struct MisuseError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Family { F, G };

char family_char(Family f);
Family parse_family(std::string_view text);

/// Security parameter. The preimage width w equals lambda; X = {0,1}^w and
/// Y = {0,1}^{w+1}.
class SecurityParam {
   public:
    explicit SecurityParam(int lambda);
    int lambda() const { return lambda_; }
    int w() const { return lambda_; }
    int y_width() const { return lambda_ + 1; }

   private:
    int lambda_;
};

struct KeyHandle {
    uint64_t id = 0;
    int w = 0;
    bool operator==(const KeyHandle &) const = default;
};

/// Explicit permutation table over {0,1}^bits built by seeded Fisher-Yates.
/// The inverse table is materialized on first use.
class Permutation {
   public:
    Permutation(int bits, uint64_t seed);

    int bits() const { return bits_; }
    uint64_t size() const { return size_; }
    Word forward(Word v) const { return table_[v]; }
    /// The first few lookups scan the table; later ones use a cached inverse.
    Word inverse(Word v) const;

   private:
    static constexpr unsigned kLinearScans = 4;

    int bits_;
    size_t size_;
    std::unique_ptr<Word[]> table_;
    mutable std::atomic<unsigned> scans_{0};
    mutable std::atomic<bool> inverse_ready_{false};
    mutable std::once_flag inverse_once_;
    mutable std::unique_ptr<Word[]> inverse_;
};

/// Secret inversion material. `shift` is meaningful only for F keys.
struct Trapdoor {
    KeyHandle key;
    Family family = Family::G;
    uint64_t perm_seed = 0;
    Word shift = 0;
    std::shared_ptr<const Permutation> perm;
};

struct ClawPair {
    Word x0 = 0;
    Word x1 = 0;
    Word y = 0;
};

/// Flat exportable description of a key, sufficient to rebuild it.
struct KeyRecord {
    uint64_t id = 0;
    int w = 0;
    Family family = Family::G;
    uint64_t perm_seed = 0;
    Word shift = 0;
    bool operator==(const KeyRecord &) const = default;
};

KeyRecord export_key(const Trapdoor &t);

/// `id=<u64> w=<int> family=<F|G> perm_seed=<u64> shift=<bits|->`
std::string to_text(const KeyRecord &r);
KeyRecord parse_key_record(std::string_view text);

/// Post-measurement state of the (b, x) registers after the y register has
/// been measured.
struct Definite {  // |b>|x>
    int b = 0;
    Word x = 0;
    int w = 0;
};
struct Claw {  // (|0,x0> + |1,x1>)/sqrt(2)
    Word x0 = 0;
    Word x1 = 0;
    int w = 0;
};
using Commitment = std::variant<Definite, Claw>;

/// Single qubit left after the x register is measured in the Hadamard basis:
/// basis Z holds |bit>, basis X holds |+> (bit 0) or |-> (bit 1).
struct CollapsedQubit {
    enum class Basis { Z, X };
    Basis basis = Basis::Z;
    int bit = 0;
    bool operator==(const CollapsedQubit &) const = default;
};

struct Opening {
    Word d = 0;
    CollapsedQubit qubit;
};

struct Preimage {
    int b = 0;
    Word x = 0;
    bool operator==(const Preimage &) const = default;
};

/// Key registry. Append-only; reads are safe concurrently with each other,
/// registration takes an exclusive lock.
class Oracle {
   public:
    Oracle() = default;
    Oracle(const Oracle &) = delete;
    Oracle &operator=(const Oracle &) = delete;

    std::pair<KeyHandle, Trapdoor> gen(Family family, SecurityParam sp, uint64_t seed);

    /// Re-registers a previously exported key under its original id.
    Trapdoor restore(const KeyRecord &record);

    Word eval(KeyHandle k, int b, Word x) const;

    /// True iff eval(k, b, x) == y. Out-of-range arguments give false.
    bool chk(KeyHandle k, int b, Word x, Word y) const;

    /// Collapsed form of preparing the uniform superposition over (b, x) and
    /// measuring the y register.
    std::pair<Word, Commitment> sample_commitment(KeyHandle k, CounterRng &rng) const;

    size_t size() const;

   private:
    struct Record {
        int w;
        Family family;
        Word shift;
        std::shared_ptr<const Permutation> perm;
    };

    std::shared_ptr<const Record> lookup(KeyHandle k) const;
    Trapdoor insert(uint64_t id, int w, Family family, uint64_t perm_seed, Word shift);

    mutable std::shared_mutex mu_;
    std::unordered_map<uint64_t, std::shared_ptr<const Record>> records_;
};

/// Trapdoor-side evaluation; agrees with Oracle::eval / Oracle::chk.
Word eval(const Trapdoor &t, int b, Word x);
bool chk(const Trapdoor &t, int b, Word x, Word y);

/// G: returns (b̂, x̂) and ignores `b`. F: returns (b, x_b), or nullopt when y
/// is outside the image.
std::optional<Preimage> invert(const Trapdoor &t, int b, Word y);

/// Both claw preimages of an F key, or nullopt when y is outside the image.
std::optional<ClawPair> claw(const Trapdoor &t, Word y);

/// b̂(k, y) for G keys. Throws MisuseError for F keys.
std::optional<int> decode_b(const Trapdoor &t, Word y);

/// û(k, y, d) = d · (x̂0 ^ x̂1) for F keys. Throws MisuseError for G keys.
std::optional<int> decode_u(const Trapdoor &t, Word y, Word d);

Opening hadamard_open(const Commitment &c, CounterRng &rng);

}  // namespace cczst::entcf
