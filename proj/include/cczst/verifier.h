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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cczst/bits.h"
#include "cczst/entcf.h"
#include "cczst/protocol_error.h"
#include "cczst/rng.h"

namespace cczst::verifier {

using cczst::ProtocolError;

enum class RoundType { Preimage, Hadamard };
enum class Flag { None, FailPre, FailTest, FailHyper };
enum class Verdict { Accept, Reject };

std::string_view to_string(RoundType r);
std::string_view to_string(Flag f);
std::string_view to_string(Verdict v);
RoundType parse_round(std::string_view text);
Flag parse_flag(std::string_view text);

/// θ ∈ {000, 001, 010, 100, 111}; bit i selects F (1) or G (0) for key i.
class BasisChoice {
   public:
    explicit BasisChoice(const Bits3 &bits);

    static const std::array<BasisChoice, 5> &all();
    static BasisChoice parse(std::string_view text);

    const Bits3 &bits() const { return bits_; }
    int operator[](size_t i) const { return bits_[i]; }
    int weight() const { return bits_[0] + bits_[1] + bits_[2]; }
    bool is_test() const { return weight() <= 1; }
    bool is_hypergraph() const { return weight() == 3; }
    std::string str() const { return format3(bits_); }
    bool operator==(const BasisChoice &) const = default;

   private:
    Bits3 bits_;
};

using MaybeBit = std::optional<int>;

/// Hadamard-round check table as a pure function of the decoded bits.
///
/// `b_hat[j]` is b̂(k_j, y_j) and `u_hat[j]` is û(k_j, y_j, d_j); an empty
/// value means decoding failed and any row that reads it raises its flag.
/// `test_index` (1..3) is read only when θ = 000. Rows:
///   θ=000:        fail_Test  iff q_i = 0 and b̂_i != v_i
///   θ=e_j:        fail_Test  iff q_j = 1 and û_j ^ Π_{l!=j} b̂_l != v_j
///   θ=111:        fail_Hyper iff q = e_j and û_j != v_j ^ Π_{l!=j} v_l
/// Every other (θ, q) combination is unchecked.
Flag evaluate_check_table(const BasisChoice &theta, unsigned q, int test_index, const std::array<MaybeBit, 3> &b_hat,
                          const std::array<MaybeBit, 3> &u_hat, const Bits3 &v);

struct Questions {
    unsigned q = 0;              // q1 q2 q3, q1 most significant
    std::optional<int> test_index;  // 1..3, present iff θ = 000
};

/// The classical verifier of one protocol run. Single owner, sequential.
class VerifierSession {
   public:
    /// Samples θ, generates one key per coordinate into `oracle` and keeps
    /// the trapdoors. The handles in keys() are what the prover receives.
    static VerifierSession begin(entcf::Oracle &oracle, entcf::SecurityParam sp, CounterRng &rng);

    /// Stores the prover's images and draws the round type.
    RoundType receive_commit(const std::array<Word, 3> &ys, CounterRng &rng);

    Flag check_preimage(const std::array<entcf::Preimage, 3> &answers);

    const Questions &send_questions(CounterRng &rng);

    /// Fixes the questions instead of sampling them (transcript replay).
    const Questions &assign_questions(const Questions &questions);

    Flag check_hadamard(const std::array<Word, 3> &ds, const Bits3 &vs);

    Verdict verdict() const;

    const BasisChoice &theta() const { return theta_; }
    const std::array<entcf::KeyHandle, 3> &keys() const { return keys_; }
    const entcf::Trapdoor &trapdoor(size_t i) const { return trapdoors_.at(i); }
    const std::array<Word, 3> &ys() const { return ys_; }
    std::optional<RoundType> round() const { return round_; }
    const std::optional<Questions> &questions() const { return questions_; }
    Flag flag() const { return flag_; }
    bool complete() const { return stage_ == Stage::Done; }
    int w() const { return w_; }

   private:
    enum class Stage { Begun, Committed, QuestionsSent, Done };

    VerifierSession(BasisChoice theta, int w) : theta_(theta), w_(w) {}
    void require(Stage s, const char *what) const;

    BasisChoice theta_;
    int w_;
    std::array<entcf::KeyHandle, 3> keys_{};
    std::array<entcf::Trapdoor, 3> trapdoors_{};
    std::array<Word, 3> ys_{};
    std::optional<RoundType> round_;
    std::optional<Questions> questions_;
    Flag flag_ = Flag::None;
    Stage stage_ = Stage::Begun;
};

}  // namespace cczst::verifier
