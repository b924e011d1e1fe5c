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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cczst/bits.h"
#include "cczst/entcf.h"
#include "cczst/protocol_error.h"
#include "cczst/qsim.h"
#include "cczst/rng.h"

namespace cczst::provers {

using entcf::KeyHandle;
using entcf::Preimage;

/// What the verifier can ask of a device, in protocol order:
/// commit, then either answer_preimage or answer_hadamard + answer_questions.
/// A prover never sees θ or trapdoors.
class Prover {
   public:
    virtual ~Prover() = default;

    virtual std::array<Word, 3> commit(const std::array<KeyHandle, 3> &keys) = 0;
    virtual std::array<Preimage, 3> answer_preimage() = 0;
    virtual std::array<Word, 3> answer_hadamard() = 0;
    virtual Bits3 answer_questions(unsigned q) = 0;

    /// White-box view of the 3-qubit device state after answer_hadamard, for
    /// simulated provers that have one.
    virtual std::optional<qsim::StateVector> device_state() const { return std::nullopt; }
};

/// Collapses the quantum steps through sample_commitment / hadamard_open, then
/// applies CCZ to the three collapsed qubits. With apply_ccz = false it is the
/// magicless "stabilizer" device.
class HonestProver : public Prover {
   public:
    HonestProver(const entcf::Oracle &oracle, uint64_t seed, bool apply_ccz = true);

    std::array<Word, 3> commit(const std::array<KeyHandle, 3> &keys) override;
    std::array<Preimage, 3> answer_preimage() override;
    std::array<Word, 3> answer_hadamard() override;
    Bits3 answer_questions(unsigned q) override;
    std::optional<qsim::StateVector> device_state() const override { return state_; }

    /// Samples the answer from a caller-supplied outcome table using this
    /// prover's own randomness. Same ordering rules as answer_questions.
    Bits3 answer_from_distribution(std::span<const double> distribution);

    const std::array<entcf::Commitment, 3> &commitments() const { return commitments_; }
    const std::array<entcf::CollapsedQubit, 3> &collapsed() const { return collapsed_; }

   private:
    enum class Stage { Fresh, Committed, Opened, Done };
    void require(Stage s, const char *what) const;

    const entcf::Oracle &oracle_;
    CounterRng rng_;
    bool apply_ccz_;
    Stage stage_ = Stage::Fresh;
    std::array<entcf::Commitment, 3> commitments_{};
    std::array<entcf::CollapsedQubit, 3> collapsed_{};
    std::optional<qsim::StateVector> state_;
};

struct NoiseSpec {
    enum class Model { BitFlip, Depolarizing };
    Model model = Model::BitFlip;
    double epsilon = 0.0;
};

/// Honest-class prover with noise on the measurement step. Bit-flip noise
/// flips each returned v_i with probability ε; depolarizing noise replaces
/// each qubit by the maximally mixed state with probability ε before the
/// measurement. Depolarizing noise needs an HonestProver inside.
class NoisyProver : public Prover {
   public:
    NoisyProver(std::unique_ptr<Prover> inner, NoiseSpec spec, uint64_t seed);

    std::array<Word, 3> commit(const std::array<KeyHandle, 3> &keys) override { return inner_->commit(keys); }
    std::array<Preimage, 3> answer_preimage() override { return inner_->answer_preimage(); }
    std::array<Word, 3> answer_hadamard() override { return inner_->answer_hadamard(); }
    Bits3 answer_questions(unsigned q) override;
    std::optional<qsim::StateVector> device_state() const override { return inner_->device_state(); }

    /// The depolarized device state, when the model is depolarizing.
    std::optional<qsim::DensityState> device_density() const;

   private:
    std::unique_ptr<Prover> inner_;
    HonestProver *honest_ = nullptr;
    NoiseSpec spec_;
    CounterRng rng_;
};

/// Fixed answers. Each directive kind is a queue consumed in order; reading
/// from an empty queue throws ProtocolError. Text form, one directive per
/// line, '#' starts a comment:
///
///   commit sample            (honest sampling through the oracle)
///   commit <y1> <y2> <y3>
///   preimage <b1>:<x1> <b2>:<x2> <b3>:<x3>
///   hadamard <d1> <d2> <d3>
///   answers <v1v2v3>
struct Script {
    struct Commit {
        bool sample = false;
        std::array<std::string, 3> ys;
    };
    std::vector<Commit> commits;
    std::vector<std::array<std::pair<int, std::string>, 3>> preimages;
    std::vector<std::array<std::string, 3>> hadamards;
    std::vector<Bits3> answers;

    static Script parse(std::string_view text);
    static Script load(const std::string &path);
};

class ScriptedProver : public Prover {
   public:
    ScriptedProver(const entcf::Oracle &oracle, std::shared_ptr<const Script> script, uint64_t seed);

    std::array<Word, 3> commit(const std::array<KeyHandle, 3> &keys) override;
    std::array<Preimage, 3> answer_preimage() override;
    std::array<Word, 3> answer_hadamard() override;
    Bits3 answer_questions(unsigned q) override;

   private:
    const entcf::Oracle &oracle_;
    std::shared_ptr<const Script> script_;
    CounterRng rng_;
    int w_ = 0;
    size_t next_commit_ = 0, next_preimage_ = 0, next_hadamard_ = 0, next_answer_ = 0;
};

/// Parsed CLI prover selector: `honest`, `stabilizer`, `noisy:bitflip:<ε>`,
/// `noisy:depol:<ε>`, `scripted:<path>`.
struct ProverSpec {
    enum class Kind { Honest, Stabilizer, Noisy, Scripted };
    Kind kind = Kind::Honest;
    NoiseSpec noise;
    std::string script_path;
    std::shared_ptr<const Script> script;

    static ProverSpec parse(std::string_view text);
    std::string str() const;
};

std::unique_ptr<Prover> make_prover(const ProverSpec &spec, const entcf::Oracle &oracle, uint64_t seed);

}  // namespace cczst::provers
