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

// Session orchestration: message schema, transcripts, flag statistics,
// in-process and wire execution, and the batch runner. Field names of the
// wire and transcript records are documented in docs/schema.md.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cczst/entcf.h"
#include "cczst/provers.h"
#include "cczst/transport.h"
#include "cczst/verifier.h"

namespace cczst::engine {

using verifier::BasisChoice;
using verifier::Flag;
using verifier::RoundType;

constexpr int kSchemaVersion = 1;

/// session_seed = mix64(mix64(master_seed + γ) ^ (index·γ + c)), i.e.
/// derive_seed(master_seed, index). Verifier and prover streams are derived
/// from it with the tags below.
uint64_t session_seed(uint64_t master_seed, uint64_t index);
constexpr uint64_t kVerifierStreamTag = 0x5645524946;  // "VERIF"
constexpr uint64_t kProverStreamTag = 0x50524f5645;    // "PROVE"

// ---------------------------------------------------------------------------
// Messages

enum class MessageKind { Keys, Commit, Round, Preimages, HadamardD, Questions, Answers, Verdict };

std::string_view to_string(MessageKind k);
MessageKind parse_message_kind(std::string_view text);

struct Message {
    uint64_t sid = 0;
    uint64_t seq = 0;
    MessageKind kind = MessageKind::Keys;
    nlohmann::json payload = nlohmann::json::object();
};

/// One line: {"kind":..,"payload":{..},"seq":..,"sid":..,"v":1}.
std::string encode(const Message &m);

/// Throws ProtocolError on anything that is not a well-formed version-1 frame.
Message decode(std::string_view line);

/// KEYS payload: {"w": w, "keys": [id1, id2, id3]}. Only public handles.
Message keys_message(uint64_t sid, const std::array<entcf::KeyHandle, 3> &keys);

// ---------------------------------------------------------------------------
// Transcripts

/// An aborted session is a rejection with a non-empty abort reason.
enum class Outcome { Accept, Reject };
std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view text);

struct SessionTranscript {
    uint64_t index = 0;
    uint64_t seed = 0;  // session seed
    int w = 0;
    BasisChoice theta{Bits3{0, 0, 0}};
    std::array<entcf::KeyRecord, 3> keys{};
    std::optional<std::array<Word, 3>> ys;
    std::optional<RoundType> round;
    std::optional<int> test_index;
    std::optional<std::array<entcf::Preimage, 3>> preimages;
    std::optional<std::array<Word, 3>> ds;
    std::optional<unsigned> q;
    std::optional<Bits3> v;
    Flag flag = Flag::None;
    Outcome verdict = Outcome::Reject;
    std::string abort_reason;

    bool aborted() const { return !abort_reason.empty(); }

    bool operator==(const SessionTranscript &) const = default;
};

nlohmann::json to_json(const SessionTranscript &t);
SessionTranscript transcript_from_json(const nlohmann::json &j);

/// One JSON record per line, keys sorted; the serialization is canonical.
std::string to_line(const SessionTranscript &t);

struct TranscriptParseError : std::runtime_error {
    TranscriptParseError(size_t line, const std::string &what)
        : std::runtime_error("transcript line " + std::to_string(line) + ": " + what), line_number(line) {}
    size_t line_number;
};

void write_transcripts(std::ostream &sink, std::span<const SessionTranscript> transcripts);
std::vector<SessionTranscript> read_transcripts(std::istream &source);

// ---------------------------------------------------------------------------
// Flag statistics

/// Session counts by (round type, θ) × outcome. Aborted sessions whose round
/// was drawn count as flagged in that round's conditional; aborts before the
/// round draw are tallied separately.
class FlagStats {
   public:
    enum Cell { kNone = 0, kFailPre, kFailTest, kFailHyper, kAbort, kCells };

    void add(const SessionTranscript &t);
    FlagStats &merge(const FlagStats &other);

    uint64_t count(RoundType r, const BasisChoice &theta, Cell c) const;
    uint64_t sessions() const { return sessions_; }
    uint64_t early_aborts() const { return early_aborts_; }
    uint64_t accepted() const;

    // Pr{fail_Pre | preimage round}
    uint64_t pre_denominator() const;
    uint64_t pre_flags() const;
    // Pr{fail_Test | test case, Hadamard round}
    uint64_t test_denominator() const;
    uint64_t test_flags() const;
    // Pr{fail_Hyper | θ = 111, Hadamard round}
    uint64_t hyper_denominator() const;
    uint64_t hyper_flags() const;

    std::string summary() const;

    bool operator==(const FlagStats &) const = default;

   private:
    static size_t theta_index(const BasisChoice &theta);

    std::array<std::array<std::array<uint64_t, kCells>, 5>, 2> counts_{};
    uint64_t sessions_ = 0;
    uint64_t early_aborts_ = 0;
};

// ---------------------------------------------------------------------------
// Execution

using ProverFactory = std::function<std::unique_ptr<provers::Prover>(const entcf::Oracle &, uint64_t seed)>;

ProverFactory factory_for(const provers::ProverSpec &spec);

/// One full protocol run with a fresh oracle. Any exception thrown by either
/// party ends the session as an abort.
SessionTranscript run_session(entcf::SecurityParam sp, const ProverFactory &prover, uint64_t master_seed,
                              uint64_t index);
SessionTranscript run_session(entcf::SecurityParam sp, const provers::ProverSpec &prover, uint64_t master_seed,
                              uint64_t index);

struct BatchResult {
    FlagStats stats;
    std::vector<SessionTranscript> transcripts;  // filled only when requested
};

/// Sessions 0..n-1 on `parallelism` worker threads. Statistics and the
/// transcript order do not depend on scheduling.
BatchResult run_batch(entcf::SecurityParam sp, const ProverFactory &prover, uint64_t n, uint64_t master_seed,
                      unsigned parallelism, bool keep_transcripts = false);

/// Verifier side over a channel: hosts sessions first_index..first_index+n-1.
std::vector<SessionTranscript> serve(entcf::SecurityParam sp, LineChannel &channel, uint64_t master_seed, uint64_t n,
                                     uint64_t first_index = 0);

/// Prover side: answers sessions until the peer closes the stream. The
/// oracle is rebuilt locally from the shared master seed. Returns the number
/// of sessions that reached a verdict.
uint64_t connect(LineChannel &channel, const ProverFactory &prover, uint64_t master_seed);

}  // namespace cczst::engine
