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

#include "cczst/engine.h"

#include <algorithm>
#include <atomic>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace cczst::engine {

using nlohmann::json;

uint64_t session_seed(uint64_t master_seed, uint64_t index) { return derive_seed(master_seed, index); }

// ---------------------------------------------------------------------------
// Messages

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {"KEYS",      "COMMIT",     "ROUND",   "PREIMAGES",
                                                        "HADAMARD_D", "QUESTIONS", "ANSWERS", "VERDICT"};

json bits_array(const std::array<Word, 3> &values, int width) {
    return json::array({format_bits(values[0], width), format_bits(values[1], width), format_bits(values[2], width)});
}

std::array<Word, 3> parse_bits_array(const json &j, int width) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected an array of three bit strings");
    std::array<Word, 3> out{};
    for (size_t i = 0; i < 3; i++) out[i] = parse_bits(j.at(i).get<std::string>(), width);
    return out;
}

json preimages_json(const std::array<entcf::Preimage, 3> &p, int w) {
    json arr = json::array();
    for (const auto &e : p) arr.push_back({{"b", e.b}, {"x", format_bits(e.x, w)}});
    return arr;
}

std::array<entcf::Preimage, 3> parse_preimages(const json &j, int w) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected three preimages");
    std::array<entcf::Preimage, 3> out{};
    for (size_t i = 0; i < 3; i++) {
        int b = j.at(i).at("b").get<int>();
        if (b != 0 && b != 1) throw std::invalid_argument("preimage bit must be 0/1");
        out[i] = entcf::Preimage{b, parse_bits(j.at(i).at("x").get<std::string>(), w)};
    }
    return out;
}

}  // namespace

std::string_view to_string(MessageKind k) { return kKindNames[static_cast<size_t>(k)]; }

MessageKind parse_message_kind(std::string_view text) {
    for (size_t i = 0; i < kKindNames.size(); i++) {
        if (kKindNames[i] == text) return static_cast<MessageKind>(i);
    }
    throw ProtocolError("unknown message kind '" + std::string(text) + "'");
}

std::string encode(const Message &m) {
    json j = {{"v", kSchemaVersion},
              {"sid", m.sid},
              {"seq", m.seq},
              {"kind", std::string(to_string(m.kind))},
              {"payload", m.payload}};
    return j.dump();
}

Message decode(std::string_view line) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) throw ProtocolError("frame is not a JSON object");
        if (j.at("v").get<int>() != kSchemaVersion) throw ProtocolError("unsupported schema version");
        Message m;
        m.sid = j.at("sid").get<uint64_t>();
        m.seq = j.at("seq").get<uint64_t>();
        m.kind = parse_message_kind(j.at("kind").get<std::string>());
        m.payload = j.at("payload");
        if (!m.payload.is_object()) throw ProtocolError("payload is not an object");
        return m;
    } catch (const json::exception &e) {
        throw ProtocolError(std::string("malformed frame: ") + e.what());
    }
}

Message keys_message(uint64_t sid, const std::array<entcf::KeyHandle, 3> &keys) {
    Message m{sid, 0, MessageKind::Keys, json::object()};
    m.payload["w"] = keys[0].w;
    m.payload["keys"] = json::array({keys[0].id, keys[1].id, keys[2].id});
    return m;
}

// ---------------------------------------------------------------------------
// Transcripts

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Accept:
            return "accept";
        case Outcome::Reject:
            return "reject";
    }
    return "reject";
}

Outcome parse_outcome(std::string_view text) {
    for (Outcome o : {Outcome::Accept, Outcome::Reject}) {
        if (to_string(o) == text) return o;
    }
    throw std::invalid_argument("unknown verdict '" + std::string(text) + "'");
}

json to_json(const SessionTranscript &t) {
    json j;
    j["index"] = t.index;
    j["seed"] = t.seed;
    j["w"] = t.w;
    j["theta"] = t.theta.str();
    j["keys"] = json::array({to_text(t.keys[0]), to_text(t.keys[1]), to_text(t.keys[2])});
    j["ys"] = t.ys ? bits_array(*t.ys, t.w + 1) : json(nullptr);
    j["round"] = t.round ? json(std::string(verifier::to_string(*t.round))) : json(nullptr);
    j["test_index"] = t.test_index ? json(*t.test_index) : json(nullptr);
    j["preimages"] = t.preimages ? preimages_json(*t.preimages, t.w) : json(nullptr);
    j["ds"] = t.ds ? bits_array(*t.ds, t.w) : json(nullptr);
    j["q"] = t.q ? json(format_bits(*t.q, 3)) : json(nullptr);
    j["v"] = t.v ? json(format3(*t.v)) : json(nullptr);
    j["flag"] = std::string(verifier::to_string(t.flag));
    j["verdict"] = std::string(to_string(t.verdict));
    j["abort"] = t.abort_reason;
    return j;
}

SessionTranscript transcript_from_json(const json &j) {
    SessionTranscript t;
    t.index = j.at("index").get<uint64_t>();
    t.seed = j.at("seed").get<uint64_t>();
    t.w = j.at("w").get<int>();
    entcf::SecurityParam sp(t.w);  // validates the width
    t.theta = BasisChoice::parse(j.at("theta").get<std::string>());
    const json &keys = j.at("keys");
    if (!keys.is_array() || keys.size() != 3) throw std::invalid_argument("expected three key records");
    for (size_t i = 0; i < 3; i++) t.keys[i] = entcf::parse_key_record(keys.at(i).get<std::string>());
    if (!j.at("ys").is_null()) t.ys = parse_bits_array(j.at("ys"), t.w + 1);
    if (!j.at("round").is_null()) t.round = verifier::parse_round(j.at("round").get<std::string>());
    if (!j.at("test_index").is_null()) {
        int i = j.at("test_index").get<int>();
        if (i < 1 || i > 3) throw std::invalid_argument("test_index must be 1..3");
        t.test_index = i;
    }
    if (!j.at("preimages").is_null()) t.preimages = parse_preimages(j.at("preimages"), t.w);
    if (!j.at("ds").is_null()) t.ds = parse_bits_array(j.at("ds"), t.w);
    if (!j.at("q").is_null()) t.q = parse_bits(j.at("q").get<std::string>(), 3);
    if (!j.at("v").is_null()) t.v = parse3(j.at("v").get<std::string>());
    t.flag = verifier::parse_flag(j.at("flag").get<std::string>());
    t.verdict = parse_outcome(j.at("verdict").get<std::string>());
    t.abort_reason = j.at("abort").get<std::string>();
    return t;
}

std::string to_line(const SessionTranscript &t) { return to_json(t).dump(); }

void write_transcripts(std::ostream &sink, std::span<const SessionTranscript> transcripts) {
    for (const auto &t : transcripts) sink << to_line(t) << '\n';
    sink.flush();
    if (!sink) throw std::runtime_error("failed to write transcripts");
}

std::vector<SessionTranscript> read_transcripts(std::istream &source) {
    std::vector<SessionTranscript> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(source, line)) {
        lineno++;
        if (line.empty()) continue;
        try {
            out.push_back(transcript_from_json(json::parse(line)));
        } catch (const std::exception &e) {
            throw TranscriptParseError(lineno, e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// FlagStats

size_t FlagStats::theta_index(const BasisChoice &theta) {
    const auto &all = BasisChoice::all();
    return static_cast<size_t>(std::find(all.begin(), all.end(), theta) - all.begin());
}

void FlagStats::add(const SessionTranscript &t) {
    sessions_++;
    if (!t.round) {
        early_aborts_++;
        return;
    }
    Cell cell = kNone;
    if (t.aborted()) {
        cell = kAbort;
    } else {
        switch (t.flag) {
            case Flag::None:
                cell = kNone;
                break;
            case Flag::FailPre:
                cell = kFailPre;
                break;
            case Flag::FailTest:
                cell = kFailTest;
                break;
            case Flag::FailHyper:
                cell = kFailHyper;
                break;
        }
    }
    counts_[static_cast<size_t>(*t.round)][theta_index(t.theta)][cell]++;
}

FlagStats &FlagStats::merge(const FlagStats &other) {
    for (size_t r = 0; r < 2; r++)
        for (size_t th = 0; th < 5; th++)
            for (size_t c = 0; c < kCells; c++) counts_[r][th][c] += other.counts_[r][th][c];
    sessions_ += other.sessions_;
    early_aborts_ += other.early_aborts_;
    return *this;
}

uint64_t FlagStats::count(RoundType r, const BasisChoice &theta, Cell c) const {
    return counts_[static_cast<size_t>(r)][theta_index(theta)][c];
}

uint64_t FlagStats::accepted() const {
    uint64_t n = 0;
    for (size_t r = 0; r < 2; r++)
        for (size_t th = 0; th < 5; th++) n += counts_[r][th][kNone];
    return n;
}

uint64_t FlagStats::pre_denominator() const {
    uint64_t n = 0;
    for (const auto &cells : counts_[static_cast<size_t>(RoundType::Preimage)])
        for (uint64_t c : cells) n += c;
    return n;
}

uint64_t FlagStats::pre_flags() const {
    uint64_t n = 0;
    for (const auto &cells : counts_[static_cast<size_t>(RoundType::Preimage)]) n += cells[kFailPre] + cells[kAbort];
    return n;
}

uint64_t FlagStats::test_denominator() const {
    uint64_t n = 0;
    const auto &had = counts_[static_cast<size_t>(RoundType::Hadamard)];
    for (size_t th = 0; th < 4; th++)
        for (uint64_t c : had[th]) n += c;
    return n;
}

uint64_t FlagStats::test_flags() const {
    uint64_t n = 0;
    const auto &had = counts_[static_cast<size_t>(RoundType::Hadamard)];
    for (size_t th = 0; th < 4; th++) n += had[th][kFailTest] + had[th][kAbort];
    return n;
}

uint64_t FlagStats::hyper_denominator() const {
    uint64_t n = 0;
    for (uint64_t c : counts_[static_cast<size_t>(RoundType::Hadamard)][4]) n += c;
    return n;
}

uint64_t FlagStats::hyper_flags() const {
    const auto &cells = counts_[static_cast<size_t>(RoundType::Hadamard)][4];
    return cells[kFailHyper] + cells[kAbort];
}

std::string FlagStats::summary() const {
    std::ostringstream out;
    out << "sessions " << sessions_ << "\n"
        << "accepted " << accepted() << "\n"
        << "early_aborts " << early_aborts_ << "\n"
        << "fail_Pre " << pre_flags() << " / " << pre_denominator() << " preimage rounds\n"
        << "fail_Test " << test_flags() << " / " << test_denominator() << " test-case Hadamard rounds\n"
        << "fail_Hyper " << hyper_flags() << " / " << hyper_denominator() << " hypergraph Hadamard rounds\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Session driver

namespace {

/// Verifier-side view of the prover: direct calls or a wire peer.
class ProverLink {
   public:
    virtual ~ProverLink() = default;
    virtual std::array<Word, 3> commit(const std::array<entcf::KeyHandle, 3> &keys) = 0;
    virtual std::array<entcf::Preimage, 3> preimage_round() = 0;
    virtual std::array<Word, 3> hadamard_round() = 0;
    virtual Bits3 questions(unsigned q) = 0;
    virtual void finish(const SessionTranscript &) {}
};

class LocalLink : public ProverLink {
   public:
    explicit LocalLink(std::unique_ptr<provers::Prover> p) : prover_(std::move(p)) {}
    std::array<Word, 3> commit(const std::array<entcf::KeyHandle, 3> &keys) override { return prover_->commit(keys); }
    std::array<entcf::Preimage, 3> preimage_round() override { return prover_->answer_preimage(); }
    std::array<Word, 3> hadamard_round() override { return prover_->answer_hadamard(); }
    Bits3 questions(unsigned q) override { return prover_->answer_questions(q); }

   private:
    std::unique_ptr<provers::Prover> prover_;
};

template <typename F>
auto guarded(F &&f) {
    try {
        return f();
    } catch (const json::exception &e) {
        throw ProtocolError(std::string("malformed payload: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ProtocolError(std::string("malformed payload: ") + e.what());
    }
}

class WireLink : public ProverLink {
   public:
    WireLink(LineChannel &ch, uint64_t sid, int w) : ch_(ch), sid_(sid), w_(w) {}

    std::array<Word, 3> commit(const std::array<entcf::KeyHandle, 3> &keys) override {
        Message m = keys_message(sid_, keys);
        send(m);
        Message r = expect(MessageKind::Commit);
        return guarded([&] { return parse_bits_array(r.payload.at("ys"), w_ + 1); });
    }

    std::array<entcf::Preimage, 3> preimage_round() override {
        send_round("preimage");
        Message r = expect(MessageKind::Preimages);
        return guarded([&] { return parse_preimages(r.payload.at("preimages"), w_); });
    }

    std::array<Word, 3> hadamard_round() override {
        send_round("hadamard");
        Message r = expect(MessageKind::HadamardD);
        return guarded([&] { return parse_bits_array(r.payload.at("ds"), w_); });
    }

    Bits3 questions(unsigned q) override {
        Message m{sid_, seq_, MessageKind::Questions, json::object()};
        m.payload["q"] = format_bits(q, 3);
        send(m);
        Message r = expect(MessageKind::Answers);
        return guarded([&] { return parse3(r.payload.at("v").get<std::string>()); });
    }

    void finish(const SessionTranscript &t) override {
        Message m{sid_, seq_, MessageKind::Verdict, json::object()};
        m.payload["verdict"] = std::string(to_string(t.verdict));
        m.payload["flag"] = std::string(verifier::to_string(t.flag));
        try {
            send(m);
        } catch (const std::exception &) {
            // peer already gone; the transcript carries the abort
        }
    }

   private:
    void send_round(const char *round) {
        Message m{sid_, seq_, MessageKind::Round, json::object()};
        m.payload["round"] = round;
        send(m);
    }

    void send(Message &m) {
        m.seq = seq_++;
        ch_.write_line(encode(m));
    }

    Message expect(MessageKind kind) {
        auto line = ch_.read_line();
        if (!line) throw ProtocolError("connection closed while waiting for " + std::string(to_string(kind)));
        Message m = decode(*line);
        if (m.sid != sid_ || m.seq != seq_ || m.kind != kind) {
            throw ProtocolError("unexpected frame: got " + std::string(to_string(m.kind)) + " sid " +
                                std::to_string(m.sid) + " seq " + std::to_string(m.seq) + ", expected " +
                                std::string(to_string(kind)) + " seq " + std::to_string(seq_));
        }
        seq_++;
        return m;
    }

    LineChannel &ch_;
    uint64_t sid_;
    int w_;
    uint64_t seq_ = 0;
};

struct SessionSetup {
    std::unique_ptr<entcf::Oracle> oracle;
    std::optional<verifier::VerifierSession> session;
    CounterRng verifier_rng{0};
    uint64_t seed = 0;
};

SessionSetup setup_session(entcf::SecurityParam sp, uint64_t master_seed, uint64_t index) {
    SessionSetup s;
    s.seed = session_seed(master_seed, index);
    s.oracle = std::make_unique<entcf::Oracle>();
    s.verifier_rng = CounterRng(derive_seed(s.seed, kVerifierStreamTag));
    s.session.emplace(verifier::VerifierSession::begin(*s.oracle, sp, s.verifier_rng));
    return s;
}

SessionTranscript drive(SessionSetup &s, ProverLink &link, uint64_t index) {
    auto &vs = *s.session;
    SessionTranscript t;
    t.index = index;
    t.seed = s.seed;
    t.w = vs.w();
    t.theta = vs.theta();
    for (size_t i = 0; i < 3; i++) t.keys[i] = entcf::export_key(vs.trapdoor(i));
    try {
        auto ys = link.commit(vs.keys());
        RoundType round = vs.receive_commit(ys, s.verifier_rng);
        t.ys = ys;
        t.round = round;
        if (round == RoundType::Preimage) {
            auto answers = link.preimage_round();
            t.preimages = answers;
            t.flag = vs.check_preimage(answers);
        } else {
            auto ds = link.hadamard_round();
            t.ds = ds;
            const auto &qs = vs.send_questions(s.verifier_rng);
            t.q = qs.q;
            t.test_index = qs.test_index;
            auto v = link.questions(qs.q);
            t.v = v;
            t.flag = vs.check_hadamard(ds, v);
        }
        t.verdict = vs.verdict() == verifier::Verdict::Accept ? Outcome::Accept : Outcome::Reject;
    } catch (const std::exception &e) {
        t.verdict = Outcome::Reject;
        t.flag = Flag::None;
        t.abort_reason = *e.what() ? e.what() : "aborted";
    }
    link.finish(t);
    return t;
}

}  // namespace

ProverFactory factory_for(const provers::ProverSpec &spec) {
    return [spec](const entcf::Oracle &oracle, uint64_t seed) { return provers::make_prover(spec, oracle, seed); };
}

SessionTranscript run_session(entcf::SecurityParam sp, const ProverFactory &prover, uint64_t master_seed,
                              uint64_t index) {
    SessionSetup s = setup_session(sp, master_seed, index);
    LocalLink link(prover(*s.oracle, derive_seed(s.seed, kProverStreamTag)));
    return drive(s, link, index);
}

SessionTranscript run_session(entcf::SecurityParam sp, const provers::ProverSpec &prover, uint64_t master_seed,
                              uint64_t index) {
    return run_session(sp, factory_for(prover), master_seed, index);
}

BatchResult run_batch(entcf::SecurityParam sp, const ProverFactory &prover, uint64_t n, uint64_t master_seed,
                      unsigned parallelism, bool keep_transcripts) {
    BatchResult result;
    if (keep_transcripts) result.transcripts.resize(n);
    const unsigned workers = std::max(1u, parallelism);
    std::vector<FlagStats> partial(workers);
    std::atomic<uint64_t> next{0};
    auto work = [&](unsigned id) {
        for (uint64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            SessionTranscript t = run_session(sp, prover, master_seed, i);
            partial[id].add(t);
            if (keep_transcripts) result.transcripts[i] = std::move(t);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned id = 0; id < workers; id++) pool.emplace_back(work, id);
    }
    for (const auto &p : partial) result.stats.merge(p);
    return result;
}

std::vector<SessionTranscript> serve(entcf::SecurityParam sp, LineChannel &channel, uint64_t master_seed, uint64_t n,
                                     uint64_t first_index) {
    std::vector<SessionTranscript> out;
    out.reserve(n);
    for (uint64_t i = first_index; i < first_index + n; i++) {
        SessionSetup s = setup_session(sp, master_seed, i);
        WireLink link(channel, i, sp.w());
        out.push_back(drive(s, link, i));
    }
    return out;
}

uint64_t connect(LineChannel &channel, const ProverFactory &prover, uint64_t master_seed) {
    uint64_t finished = 0;
    // Per-session state, rebuilt on every KEYS frame.
    std::optional<SessionSetup> local;
    std::unique_ptr<provers::Prover> device;
    uint64_t sid = 0, seq = 0;

    auto reply = [&](MessageKind kind, json payload) {
        Message m{sid, seq++, kind, std::move(payload)};
        channel.write_line(encode(m));
    };

    while (auto line = channel.read_line()) {
        Message m = decode(*line);
        if (m.kind == MessageKind::Keys) {
            sid = m.sid;
            seq = 0;
            if (m.seq != 0) throw ProtocolError("KEYS frame must open a session with seq 0");
            int w = m.payload.at("w").get<int>();
            // Trusted setup: replay the verifier's key generation for this
            // session so the local oracle holds the same functions.
            local.emplace(setup_session(entcf::SecurityParam(w), master_seed, sid));
            std::array<entcf::KeyHandle, 3> keys{};
            const json &ids = m.payload.at("keys");
            for (size_t i = 0; i < 3; i++) keys[i] = entcf::KeyHandle{ids.at(i).get<uint64_t>(), w};
            if (keys != local->session->keys()) {
                throw ProtocolError("received keys do not match the shared setup (different master seed?)");
            }
            device = prover(*local->oracle, derive_seed(local->seed, kProverStreamTag));
            seq = 1;
            reply(MessageKind::Commit, {{"ys", bits_array(device->commit(keys), w + 1)}});
            continue;
        }
        if (!device || m.sid != sid || m.seq != seq) {
            throw ProtocolError("unexpected frame " + std::string(to_string(m.kind)) + " for session " +
                                std::to_string(m.sid));
        }
        seq++;
        const int w = local->session->w();
        switch (m.kind) {
            case MessageKind::Round: {
                auto round = verifier::parse_round(m.payload.at("round").get<std::string>());
                if (round == RoundType::Preimage) {
                    reply(MessageKind::Preimages, {{"preimages", preimages_json(device->answer_preimage(), w)}});
                } else {
                    reply(MessageKind::HadamardD, {{"ds", bits_array(device->answer_hadamard(), w)}});
                }
                break;
            }
            case MessageKind::Questions: {
                unsigned q = parse_bits(m.payload.at("q").get<std::string>(), 3);
                reply(MessageKind::Answers, {{"v", format3(device->answer_questions(q))}});
                break;
            }
            case MessageKind::Verdict:
                finished++;
                device.reset();
                local.reset();
                break;
            default:
                throw ProtocolError("prover received a verifier-bound frame " + std::string(to_string(m.kind)));
        }
    }
    return finished;
}

}  // namespace cczst::engine
