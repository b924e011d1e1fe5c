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

#include "cczst/provers.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cczst::provers {

namespace {

constexpr uint64_t kTagNoise = 0x6e6f697365;  // "noise"

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// HonestProver

HonestProver::HonestProver(const entcf::Oracle &oracle, uint64_t seed, bool apply_ccz)
    : oracle_(oracle), rng_(seed), apply_ccz_(apply_ccz) {}

void HonestProver::require(Stage s, const char *what) const {
    if (stage_ != s) throw ProtocolError(std::string("prover: ") + what + " called out of protocol order");
}

std::array<Word, 3> HonestProver::commit(const std::array<KeyHandle, 3> &keys) {
    require(Stage::Fresh, "commit");
    std::array<Word, 3> ys{};
    for (size_t i = 0; i < 3; i++) {
        auto [y, c] = oracle_.sample_commitment(keys[i], rng_);
        ys[i] = y;
        commitments_[i] = c;
    }
    stage_ = Stage::Committed;
    return ys;
}

std::array<Preimage, 3> HonestProver::answer_preimage() {
    require(Stage::Committed, "answer_preimage");
    std::array<Preimage, 3> out{};
    for (size_t i = 0; i < 3; i++) {
        if (const auto *d = std::get_if<entcf::Definite>(&commitments_[i])) {
            out[i] = Preimage{d->b, d->x};
        } else {
            // Measuring a claw state in the computational basis: either branch.
            const auto &c = std::get<entcf::Claw>(commitments_[i]);
            int b = rng_.bit();
            out[i] = Preimage{b, b ? c.x1 : c.x0};
        }
    }
    stage_ = Stage::Done;
    return out;
}

std::array<Word, 3> HonestProver::answer_hadamard() {
    require(Stage::Committed, "answer_hadamard");
    std::array<Word, 3> ds{};
    std::array<qsim::PauliEigenstate, 3> qubits{};
    for (size_t i = 0; i < 3; i++) {
        auto opening = entcf::hadamard_open(commitments_[i], rng_);
        ds[i] = opening.d;
        collapsed_[i] = opening.qubit;
        qubits[i] = {opening.qubit.basis == entcf::CollapsedQubit::Basis::X, opening.qubit.bit};
    }
    qsim::StateVector psi = qsim::product_state(qubits);
    if (apply_ccz_) psi = qsim::apply_gate(psi, qsim::Gate::ccz());
    state_ = std::move(psi);
    stage_ = Stage::Opened;
    return ds;
}

Bits3 HonestProver::answer_questions(unsigned q) {
    require(Stage::Opened, "answer_questions");
    if (q > 7) throw ProtocolError("prover: questions must be 3 bits");
    auto dist = qsim::outcome_distribution(*state_, q);
    return answer_from_distribution(dist);
}

Bits3 HonestProver::answer_from_distribution(std::span<const double> distribution) {
    require(Stage::Opened, "answer_questions");
    unsigned v = qsim::sample_outcome(distribution, rng_);
    stage_ = Stage::Done;
    return unpack3(v);
}

// ---------------------------------------------------------------------------
// NoisyProver

NoisyProver::NoisyProver(std::unique_ptr<Prover> inner, NoiseSpec spec, uint64_t seed)
    : inner_(std::move(inner)), spec_(spec), rng_(derive_seed(seed, kTagNoise)) {
    if (!(spec_.epsilon >= 0.0 && spec_.epsilon <= 1.0)) {
        throw std::invalid_argument("noise probability must lie in [0, 1]");
    }
    if (spec_.model == NoiseSpec::Model::Depolarizing) {
        honest_ = dynamic_cast<HonestProver *>(inner_.get());
        if (honest_ == nullptr) throw std::invalid_argument("depolarizing noise needs a simulated (honest-class) prover");
    }
}

std::optional<qsim::DensityState> NoisyProver::device_density() const {
    if (spec_.model != NoiseSpec::Model::Depolarizing) return std::nullopt;
    auto psi = inner_->device_state();
    if (!psi) return std::nullopt;
    auto rho = qsim::DensityState::from_pure(*psi);
    for (int i = 0; i < 3; i++) rho = qsim::depolarize(rho, i, spec_.epsilon);
    return rho;
}

Bits3 NoisyProver::answer_questions(unsigned q) {
    if (spec_.model == NoiseSpec::Model::Depolarizing) {
        auto rho = device_density();
        if (!rho) throw ProtocolError("prover: answer_questions called out of protocol order");
        auto dist = qsim::outcome_distribution(*rho, q);
        return honest_->answer_from_distribution(dist);
    }
    Bits3 v = inner_->answer_questions(q);
    for (int &bit : v) {
        if (rng_.bernoulli(spec_.epsilon)) bit ^= 1;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Script / ScriptedProver

Script Script::parse(std::string_view text) {
    Script s;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        auto fail = [&](const std::string &why) {
            return std::invalid_argument("script line " + std::to_string(lineno) + ": " + why);
        };
        const std::string &kind = tok[0];
        if (kind == "commit") {
            Commit c;
            if (tok.size() == 2 && tok[1] == "sample") {
                c.sample = true;
            } else if (tok.size() == 4) {
                c.ys = {tok[1], tok[2], tok[3]};
            } else {
                throw fail("commit expects 'sample' or three images");
            }
            s.commits.push_back(c);
        } else if (kind == "preimage") {
            if (tok.size() != 4) throw fail("preimage expects three b:x pairs");
            std::array<std::pair<int, std::string>, 3> entry;
            for (size_t i = 0; i < 3; i++) {
                const std::string &t = tok[i + 1];
                if (t.size() < 3 || (t[0] != '0' && t[0] != '1') || t[1] != ':') throw fail("bad b:x pair '" + t + "'");
                entry[i] = {t[0] - '0', t.substr(2)};
            }
            s.preimages.push_back(entry);
        } else if (kind == "hadamard") {
            if (tok.size() != 4) throw fail("hadamard expects three strings");
            s.hadamards.push_back({tok[1], tok[2], tok[3]});
        } else if (kind == "answers") {
            if (tok.size() != 2) throw fail("answers expects one 3-bit string");
            try {
                s.answers.push_back(parse3(tok[1]));
            } catch (const std::invalid_argument &e) {
                throw fail(e.what());
            }
        } else {
            throw fail("unknown directive '" + kind + "'");
        }
    }
    if (s.commits.empty() && s.preimages.empty() && s.hadamards.empty() && s.answers.empty()) {
        throw std::invalid_argument("script is empty");
    }
    return s;
}

Script Script::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

ScriptedProver::ScriptedProver(const entcf::Oracle &oracle, std::shared_ptr<const Script> script, uint64_t seed)
    : oracle_(oracle), script_(std::move(script)), rng_(seed) {
    if (!script_) throw std::invalid_argument("scripted prover needs a script");
}

namespace {

template <typename T>
const T &pop(const std::vector<T> &queue, size_t &next, const char *what) {
    if (next >= queue.size()) throw ProtocolError(std::string("prover: script exhausted (") + what + ")");
    return queue[next++];
}

Word parse_field(const std::string &text, int width) {
    try {
        return parse_bits(text, width);
    } catch (const std::invalid_argument &e) {
        throw ProtocolError(std::string("prover: ") + e.what());
    }
}

}  // namespace

std::array<Word, 3> ScriptedProver::commit(const std::array<KeyHandle, 3> &keys) {
    w_ = keys[0].w;
    const auto &c = pop(script_->commits, next_commit_, "commit");
    std::array<Word, 3> ys{};
    for (size_t i = 0; i < 3; i++) {
        ys[i] = c.sample ? oracle_.sample_commitment(keys[i], rng_).first : parse_field(c.ys[i], w_ + 1);
    }
    return ys;
}

std::array<Preimage, 3> ScriptedProver::answer_preimage() {
    const auto &entry = pop(script_->preimages, next_preimage_, "preimage");
    std::array<Preimage, 3> out{};
    for (size_t i = 0; i < 3; i++) out[i] = Preimage{entry[i].first, parse_field(entry[i].second, w_)};
    return out;
}

std::array<Word, 3> ScriptedProver::answer_hadamard() {
    const auto &entry = pop(script_->hadamards, next_hadamard_, "hadamard");
    std::array<Word, 3> out{};
    for (size_t i = 0; i < 3; i++) out[i] = parse_field(entry[i], w_);
    return out;
}

Bits3 ScriptedProver::answer_questions(unsigned) { return pop(script_->answers, next_answer_, "answers"); }

// ---------------------------------------------------------------------------

ProverSpec ProverSpec::parse(std::string_view text) {
    ProverSpec spec;
    if (text == "honest") return spec;
    if (text == "stabilizer") {
        spec.kind = Kind::Stabilizer;
        return spec;
    }
    if (text.starts_with("scripted:")) {
        spec.kind = Kind::Scripted;
        spec.script_path = std::string(text.substr(9));
        spec.script = std::make_shared<const Script>(Script::load(spec.script_path));
        return spec;
    }
    if (text.starts_with("noisy:")) {
        std::string_view rest = text.substr(6);
        auto colon = rest.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("noisy prover needs model and epsilon");
        std::string_view model = rest.substr(0, colon);
        std::string eps_text(rest.substr(colon + 1));
        spec.kind = Kind::Noisy;
        if (model == "bitflip") {
            spec.noise.model = NoiseSpec::Model::BitFlip;
        } else if (model == "depol") {
            spec.noise.model = NoiseSpec::Model::Depolarizing;
        } else {
            throw std::invalid_argument("unknown noise model '" + std::string(model) + "'");
        }
        size_t used = 0;
        try {
            spec.noise.epsilon = std::stod(eps_text, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != eps_text.size()) throw std::invalid_argument("bad noise probability '" + eps_text + "'");
        if (!(spec.noise.epsilon >= 0.0 && spec.noise.epsilon <= 1.0)) {
            throw std::invalid_argument("noise probability must lie in [0, 1]");
        }
        return spec;
    }
    throw std::invalid_argument("unknown prover spec '" + std::string(text) + "'");
}

std::string ProverSpec::str() const {
    switch (kind) {
        case Kind::Honest:
            return "honest";
        case Kind::Stabilizer:
            return "stabilizer";
        case Kind::Scripted:
            return "scripted:" + script_path;
        case Kind::Noisy: {
            std::ostringstream out;
            out << "noisy:" << (noise.model == NoiseSpec::Model::BitFlip ? "bitflip" : "depol") << ':' << noise.epsilon;
            return out.str();
        }
    }
    return "honest";
}

std::unique_ptr<Prover> make_prover(const ProverSpec &spec, const entcf::Oracle &oracle, uint64_t seed) {
    switch (spec.kind) {
        case ProverSpec::Kind::Honest:
            return std::make_unique<HonestProver>(oracle, seed, true);
        case ProverSpec::Kind::Stabilizer:
            return std::make_unique<HonestProver>(oracle, seed, false);
        case ProverSpec::Kind::Noisy:
            return std::make_unique<NoisyProver>(std::make_unique<HonestProver>(oracle, seed, true), spec.noise, seed);
        case ProverSpec::Kind::Scripted:
            return std::make_unique<ScriptedProver>(oracle, spec.script, seed);
    }
    throw std::invalid_argument("unknown prover kind");
}

}  // namespace cczst::provers
