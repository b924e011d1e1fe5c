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

#include "cczst/verifier.h"

namespace cczst::verifier {

std::string_view to_string(RoundType r) { return r == RoundType::Preimage ? "preimage" : "hadamard"; }

std::string_view to_string(Flag f) {
    switch (f) {
        case Flag::None:
            return "none";
        case Flag::FailPre:
            return "fail_Pre";
        case Flag::FailTest:
            return "fail_Test";
        case Flag::FailHyper:
            return "fail_Hyper";
    }
    return "none";
}

std::string_view to_string(Verdict v) { return v == Verdict::Accept ? "accept" : "reject"; }

RoundType parse_round(std::string_view text) {
    if (text == "preimage") return RoundType::Preimage;
    if (text == "hadamard") return RoundType::Hadamard;
    throw std::invalid_argument("unknown round type '" + std::string(text) + "'");
}

Flag parse_flag(std::string_view text) {
    for (Flag f : {Flag::None, Flag::FailPre, Flag::FailTest, Flag::FailHyper}) {
        if (to_string(f) == text) return f;
    }
    throw std::invalid_argument("unknown flag '" + std::string(text) + "'");
}

BasisChoice::BasisChoice(const Bits3 &bits) : bits_(bits) {
    for (int b : bits_) {
        if (b != 0 && b != 1) throw std::invalid_argument("basis choice bits must be 0/1");
    }
    int wt = weight();
    if (wt == 2) throw std::invalid_argument("basis choice " + format3(bits_) + " is not in {000,001,010,100,111}");
}

const std::array<BasisChoice, 5> &BasisChoice::all() {
    static const std::array<BasisChoice, 5> kAll = {
        BasisChoice({0, 0, 0}), BasisChoice({0, 0, 1}), BasisChoice({0, 1, 0}), BasisChoice({1, 0, 0}),
        BasisChoice({1, 1, 1})};
    return kAll;
}

BasisChoice BasisChoice::parse(std::string_view text) { return BasisChoice(parse3(text)); }

Flag evaluate_check_table(const BasisChoice &theta, unsigned q, int test_index, const std::array<MaybeBit, 3> &b_hat,
                          const std::array<MaybeBit, 3> &u_hat, const Bits3 &v) {
    const Bits3 qb = unpack3(q);
    if (theta.weight() == 0) {
        if (test_index < 1 || test_index > 3) throw std::invalid_argument("test index must be 1..3");
        const auto i = static_cast<size_t>(test_index - 1);
        if (qb[i] != 0) return Flag::None;
        if (!b_hat[i] || *b_hat[i] != v[i]) return Flag::FailTest;
        return Flag::None;
    }
    if (theta.weight() == 1) {
        size_t j = theta[0] ? 0 : theta[1] ? 1 : 2;
        if (qb[j] != 1) return Flag::None;
        size_t l = (j + 1) % 3, m = (j + 2) % 3;
        if (!u_hat[j] || !b_hat[l] || !b_hat[m]) return Flag::FailTest;
        return (*u_hat[j] ^ (*b_hat[l] & *b_hat[m])) != v[j] ? Flag::FailTest : Flag::None;
    }
    // Hypergraph case: only q of weight one is checked.
    if (qb[0] + qb[1] + qb[2] != 1) return Flag::None;
    size_t j = qb[0] ? 0 : qb[1] ? 1 : 2;
    size_t l = (j + 1) % 3, m = (j + 2) % 3;
    if (!u_hat[j]) return Flag::FailHyper;
    return *u_hat[j] != (v[j] ^ (v[l] & v[m])) ? Flag::FailHyper : Flag::None;
}

void VerifierSession::require(Stage s, const char *what) const {
    if (stage_ != s) throw ProtocolError(std::string(what) + " called out of protocol order");
}

VerifierSession VerifierSession::begin(entcf::Oracle &oracle, entcf::SecurityParam sp, CounterRng &rng) {
    const BasisChoice theta = BasisChoice::all()[rng.below(5)];
    VerifierSession s(theta, sp.w());
    for (size_t i = 0; i < 3; i++) {
        auto family = theta[i] ? entcf::Family::F : entcf::Family::G;
        auto [key, trapdoor] = oracle.gen(family, sp, rng());
        s.keys_[i] = key;
        s.trapdoors_[i] = std::move(trapdoor);
    }
    return s;
}

RoundType VerifierSession::receive_commit(const std::array<Word, 3> &ys, CounterRng &rng) {
    require(Stage::Begun, "receive_commit");
    for (Word y : ys) {
        if ((y >> (w_ + 1)) != 0) {
            throw ProtocolError("commitment image wider than " + std::to_string(w_ + 1) + " bits");
        }
    }
    ys_ = ys;
    round_ = rng.bit() ? RoundType::Hadamard : RoundType::Preimage;
    stage_ = Stage::Committed;
    return *round_;
}

Flag VerifierSession::check_preimage(const std::array<entcf::Preimage, 3> &answers) {
    require(Stage::Committed, "check_preimage");
    if (round_ != RoundType::Preimage) throw ProtocolError("check_preimage in a Hadamard round");
    flag_ = Flag::None;
    for (size_t i = 0; i < 3; i++) {
        if (!entcf::chk(trapdoors_[i], answers[i].b, answers[i].x, ys_[i])) {
            flag_ = Flag::FailPre;
            break;
        }
    }
    stage_ = Stage::Done;
    return flag_;
}

const Questions &VerifierSession::send_questions(CounterRng &rng) {
    require(Stage::Committed, "send_questions");
    if (round_ != RoundType::Hadamard) throw ProtocolError("send_questions in a preimage round");
    Questions q;
    q.q = static_cast<unsigned>(rng.below(8));
    if (theta_.weight() == 0) q.test_index = 1 + static_cast<int>(rng.below(3));
    questions_ = q;
    stage_ = Stage::QuestionsSent;
    return *questions_;
}

const Questions &VerifierSession::assign_questions(const Questions &questions) {
    require(Stage::Committed, "assign_questions");
    if (round_ != RoundType::Hadamard) throw ProtocolError("assign_questions in a preimage round");
    if (questions.q > 7) throw std::invalid_argument("questions must be 3 bits");
    if ((theta_.weight() == 0) != questions.test_index.has_value()) {
        throw std::invalid_argument("test index must be present exactly when theta = 000");
    }
    if (questions.test_index && (*questions.test_index < 1 || *questions.test_index > 3)) {
        throw std::invalid_argument("test index must be 1..3");
    }
    questions_ = questions;
    stage_ = Stage::QuestionsSent;
    return *questions_;
}

Flag VerifierSession::check_hadamard(const std::array<Word, 3> &ds, const Bits3 &vs) {
    require(Stage::QuestionsSent, "check_hadamard");
    for (int v : vs) {
        if (v != 0 && v != 1) throw ProtocolError("answer bits must be 0/1");
    }
    std::array<MaybeBit, 3> b_hat, u_hat;
    for (size_t i = 0; i < 3; i++) {
        if (trapdoors_[i].family == entcf::Family::G) {
            b_hat[i] = entcf::decode_b(trapdoors_[i], ys_[i]);
        } else {
            u_hat[i] = entcf::decode_u(trapdoors_[i], ys_[i], ds[i]);
        }
    }
    flag_ = evaluate_check_table(theta_, questions_->q, questions_->test_index.value_or(0), b_hat, u_hat, vs);
    stage_ = Stage::Done;
    return flag_;
}

Verdict VerifierSession::verdict() const {
    if (stage_ != Stage::Done) throw ProtocolError("verdict requested before the session finished");
    return flag_ == Flag::None ? Verdict::Accept : Verdict::Reject;
}

}  // namespace cczst::verifier
