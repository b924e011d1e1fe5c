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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <thread>

#include <unistd.h>

#include "cczst/engine.h"
#include "oracles.h"

using namespace cczst;
using namespace cczst::engine;

namespace {

const entcf::SecurityParam kSmall(6);

ProverFactory factory(const std::string &spec) { return factory_for(provers::ProverSpec::parse(spec)); }

ProverFactory scripted(const std::string &text) {
    auto script = std::make_shared<const provers::Script>(provers::Script::parse(text));
    return [script](const entcf::Oracle &o, uint64_t seed) {
        return std::make_unique<provers::ScriptedProver>(o, script, seed);
    };
}

/// Runs `serve` against `connect` over a socketpair.
std::vector<SessionTranscript> over_wire(entcf::SecurityParam sp, const ProverFactory &prover, uint64_t master,
                                         uint64_t n, uint64_t first = 0) {
    auto [server, client] = LineChannel::pair();
    std::thread peer([&, c = std::move(client)]() mutable { connect(c, prover, master); });
    auto out = serve(sp, server, master, n, first);
    server.shutdown_write();
    peer.join();
    return out;
}

/// Runs `serve` against a hand-written peer.
template <typename Peer>
std::vector<SessionTranscript> against(Peer peer_fn, uint64_t n) {
    auto [server, client] = LineChannel::pair();
    std::thread peer([&, c = std::move(client)]() mutable { peer_fn(c); });
    auto out = serve(kSmall, server, 5, n);
    peer.join();
    return out;
}

}  // namespace

TEST_CASE("seed derivation uses the SplitMix64 finalizer") {
    // First SplitMix64 output for seed 0.
    CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0xe220a8397b1dcdafULL);
    CounterRng rng(0);
    CHECK(rng() == 0xe220a8397b1dcdafULL);
    for (uint64_t m : {0ULL, 1ULL, 123456789ULL})
        for (uint64_t i : {0ULL, 1ULL, 99ULL}) {
            uint64_t expected = mix64(mix64(m + 0x9e3779b97f4a7c15ULL) ^ (i * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
            CHECK(session_seed(m, i) == expected);
        }
    CHECK(session_seed(1, 0) != session_seed(1, 1));
    CHECK(session_seed(1, 0) != session_seed(2, 0));
}

TEST_CASE("message framing") {
    Message m{7, 3, MessageKind::Questions, {{"q", "101"}}};
    std::string line = encode(m);
    CHECK(line == R"({"kind":"QUESTIONS","payload":{"q":"101"},"seq":3,"sid":7,"v":1})");
    Message back = decode(line);
    CHECK(back.sid == 7);
    CHECK(back.seq == 3);
    CHECK(back.kind == MessageKind::Questions);
    CHECK(back.payload == m.payload);
    for (auto k : {MessageKind::Keys, MessageKind::Commit, MessageKind::Round, MessageKind::Preimages,
                   MessageKind::HadamardD, MessageKind::Questions, MessageKind::Answers, MessageKind::Verdict}) {
        CHECK(parse_message_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(decode("not json"), ProtocolError);
    CHECK_THROWS_AS(decode("[1,2]"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"KEYS","payload":{},"seq":0,"sid":0,"v":2})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"NOPE","payload":{},"seq":0,"sid":0,"v":1})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"KEYS","payload":3,"seq":0,"sid":0,"v":1})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"KEYS","payload":{},"sid":0,"v":1})"), ProtocolError);
}

TEST_CASE("outbound keys carry no trapdoor material") {
    entcf::Oracle o;
    CounterRng rng(3);
    auto s = verifier::VerifierSession::begin(o, kSmall, rng);
    Message m = keys_message(9, s.keys());
    CHECK(m.payload.size() == 2);
    CHECK(m.payload.contains("w"));
    CHECK(m.payload.contains("keys"));
    std::string line = encode(m);
    for (const char *secret : {"perm_seed", "shift", "family", "theta"}) CHECK(line.find(secret) == std::string::npos);
    for (size_t i = 0; i < 3; i++) {
        CHECK(line.find(std::to_string(s.trapdoor(i).perm_seed)) == std::string::npos);
    }
}

TEST_CASE("sessions are deterministic and honest sessions accept") {
    for (uint64_t i = 0; i < 50; i++) {
        auto a = run_session(kSmall, factory("honest"), 11, i);
        auto b = run_session(kSmall, factory("honest"), 11, i);
        CHECK(a == b);
        CHECK(to_line(a) == to_line(b));
        CHECK(a.verdict == Outcome::Accept);
        CHECK(a.flag == verifier::Flag::None);
        CHECK_FALSE(a.aborted());
        CHECK(a.seed == session_seed(11, i));
        CHECK(a.round.has_value());
        CHECK(a.test_index.has_value() == (a.round == verifier::RoundType::Hadamard && a.theta.str() == "000"));
        CHECK(a.preimages.has_value() == (a.round == verifier::RoundType::Preimage));
        CHECK(a.ds.has_value() == (a.round == verifier::RoundType::Hadamard));
    }
    CHECK(run_session(kSmall, factory("honest"), 11, 0) != run_session(kSmall, factory("honest"), 12, 0));
}

TEST_CASE("wrong preimages and protocol violations") {
    auto wrong = scripted("commit sample\npreimage 0:000000 0:000000 0:000000\n");
    int pre = 0, aborted = 0;
    for (uint64_t i = 0; i < 60; i++) {
        auto t = run_session(kSmall, wrong, 1, i);
        if (t.round == verifier::RoundType::Preimage) {
            pre++;
            if (t.flag == verifier::Flag::FailPre) CHECK(t.verdict == Outcome::Reject);
        } else {
            // No hadamard directive: the session aborts as a rejection.
            CHECK(t.aborted());
            CHECK(t.verdict == Outcome::Reject);
            CHECK(t.abort_reason.find("script exhausted") != std::string::npos);
            aborted++;
        }
    }
    CHECK(pre > 0);
    CHECK(aborted > 0);
    auto bad_width = scripted("commit 1111111111 0 0\n");
    auto t = run_session(kSmall, bad_width, 1, 0);
    CHECK(t.aborted());
    CHECK_FALSE(t.round.has_value());
}

TEST_CASE("transcripts round trip") {
    std::vector<SessionTranscript> ts;
    for (const char *spec : {"honest", "stabilizer", "noisy:bitflip:0.3"}) {
        for (uint64_t i = 0; i < 30; i++) ts.push_back(run_session(kSmall, factory(spec), 4, i));
    }
    ts.push_back(run_session(kSmall, scripted("commit sample\n"), 4, 0));
    for (const auto &t : ts) {
        CHECK(transcript_from_json(nlohmann::json::parse(to_line(t))) == t);
        CHECK(to_line(t).find('\n') == std::string::npos);
    }
    std::stringstream buf;
    write_transcripts(buf, ts);
    auto back = read_transcripts(buf);
    CHECK(back == ts);

    std::stringstream empty;
    CHECK(read_transcripts(empty).empty());

    std::stringstream bad;
    bad << to_line(ts[0]) << "\n{\"index\": oops}\n";
    try {
        read_transcripts(bad);
        FAIL("expected a parse error");
    } catch (const TranscriptParseError &e) {
        CHECK(e.line_number == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::stringstream wrong_field;
    auto j = to_json(ts[0]);
    j["theta"] = "110";
    wrong_field << j.dump() << "\n";
    CHECK_THROWS_AS(read_transcripts(wrong_field), TranscriptParseError);
}

TEST_CASE("batch runs") {
    auto empty = run_batch(kSmall, factory("honest"), 0, 1, 1, true);
    CHECK(empty.stats.sessions() == 0);
    CHECK(empty.transcripts.empty());
    CHECK(empty.stats == FlagStats{});

    auto honest = run_batch(kSmall, factory("honest"), 2000, 1, 2, true);
    CHECK(honest.stats.sessions() == 2000);
    CHECK(honest.stats.accepted() == 2000);
    CHECK(honest.stats.pre_flags() == 0);
    CHECK(honest.stats.test_flags() == 0);
    CHECK(honest.stats.hyper_flags() == 0);
    for (uint64_t i = 0; i < 2000; i++) CHECK(honest.transcripts[i].index == i);

    // Denominators equal the exact counts read off the transcripts.
    auto noisy = run_batch(kSmall, factory("noisy:bitflip:0.2"), 3000, 8, 3, true);
    uint64_t pre = 0, test = 0, hyper = 0, test_flags = 0, hyper_flags = 0;
    for (const auto &t : noisy.transcripts) {
        if (t.round == verifier::RoundType::Preimage) pre++;
        if (t.round == verifier::RoundType::Hadamard) {
            if (t.theta.is_hypergraph()) {
                hyper++;
                hyper_flags += t.flag == verifier::Flag::FailHyper;
            } else {
                test++;
                test_flags += t.flag == verifier::Flag::FailTest;
            }
        }
    }
    const auto &st = noisy.stats;
    CHECK(st.pre_denominator() == pre);
    CHECK(st.test_denominator() == test);
    CHECK(st.hyper_denominator() == hyper);
    CHECK(st.test_flags() == test_flags);
    CHECK(st.hyper_flags() == hyper_flags);
    CHECK(st.pre_flags() <= st.pre_denominator());
    CHECK(st.test_flags() > 0);
    CHECK(st.hyper_flags() > 0);
    CHECK(st.summary().find("sessions 3000") != std::string::npos);
}

TEST_CASE("statistics do not depend on parallelism") {
    auto f = factory("noisy:bitflip:0.1");
    auto a = run_batch(kSmall, f, 1500, 77, 1, true);
    for (unsigned p : {4u, 16u}) {
        auto b = run_batch(kSmall, f, 1500, 77, p, true);
        CHECK(b.stats == a.stats);
        CHECK(b.transcripts == a.transcripts);
    }
}

TEST_CASE("merge is associative and commutative") {
    auto f = factory("noisy:bitflip:0.2");
    auto batch = run_batch(kSmall, f, 900, 5, 1, true);
    FlagStats x, y, z;
    for (size_t i = 0; i < 900; i++) (i % 3 == 0 ? x : i % 3 == 1 ? y : z).add(batch.transcripts[i]);
    FlagStats xy = x, yz = y, yx = y;
    xy.merge(y).merge(z);
    yz.merge(z);
    FlagStats x_yz = x;
    x_yz.merge(yz);
    yx.merge(x);
    FlagStats xy_only = x;
    xy_only.merge(y);
    CHECK(xy == x_yz);
    CHECK(xy == batch.stats);
    CHECK(yx == xy_only);
}

TEST_CASE("aborts are tallied in their conditional") {
    FlagStats s;
    SessionTranscript t;
    t.theta = verifier::BasisChoice::parse("111");
    t.abort_reason = "boom";
    s.add(t);  // before the round draw
    CHECK(s.early_aborts() == 1);
    t.round = verifier::RoundType::Hadamard;
    s.add(t);
    CHECK(s.hyper_denominator() == 1);
    CHECK(s.hyper_flags() == 1);
    CHECK(s.accepted() == 0);
}

TEST_CASE("wire transcripts equal in-process transcripts") {
    for (uint64_t seed = 0; seed < 100; seed++) {
        auto wire = over_wire(kSmall, factory("honest"), seed, 2);
        REQUIRE(wire.size() == 2);
        for (uint64_t i = 0; i < 2; i++) {
            auto local = run_session(kSmall, factory("honest"), seed, i);
            CHECK(to_line(wire[i]) == to_line(local));
            CHECK(wire[i].verdict == Outcome::Accept);
        }
    }
    auto noisy = over_wire(kSmall, factory("noisy:depol:0.2"), 3, 40, 10);
    for (uint64_t i = 0; i < 40; i++) {
        CHECK(to_line(noisy[i]) == to_line(run_session(kSmall, factory("noisy:depol:0.2"), 3, 10 + i)));
    }
}

TEST_CASE("loopback TCP session") {
    TcpListener listener("127.0.0.1", 0);
    REQUIRE(listener.port() != 0);
    std::thread peer([port = listener.port()] {
        auto ch = tcp_connect("127.0.0.1", port);
        connect(ch, factory("honest"), 21);
    });
    auto ch = listener.accept();
    auto ts = serve(kSmall, ch, 21, 5);
    ch.shutdown_write();
    peer.join();
    for (uint64_t i = 0; i < 5; i++) {
        CHECK(ts[i].verdict == Outcome::Accept);
        CHECK(to_line(ts[i]) == to_line(run_session(kSmall, factory("honest"), 21, i)));
    }
}

TEST_CASE("malformed, truncated and lost connections abort") {
    auto garbage = against(
        [](LineChannel &c) {
            c.read_line();
            c.write_line("this is not a frame");
        },
        1);
    CHECK(garbage[0].aborted());
    CHECK(garbage[0].abort_reason.find("malformed frame") != std::string::npos);

    auto truncated = against(
        [](LineChannel &c) {
            c.read_line();
            c.shutdown_write();
        },
        1);
    CHECK(truncated[0].aborted());

    auto wrong_seq = against(
        [](LineChannel &c) {
            auto line = c.read_line();
            Message m = decode(*line);
            c.write_line(encode(Message{m.sid, 5, MessageKind::Commit, {{"ys", {"0", "0", "0"}}}}));
        },
        1);
    CHECK(wrong_seq[0].aborted());
    CHECK(wrong_seq[0].abort_reason.find("unexpected frame") != std::string::npos);

    auto bad_payload = against(
        [](LineChannel &c) {
            auto line = c.read_line();
            Message m = decode(*line);
            c.write_line(encode(Message{m.sid, 1, MessageKind::Commit, {{"ys", {"01", "0", "0"}}}}));
            c.read_line();
        },
        1);
    CHECK(bad_payload[0].aborted());
    CHECK(bad_payload[0].abort_reason.find("malformed payload") != std::string::npos);

    auto lost = against([](LineChannel &) {}, 3);
    for (const auto &t : lost) CHECK(t.aborted());
}

TEST_CASE("a partial frame at end of stream is reported") {
    auto [a, b] = LineChannel::pair();
    b.write_line("complete");
    b.shutdown_write();
    CHECK(a.read_line() == "complete");
    CHECK_FALSE(a.read_line().has_value());

    int fds[2];
    REQUIRE(::pipe(fds) == 0);
    LineChannel reader(fds[0], -1, true);
    REQUIRE(::write(fds[1], "{\"kind\"", 7) == 7);
    ::close(fds[1]);
    CHECK_THROWS_AS(reader.read_line(), ProtocolError);
}

TEST_CASE("prover side rejects a mismatched setup") {
    auto [server, client] = LineChannel::pair();
    std::thread verifier_side([s = std::move(server)]() mutable { serve(kSmall, s, 1, 1); });
    CHECK_THROWS_AS(connect(client, factory("honest"), 2), ProtocolError);
    client.shutdown_write();
    verifier_side.join();
}

TEST_CASE("endpoints") {
    CHECK(Endpoint::parse("stdio").kind == Endpoint::Kind::Stdio);
    auto e = Endpoint::parse("localhost:9000");
    CHECK(e.host == "localhost");
    CHECK(e.port == 9000);
    auto p = Endpoint::parse(":0");
    CHECK(p.host == "127.0.0.1");
    CHECK(p.port == 0);
    CHECK_THROWS(Endpoint::parse("nohost"));
    CHECK_THROWS(Endpoint::parse("h:70000"));
    CHECK_THROWS(Endpoint::parse("h:12x"));
}
