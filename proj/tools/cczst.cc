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

// cczst: command-line front end.
//
//   cczst run --sessions N --lambda L --prover SPEC --seed S [--out FILE] [--parallelism P]
//   cczst analyze FILE [--epsilon E --delta D --c C --r R --negl X] [--out CSV]
//   cczst demo magic-impossibility|stabilizer-fidelity|stabilizer-check
//   cczst samplesize --epsilon E --delta D
//   cczst serve --listen HOST:PORT|stdio --sessions N --lambda L --seed S [--out FILE]
//   cczst connect --addr HOST:PORT|stdio --prover SPEC --seed S
//
// Exit codes: 0 success / accept, 1 reject or failed demo, 2 usage or I/O error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "cczst/analysis.h"
#include "cczst/engine.h"
#include "cczst/qsim.h"

using namespace cczst;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    uint64_t sessions = 1000;
    int lambda = 16;
    std::string prover = "honest";
    uint64_t seed = 1;
    std::string out;
    unsigned parallelism = 1;
    double epsilon = 1.0 / 6.0;
    double delta = 1e-10;
    double c = 1.0;
    double r = 1.0;
    double negl = 0.0;
    std::string listen = "127.0.0.1:7878";
    std::string addr = "127.0.0.1:7878";
    std::string input;
    std::string demo;
};

provers::ProverSpec parse_prover(const std::string &text) {
    try {
        return provers::ProverSpec::parse(text);
    } catch (const std::exception &e) {
        throw UsageError(std::string("bad --prover: ") + e.what());
    }
}

entcf::SecurityParam parse_lambda(int lambda) {
    try {
        return entcf::SecurityParam(lambda);
    } catch (const std::exception &e) {
        throw UsageError(std::string("bad --lambda: ") + e.what());
    }
}

void write_output(const std::string &path, std::span<const engine::SessionTranscript> ts) {
    if (path.empty()) return;
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    engine::write_transcripts(file, ts);
}

int cmd_run(const Options &o) {
    auto spec = parse_prover(o.prover);
    auto sp = parse_lambda(o.lambda);
    auto result = engine::run_batch(sp, engine::factory_for(spec), o.sessions, o.seed, o.parallelism, !o.out.empty());
    write_output(o.out, result.transcripts);
    std::cout << "prover " << spec.str() << "  lambda " << o.lambda << "  seed " << o.seed << "\n"
              << result.stats.summary();
    return kExitOk;
}

int cmd_analyze(const Options &o) {
    std::ifstream in(o.input);
    if (!in) throw std::runtime_error("cannot open '" + o.input + "'");
    auto transcripts = engine::read_transcripts(in);
    engine::FlagStats stats;
    for (const auto &t : transcripts) stats.add(t);
    analysis::EstimationParams ep{o.epsilon, o.delta};
    analysis::SoundnessParams sp{o.c, o.r, o.negl};
    try {
        ep.validate();
        sp.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    auto report = analysis::certify(analysis::estimate_flag_rates(stats, ep), sp);
    std::cout << "sessions " << stats.sessions() << " (early aborts " << stats.early_aborts() << ")\n"
              << analysis::format_report_text(report);
    if (!o.out.empty()) {
        std::ofstream csv(o.out);
        if (!csv) throw std::runtime_error("cannot open '" + o.out + "' for writing");
        csv << analysis::format_report_csv(report);
    }
    return report.accept ? kExitOk : kExitReject;
}

int demo_magic_impossibility() {
    auto r = qsim::magic_impossibility_demo();
    std::cout << "Z basis  T|+>: " << qsim::format_distribution_text(r.t_plus_z, 1)
              << "Z basis  T^dag|+>: " << qsim::format_distribution_text(r.tdag_plus_z, 1)
              << "X basis  T|+>: " << qsim::format_distribution_text(r.t_plus_x, 1)
              << "X basis  T^dag|+>: " << qsim::format_distribution_text(r.tdag_plus_x, 1);
    std::cout << std::setprecision(12) << "fidelity(T|+>, T^dag|+>) = " << r.fidelity << "\n";
    bool ok = r.statistics_match && r.fidelity < 1.0 - qsim::kExactTol;
    std::cout << (ok ? "statistics identical, states distinct\n" : "invariant violated\n");
    return ok ? kExitOk : kExitReject;
}

int demo_stabilizer_fidelity() {
    auto states = qsim::enumerate_stabilizer_states(3);
    std::cout << "stabilizer states " << states.size() << "\n";
    bool ok = states.size() == qsim::stabilizer_state_count(3);
    std::cout << std::setprecision(12);
    for (unsigned packed = 0; packed < 8; packed++) {
        Bits3 s = unpack3(packed);
        qsim::StateVector target = qsim::target_state(s);
        double best = 0.0;
        for (const auto &psi : states) best = std::max(best, qsim::fidelity(psi, target));
        double distance = std::sqrt(1.0 - best);
        std::cout << "s=" << format3(s) << "  max F " << best << "  min trace distance " << distance << "\n";
        if (std::abs(best - analysis::kStabilizerFidelityBound) > qsim::kEnumTol || distance < 0.5 - qsim::kEnumTol) {
            ok = false;
        }
    }
    std::cout << (ok ? "max F = 0.5625 for every s\n" : "invariant violated\n");
    return ok ? kExitOk : kExitReject;
}

int demo_stabilizer_check() {
    auto obs = qsim::theorem_observables();
    bool ok = true;
    std::cout << std::setprecision(3) << std::scientific;
    for (unsigned packed = 0; packed < 8; packed++) {
        Bits3 s = unpack3(packed);
        qsim::StateVector target = qsim::target_state(s);
        qsim::Matrix product = obs[2].projector(s[0]) * obs[1].projector(s[1]) * obs[0].projector(s[2]);
        double proj_err = (product - target.projector()).cwiseAbs().maxCoeff();
        double stab_err = 0.0;
        for (const auto &g : qsim::generalized_stabilizers(s)) {
            stab_err = std::max(stab_err, std::abs(g.expectation(target) - 1.0));
        }
        std::cout << "s=" << format3(s) << "  projector identity err " << proj_err << "  stabilizer err "
                  << stab_err << "\n";
        if (proj_err > qsim::kExactTol || stab_err > qsim::kExactTol) ok = false;
    }
    std::cout << (ok ? "identities hold for all 8 s\n" : "invariant violated\n");
    return ok ? kExitOk : kExitReject;
}

int cmd_demo(const Options &o) {
    if (o.demo == "magic-impossibility") return demo_magic_impossibility();
    if (o.demo == "stabilizer-fidelity") return demo_stabilizer_fidelity();
    if (o.demo == "stabilizer-check") return demo_stabilizer_check();
    throw UsageError("unknown demo '" + o.demo + "'");
}

int cmd_samplesize(const Options &o) {
    analysis::EstimationParams ep{o.epsilon, o.delta};
    try {
        ep.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    std::cout << analysis::sample_size(ep) << "\n";
    return kExitOk;
}

engine::Endpoint parse_endpoint(const std::string &text, const char *flag) {
    try {
        return engine::Endpoint::parse(text);
    } catch (const std::exception &e) {
        throw UsageError(std::string("bad ") + flag + ": " + e.what());
    }
}

int cmd_serve(const Options &o) {
    auto sp = parse_lambda(o.lambda);
    auto ep = parse_endpoint(o.listen, "--listen");
    std::vector<engine::SessionTranscript> ts;
    if (ep.kind == engine::Endpoint::Kind::Stdio) {
        auto ch = engine::LineChannel::stdio();
        ts = engine::serve(sp, ch, o.seed, o.sessions);
    } else {
        engine::TcpListener listener(ep.host, ep.port);
        std::cerr << "listening on " << ep.host << ":" << listener.port() << std::endl;
        auto ch = listener.accept();
        ts = engine::serve(sp, ch, o.seed, o.sessions);
        ch.shutdown_write();
    }
    write_output(o.out, ts);
    engine::FlagStats stats;
    for (const auto &t : ts) stats.add(t);
    (ep.kind == engine::Endpoint::Kind::Stdio ? std::cerr : std::cout) << stats.summary();
    return stats.accepted() == stats.sessions() ? kExitOk : kExitReject;
}

engine::LineChannel connect_with_retry(const engine::Endpoint &ep) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    for (;;) {
        try {
            return engine::tcp_connect(ep.host, ep.port);
        } catch (const std::exception &) {
            if (std::chrono::steady_clock::now() > deadline) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
}

int cmd_connect(const Options &o) {
    auto spec = parse_prover(o.prover);
    auto ep = parse_endpoint(o.addr, "--addr");
    uint64_t done = 0;
    if (ep.kind == engine::Endpoint::Kind::Stdio) {
        auto ch = engine::LineChannel::stdio();
        done = engine::connect(ch, engine::factory_for(spec), o.seed);
    } else {
        auto ch = connect_with_retry(ep);
        done = engine::connect(ch, engine::factory_for(spec), o.seed);
    }
    std::cerr << "sessions completed " << done << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulator for classical self-testing of the CCZ magic state"};
    app.require_subcommand(1);
    Options o;

    auto *run = app.add_subcommand("run", "Run a batch of protocol sessions in-process");
    run->add_option("--sessions", o.sessions, "Number of sessions")->capture_default_str();
    run->add_option("--lambda", o.lambda, "Security parameter (input width)")->capture_default_str();
    run->add_option("--prover", o.prover, "honest | stabilizer | noisy:bitflip:E | noisy:depol:E | scripted:PATH")
        ->capture_default_str();
    run->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    run->add_option("--out", o.out, "Transcript file (one JSON record per line)");
    run->add_option("--parallelism", o.parallelism, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));

    auto *analyze = app.add_subcommand("analyze", "Certify from a transcript file");
    analyze->add_option("input", o.input, "Transcript file")->required();
    analyze->add_option("--epsilon", o.epsilon, "Estimation precision")->capture_default_str();
    analyze->add_option("--delta", o.delta, "Estimation failure probability")->capture_default_str();
    analyze->add_option("--c", o.c, "Soundness constant c")->capture_default_str();
    analyze->add_option("--r", o.r, "Soundness exponent r")->capture_default_str();
    analyze->add_option("--negl", o.negl, "Negligible-term surrogate")->capture_default_str();
    analyze->add_option("--out", o.out, "CSV report file");

    auto *demo = app.add_subcommand("demo", "Run a state-level demonstration");
    demo->add_option("name", o.demo, "magic-impossibility | stabilizer-fidelity | stabilizer-check")
        ->required()
        ->check(CLI::IsMember({"magic-impossibility", "stabilizer-fidelity", "stabilizer-check"}));

    auto *samplesize = app.add_subcommand("samplesize", "Hoeffding sample size for (epsilon, delta)");
    samplesize->add_option("--epsilon", o.epsilon, "Estimation precision")->required();
    samplesize->add_option("--delta", o.delta, "Estimation failure probability")->required();

    auto *serve = app.add_subcommand("serve", "Host verifier sessions over TCP or stdio");
    serve->add_option("--listen", o.listen, "host:port or stdio")->capture_default_str();
    serve->add_option("--sessions", o.sessions, "Number of sessions")->capture_default_str();
    serve->add_option("--lambda", o.lambda, "Security parameter")->capture_default_str();
    serve->add_option("--seed", o.seed, "Master seed shared with the prover")->capture_default_str();
    serve->add_option("--out", o.out, "Transcript file");

    auto *connect = app.add_subcommand("connect", "Answer verifier sessions as a prover");
    connect->add_option("--addr", o.addr, "host:port or stdio")->capture_default_str();
    connect->add_option("--prover", o.prover, "Prover spec")->capture_default_str();
    connect->add_option("--seed", o.seed, "Master seed shared with the verifier")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*run) return cmd_run(o);
        if (*analyze) return cmd_analyze(o);
        if (*demo) return cmd_demo(o);
        if (*samplesize) return cmd_samplesize(o);
        if (*serve) return cmd_serve(o);
        if (*connect) return cmd_connect(o);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
