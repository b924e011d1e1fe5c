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

#include "cczst/analysis.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cczst::analysis {

namespace {

bool in_open_unit(double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

RateEstimate make_estimate(uint64_t flags, uint64_t denominator, double delta_prime, const char *name) {
    if (denominator == 0) {
        throw UndefinedEstimateError(std::string("no sessions in the ") + name + " conditional");
    }
    RateEstimate e;
    e.flags = flags;
    e.denominator = denominator;
    e.p = static_cast<double>(flags) / static_cast<double>(denominator);
    e.radius = std::sqrt(std::log(2.0 / delta_prime) / (2.0 * static_cast<double>(denominator)));
    return e;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

}  // namespace

void EstimationParams::validate() const {
    if (!in_open_unit(eps_prime)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (!in_open_unit(delta_prime)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void SoundnessParams::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be positive");
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("r must be positive");
    if (!(negl >= 0.0) || !std::isfinite(negl)) throw std::invalid_argument("negl must be nonnegative");
}

uint64_t sample_size(const EstimationParams &params) {
    params.validate();
    double n = std::log(2.0 / params.delta_prime) / (2.0 * params.eps_prime * params.eps_prime);
    return static_cast<uint64_t>(std::ceil(n));
}

FlagRateEstimates estimate_flag_rates(const engine::FlagStats &stats, const EstimationParams &params) {
    params.validate();
    FlagRateEstimates out;
    out.pre = make_estimate(stats.pre_flags(), stats.pre_denominator(), params.delta_prime, "preimage-round");
    out.test = make_estimate(stats.test_flags(), stats.test_denominator(), params.delta_prime, "test-case");
    out.hyper = make_estimate(stats.hyper_flags(), stats.hyper_denominator(), params.delta_prime, "hypergraph-case");
    return out;
}

GammaBounds gamma_bounds(double p_pre, double p_test, double p_hyper) {
    return GammaBounds{clamp01(15.0 * p_pre), clamp01(96.0 * p_test), clamp01(8.0 * p_hyper)};
}

double t_est(double p_pre, double p_test, double p_hyper, const SoundnessParams &sp) {
    sp.validate();
    double h = sp.r / 2.0;
    return sp.c * (std::pow(p_pre, h) + std::pow(p_test, h) + std::pow(p_hyper, h)) + sp.negl;
}

double deviation_upper(double r, double eps) {
    double h = r / 2.0;
    if (h < 1.0) return std::pow(eps, h);
    if (is_integer(h)) return (std::sqrt(std::pow(2.0, r)) - 1.0) * eps;
    double x = h - std::floor(h);
    return (2.0 * std::sqrt(std::pow(2.0, r)) - 1.0) * std::pow(eps, x);
}

double deviation_lower(double r, double eps) {
    double h = r / 2.0;
    if (h < 1.0) return std::pow(eps, h);
    if (is_integer(h)) return (std::sqrt(std::pow(2.0, r)) - 1.0) * eps;
    double x = h - std::floor(h);
    return std::sqrt(std::pow(2.0, r)) * std::pow(eps, x);
}

double deviation_small(double r, double eps) { return std::sqrt(std::pow(eps, r)); }

double deviation_term(double r, double eps) {
    return std::max({deviation_upper(r, eps), deviation_lower(r, eps), deviation_small(r, eps)});
}

CertificationReport certify(const FlagRateEstimates &estimates, const SoundnessParams &sp) {
    sp.validate();
    CertificationReport rep;
    rep.estimates = estimates;
    rep.params = sp;
    rep.gamma = gamma_bounds(estimates.pre.p, estimates.test.p, estimates.hyper.p);
    rep.t_est = t_est(estimates.pre.p, estimates.test.p, estimates.hyper.p, sp);
    rep.deviation = sp.c * (deviation_term(sp.r, estimates.pre.radius) + deviation_term(sp.r, estimates.test.radius) +
                            deviation_term(sp.r, estimates.hyper.radius));
    rep.accept = rep.t_est < kThreshold;
    return rep;
}

std::string format_report_text(const CertificationReport &rep) {
    std::ostringstream out;
    out << std::setprecision(6);
    auto line = [&](const char *name, const RateEstimate &e) {
        out << "  " << std::left << std::setw(6) << name << " p'=" << e.p << "  (" << e.flags << "/" << e.denominator
            << ")  radius=" << e.radius << "\n";
    };
    out << "flag-rate estimates\n";
    line("Pre", rep.estimates.pre);
    line("Test", rep.estimates.test);
    line("Hyper", rep.estimates.hyper);
    out << "parameters  c=" << rep.params.c << " r=" << rep.params.r << " negl=" << rep.params.negl << "\n";
    out << "gamma bounds  P<=" << rep.gamma.pre << " T<=" << rep.gamma.test << " H<=" << rep.gamma.hyper << "\n";
    out << "T_est " << rep.t_est << "  (deviation bound +/- " << rep.deviation << ")\n";
    out << "threshold " << rep.threshold << " (strict)\n";
    out << "decision " << (rep.accept ? "accept" : "reject") << "\n";
    return out.str();
}

std::string format_report_csv(const CertificationReport &rep) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "field,value\n";
    auto rate = [&](const char *name, const RateEstimate &e) {
        out << "p_" << name << "," << e.p << "\n";
        out << "radius_" << name << "," << e.radius << "\n";
        out << "flags_" << name << "," << e.flags << "\n";
        out << "denominator_" << name << "," << e.denominator << "\n";
    };
    rate("pre", rep.estimates.pre);
    rate("test", rep.estimates.test);
    rate("hyper", rep.estimates.hyper);
    out << "c," << rep.params.c << "\nr," << rep.params.r << "\nnegl," << rep.params.negl << "\n";
    out << "gamma_pre," << rep.gamma.pre << "\ngamma_test," << rep.gamma.test << "\ngamma_hyper," << rep.gamma.hyper
        << "\n";
    out << "t_est," << rep.t_est << "\ndeviation," << rep.deviation << "\nthreshold," << rep.threshold << "\n";
    out << "decision," << (rep.accept ? "accept" : "reject") << "\n";
    return out.str();
}

std::string FidelityCertificate::verdict() const {
    return certified ? "nonzero magic certified" : "not certified";
}

FidelityCertificate fidelity_certificate(const qsim::StateVector &device, const Bits3 &s) {
    qsim::StateVector target = qsim::target_state(s);
    FidelityCertificate c;
    c.fidelity = qsim::fidelity(device, target);
    c.trace_distance = qsim::trace_distance(device, target);
    c.certified = c.fidelity > kStabilizerFidelityBound + kCertificateTol;
    return c;
}

FidelityCertificate fidelity_certificate(const qsim::DensityState &device, const Bits3 &s) {
    qsim::StateVector target = qsim::target_state(s);
    FidelityCertificate c;
    c.fidelity = qsim::fidelity(device, target);
    c.trace_distance = qsim::trace_distance(device, target);
    c.certified = c.fidelity > kStabilizerFidelityBound + kCertificateTol;
    return c;
}

}  // namespace cczst::analysis
