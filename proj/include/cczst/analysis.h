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

// Certification from flag statistics: Hoeffding estimates, γ bounds, T_est
// and the 1/3 threshold. Also white-box fidelity certificates for simulated
// devices.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cczst/bits.h"
#include "cczst/engine.h"
#include "cczst/qsim.h"

namespace cczst::analysis {

constexpr double kThreshold = 1.0 / 3.0;
constexpr double kStabilizerFidelityBound = 9.0 / 16.0;
constexpr double kCertificateTol = 1e-9;

struct UndefinedEstimateError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EstimationParams {
    double eps_prime = 1.0 / 6.0;
    double delta_prime = 1e-10;

    /// Throws std::invalid_argument unless both lie in (0, 1).
    void validate() const;
};

struct SoundnessParams {
    double c = 1.0;
    double r = 1.0;
    double negl = 0.0;

    void validate() const;
};

/// N = ⌈ln(2/δ′) / (2ε′²)⌉.
uint64_t sample_size(const EstimationParams &params);

struct RateEstimate {
    uint64_t flags = 0;
    uint64_t denominator = 0;
    double p = 0.0;
    double radius = 0.0;  // √(ln(2/δ′) / (2·denominator))
};

struct FlagRateEstimates {
    RateEstimate pre, test, hyper;
};

/// Throws UndefinedEstimateError when a conditional has no sessions.
FlagRateEstimates estimate_flag_rates(const engine::FlagStats &stats, const EstimationParams &params);

struct GammaBounds {
    double pre = 0.0, test = 0.0, hyper = 0.0;
};

/// (15·p_Pre, 96·p_Test, 8·p_Hyper), each clamped to [0, 1].
GammaBounds gamma_bounds(double p_pre, double p_test, double p_hyper);

/// c·(p_Pre^{r/2} + p_Test^{r/2} + p_Hyper^{r/2}) + negl.
double t_est(double p_pre, double p_test, double p_hyper, const SoundnessParams &sp);

/// Piecewise bounds on |√p^r − √p′^r| given |p − p′| ≤ eps.
double deviation_upper(double r, double eps);  // p′ ≥ p
double deviation_lower(double r, double eps);  // p′ < p, p ≥ eps
double deviation_small(double r, double eps);  // p′ < p < eps
/// Largest of the three.
double deviation_term(double r, double eps);

struct CertificationReport {
    FlagRateEstimates estimates;
    SoundnessParams params;
    GammaBounds gamma;
    double t_est = 0.0;
    double deviation = 0.0;  // c·Σ deviation_term(r, radius_a)
    double threshold = kThreshold;
    bool accept = false;
};

/// accept iff t_est < 1/3.
CertificationReport certify(const FlagRateEstimates &estimates, const SoundnessParams &sp);

std::string format_report_text(const CertificationReport &report);
std::string format_report_csv(const CertificationReport &report);

struct FidelityCertificate {
    double fidelity = 0.0;
    double trace_distance = 0.0;  // normalized, ½‖ρ − φ‖₁
    bool certified = false;

    std::string verdict() const;
};

/// Fidelity with φ_H^{(s)}; certified iff F > 9/16 + 1e-9.
FidelityCertificate fidelity_certificate(const qsim::StateVector &device, const Bits3 &s);
FidelityCertificate fidelity_certificate(const qsim::DensityState &device, const Bits3 &s);

}  // namespace cczst::analysis
