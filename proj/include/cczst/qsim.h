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

// Dense statevector / density-matrix core for up to four qubits.
//
// Qubit i (0-based) is the i-th tensor factor from the left, i.e. bit
// (n-1-i) of a basis-state index. Measurement-basis patterns q and outcome
// patterns v use the same packing, so "q=100" asks for an X measurement of
// qubit 0.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cczst/bits.h"
#include "cczst/rng.h"

namespace cczst::qsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr int kMaxQubits = 4;
constexpr double kExactTol = 1e-12;
constexpr double kEnumTol = 1e-9;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class StateVector {
   public:
    /// Validates qubit count and normalization (1e-12).
    StateVector(int num_qubits, Vector amplitudes);

    static StateVector basis(int num_qubits, unsigned index);
    static StateVector plus(int num_qubits);

    int num_qubits() const { return n_; }
    Eigen::Index dim() const { return amps_.size(); }
    const Vector &amplitudes() const { return amps_; }
    Complex operator[](Eigen::Index i) const { return amps_[i]; }

    /// Same state with the first non-negligible amplitude made real-positive.
    StateVector canonical() const;

    /// Equality up to global phase, within tol on every amplitude.
    bool same_ray(const StateVector &other, double tol = kExactTol) const;

    Matrix projector() const { return amps_ * amps_.adjoint(); }

   private:
    int n_;
    Vector amps_;
};

class DensityState {
   public:
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and PSD (1e-10).
    DensityState(int num_qubits, Matrix rho);

    static DensityState from_pure(const StateVector &psi);
    static DensityState maximally_mixed(int num_qubits);

    int num_qubits() const { return n_; }
    const Matrix &matrix() const { return rho_; }

   private:
    int n_;
    Matrix rho_;
};

class Observable {
   public:
    /// Validates Hermiticity within 1e-12.
    Observable(int num_qubits, Matrix m);

    int num_qubits() const { return n_; }
    const Matrix &matrix() const { return m_; }

    /// O^3 == O, i.e. spectrum in {-1, 0, +1}.
    bool is_binary(double tol = kExactTol) const;

    /// Eigen-projector (I + (-1)^b O) / 2 of a binary observable.
    Matrix projector(int b) const;

    double expectation(const StateVector &psi) const;

   private:
    int n_;
    Matrix m_;
};

enum class GateKind { CCZ, CZ, Z, X, H, S, Sdag, T, Tdag };

struct Gate {
    GateKind kind;
    std::array<int, 3> qubits{};

    static Gate ccz(int a = 0, int b = 1, int c = 2) { return {GateKind::CCZ, {a, b, c}}; }
    static Gate cz(int a, int b) { return {GateKind::CZ, {a, b, 0}}; }
    static Gate z(int q) { return {GateKind::Z, {q, 0, 0}}; }
    static Gate x(int q) { return {GateKind::X, {q, 0, 0}}; }
    static Gate h(int q) { return {GateKind::H, {q, 0, 0}}; }
    static Gate s(int q) { return {GateKind::S, {q, 0, 0}}; }
    static Gate sdag(int q) { return {GateKind::Sdag, {q, 0, 0}}; }
    static Gate t(int q) { return {GateKind::T, {q, 0, 0}}; }
    static Gate tdag(int q) { return {GateKind::Tdag, {q, 0, 0}}; }

    int arity() const;
};

/// Full 2^n x 2^n unitary of a gate. Throws std::out_of_range on bad indices.
Matrix gate_matrix(int num_qubits, const Gate &g);

StateVector apply_gate(const StateVector &psi, const Gate &g);
DensityState apply_gate(const DensityState &rho, const Gate &g);

/// Replaces `qubit` by the maximally mixed state with probability eps.
DensityState depolarize(const DensityState &rho, int qubit, double eps);

/// A Z-basis (|0>,|1>) or X-basis (|+>,|->) single-qubit state.
struct PauliEigenstate {
    bool x_basis = false;
    int bit = 0;
};

StateVector product_state(std::span<const PauliEigenstate> qubits);

/// (Z^s1 ⊗ Z^s2 ⊗ Z^s3) CCZ |+++>.
StateVector target_state(const Bits3 &s);

/// Exact outcome table: entry v is the probability of reading v after
/// rotating every qubit with q bit set by H.
std::vector<double> outcome_distribution(const StateVector &psi, unsigned q);
std::vector<double> outcome_distribution(const DensityState &rho, unsigned q);

/// Inverse-CDF sample from a probability table using one uniform draw.
unsigned sample_outcome(std::span<const double> distribution, CounterRng &rng);

unsigned measure_pauli(const StateVector &psi, unsigned q, CounterRng &rng);

/// Z^s (X_i CZ_jk) Z^s for i = 0, 1, 2.
std::array<Observable, 3> generalized_stabilizers(const Bits3 &s);

/// O1 = CZ_12 X_3, O2 = CZ_13 X_2, O3 = X_1 CZ_23 (1-based qubits).
/// O3^(s1) O2^(s2) O1^(s3) projects onto target_state(s).
std::array<Observable, 3> theorem_observables();

/// |<a|b>|^2, or <b|rho|b> for a density argument.
double fidelity(const StateVector &a, const StateVector &b);
double fidelity(const DensityState &a, const StateVector &b);

/// Sum of singular values (unnormalized trace norm).
double trace_norm(const Matrix &m);

/// Normalized distance ½||a - b||₁.
double trace_distance(const StateVector &a, const StateVector &b);
double trace_distance(const DensityState &a, const StateVector &b);
double trace_distance(const DensityState &a, const DensityState &b);

/// 2^n Π_{k=1..n} (2^k + 1).
uint64_t stabilizer_state_count(int num_qubits);

/// All pure stabilizer states on n <= 3 qubits in canonical phase, found by
/// closing {|0..0>} under H_i, S_i and CZ_ij. Throws DimensionError for n > 3.
std::vector<StateVector> enumerate_stabilizer_states(int num_qubits);

struct ImpossibilityReport {
    std::vector<double> t_plus_z, t_plus_x;
    std::vector<double> tdag_plus_z, tdag_plus_x;
    double fidelity = 0;
    bool statistics_match = false;
};

/// T|+> and T†|+> give identical single-qubit Z and X statistics.
ImpossibilityReport magic_impossibility_demo();

/// "outcome probability" rows, probabilities with 12 decimals.
std::string format_distribution_text(std::span<const double> distribution, int num_qubits);
std::string format_distribution_csv(std::span<const double> distribution, int num_qubits);

}  // namespace cczst::qsim
