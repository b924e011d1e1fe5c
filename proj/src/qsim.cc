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

#include "cczst/qsim.h"

#include <cmath>
#include <deque>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace cczst::qsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_qubits(int n) {
    if (n < 1 || n > kMaxQubits) {
        throw DimensionError("qubit count " + std::to_string(n) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
}

unsigned mask_of(int n, int qubit) { return 1u << (n - 1 - qubit); }

void apply_inplace(Vector &v, int n, const Gate &g) {
    const int k = g.arity();
    for (int a = 0; a < k; a++) {
        if (g.qubits[a] < 0 || g.qubits[a] >= n) {
            throw std::out_of_range("gate qubit index " + std::to_string(g.qubits[a]) + " out of range for " +
                                    std::to_string(n) + " qubits");
        }
        for (int b = 0; b < a; b++) {
            if (g.qubits[a] == g.qubits[b]) throw std::out_of_range("gate acts twice on one qubit");
        }
    }
    const auto dim = static_cast<unsigned>(v.size());
    const unsigned m0 = mask_of(n, g.qubits[0]);
    auto phase_where = [&](unsigned mask, Complex phase) {
        for (unsigned i = 0; i < dim; i++) {
            if ((i & mask) == mask) v[i] *= phase;
        }
    };
    switch (g.kind) {
        case GateKind::CCZ:
            phase_where(m0 | mask_of(n, g.qubits[1]) | mask_of(n, g.qubits[2]), -1.0);
            break;
        case GateKind::CZ:
            phase_where(m0 | mask_of(n, g.qubits[1]), -1.0);
            break;
        case GateKind::Z:
            phase_where(m0, -1.0);
            break;
        case GateKind::S:
            phase_where(m0, Complex(0, 1));
            break;
        case GateKind::Sdag:
            phase_where(m0, Complex(0, -1));
            break;
        case GateKind::T:
            phase_where(m0, Complex(kInvSqrt2, kInvSqrt2));
            break;
        case GateKind::Tdag:
            phase_where(m0, Complex(kInvSqrt2, -kInvSqrt2));
            break;
        case GateKind::X:
            for (unsigned i = 0; i < dim; i++) {
                if (!(i & m0)) std::swap(v[i], v[i | m0]);
            }
            break;
        case GateKind::H:
            for (unsigned i = 0; i < dim; i++) {
                if (!(i & m0)) {
                    Complex a = v[i], b = v[i | m0];
                    v[i] = (a + b) * kInvSqrt2;
                    v[i | m0] = (a - b) * kInvSqrt2;
                }
            }
            break;
    }
}

void rotate_to_basis(Vector &v, int n, unsigned q) {
    for (int i = 0; i < n; i++) {
        if (q & mask_of(n, i)) apply_inplace(v, n, Gate::h(i));
    }
}

Matrix rotation_matrix(int n, unsigned q) {
    Matrix u = Matrix::Identity(1 << n, 1 << n);
    for (int i = 0; i < n; i++) {
        if (q & mask_of(n, i)) u = gate_matrix(n, Gate::h(i)) * u;
    }
    return u;
}

bool hermitian(const Matrix &m, double tol) { return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol; }

}  // namespace

// ---------------------------------------------------------------------------

StateVector::StateVector(int num_qubits, Vector amplitudes) : n_(num_qubits), amps_(std::move(amplitudes)) {
    check_qubits(n_);
    if (amps_.size() != (Eigen::Index{1} << n_)) {
        throw DimensionError("state vector has " + std::to_string(amps_.size()) + " amplitudes for " +
                             std::to_string(n_) + " qubits");
    }
    if (std::abs(amps_.squaredNorm() - 1.0) > kExactTol) {
        throw std::invalid_argument("state vector is not normalized");
    }
}

StateVector StateVector::basis(int num_qubits, unsigned index) {
    check_qubits(num_qubits);
    Vector v = Vector::Zero(Eigen::Index{1} << num_qubits);
    if (index >= static_cast<unsigned>(v.size())) throw std::out_of_range("basis index out of range");
    v[index] = 1.0;
    return StateVector(num_qubits, std::move(v));
}

StateVector StateVector::plus(int num_qubits) {
    check_qubits(num_qubits);
    const auto dim = Eigen::Index{1} << num_qubits;
    return StateVector(num_qubits, Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
}

StateVector StateVector::canonical() const {
    for (Eigen::Index i = 0; i < amps_.size(); i++) {
        double mag = std::abs(amps_[i]);
        if (mag > kEnumTol) {
            Complex phase = std::conj(amps_[i]) / mag;
            Vector v = amps_ * phase;
            v[i] = mag;
            return StateVector(n_, std::move(v));
        }
    }
    return *this;
}

bool StateVector::same_ray(const StateVector &other, double tol) const {
    if (n_ != other.n_) return false;
    return (canonical().amps_ - other.canonical().amps_).cwiseAbs().maxCoeff() <= tol;
}

DensityState::DensityState(int num_qubits, Matrix rho) : n_(num_qubits), rho_(std::move(rho)) {
    check_qubits(n_);
    const auto dim = Eigen::Index{1} << n_;
    if (rho_.rows() != dim || rho_.cols() != dim) throw DimensionError("density matrix has wrong shape");
    if (!hermitian(rho_, kExactTol)) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - Complex(1.0)) > kExactTol) throw std::invalid_argument("density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("density matrix is not PSD");
}

DensityState DensityState::from_pure(const StateVector &psi) { return DensityState(psi.num_qubits(), psi.projector()); }

DensityState DensityState::maximally_mixed(int num_qubits) {
    check_qubits(num_qubits);
    const auto dim = Eigen::Index{1} << num_qubits;
    return DensityState(num_qubits, Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

Observable::Observable(int num_qubits, Matrix m) : n_(num_qubits), m_(std::move(m)) {
    check_qubits(n_);
    const auto dim = Eigen::Index{1} << n_;
    if (m_.rows() != dim || m_.cols() != dim) throw DimensionError("observable has wrong shape");
    if (!hermitian(m_, kExactTol)) throw std::invalid_argument("observable is not Hermitian");
}

bool Observable::is_binary(double tol) const { return (m_ * m_ * m_ - m_).cwiseAbs().maxCoeff() <= tol; }

Matrix Observable::projector(int b) const {
    const auto dim = m_.rows();
    return (Matrix::Identity(dim, dim) + (b ? -1.0 : 1.0) * m_) / 2.0;
}

double Observable::expectation(const StateVector &psi) const {
    if (psi.num_qubits() != n_) throw DimensionError("observable/state qubit count mismatch");
    return psi.amplitudes().dot(m_ * psi.amplitudes()).real();
}

int Gate::arity() const {
    switch (kind) {
        case GateKind::CCZ:
            return 3;
        case GateKind::CZ:
            return 2;
        default:
            return 1;
    }
}

Matrix gate_matrix(int num_qubits, const Gate &g) {
    check_qubits(num_qubits);
    const auto dim = Eigen::Index{1} << num_qubits;
    Matrix u(dim, dim);
    for (Eigen::Index c = 0; c < dim; c++) {
        Vector col = Vector::Zero(dim);
        col[c] = 1.0;
        apply_inplace(col, num_qubits, g);
        u.col(c) = col;
    }
    return u;
}

StateVector apply_gate(const StateVector &psi, const Gate &g) {
    Vector v = psi.amplitudes();
    apply_inplace(v, psi.num_qubits(), g);
    return StateVector(psi.num_qubits(), std::move(v));
}

DensityState apply_gate(const DensityState &rho, const Gate &g) {
    Matrix u = gate_matrix(rho.num_qubits(), g);
    return DensityState(rho.num_qubits(), u * rho.matrix() * u.adjoint());
}

DensityState depolarize(const DensityState &rho, int qubit, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("depolarizing probability outside [0, 1]");
    const int n = rho.num_qubits();
    Matrix x = gate_matrix(n, Gate::x(qubit));
    Matrix z = gate_matrix(n, Gate::z(qubit));
    Matrix y = x * z;  // Y up to a global phase, which cancels in Y rho Y†.
    const Matrix &r = rho.matrix();
    Matrix twirl = (r + x * r * x.adjoint() + y * r * y.adjoint() + z * r * z.adjoint()) / 4.0;
    Matrix out = (1.0 - eps) * r + eps * twirl;
    out = (out + out.adjoint()) / 2.0;
    return DensityState(n, std::move(out));
}

StateVector product_state(std::span<const PauliEigenstate> qubits) {
    const int n = static_cast<int>(qubits.size());
    check_qubits(n);
    Vector v = Vector::Ones(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < v.size(); i++) {
        for (int k = 0; k < n; k++) {
            const auto &q = qubits[static_cast<size_t>(k)];
            int bit = (static_cast<unsigned>(i) & mask_of(n, k)) ? 1 : 0;
            if (q.x_basis) {
                v[i] *= (q.bit && bit) ? -kInvSqrt2 : kInvSqrt2;
            } else if (bit != q.bit) {
                v[i] = 0.0;
            }
        }
    }
    return StateVector(n, std::move(v));
}

StateVector target_state(const Bits3 &s) {
    StateVector psi = apply_gate(StateVector::plus(3), Gate::ccz());
    for (int i = 0; i < 3; i++) {
        if (s[static_cast<size_t>(i)]) psi = apply_gate(psi, Gate::z(i));
    }
    return psi;
}

std::vector<double> outcome_distribution(const StateVector &psi, unsigned q) {
    Vector v = psi.amplitudes();
    rotate_to_basis(v, psi.num_qubits(), q);
    std::vector<double> p(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); i++) p[static_cast<size_t>(i)] = std::norm(v[i]);
    return p;
}

std::vector<double> outcome_distribution(const DensityState &rho, unsigned q) {
    Matrix u = rotation_matrix(rho.num_qubits(), q);
    Matrix r = u * rho.matrix() * u.adjoint();
    std::vector<double> p(static_cast<size_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); i++) p[static_cast<size_t>(i)] = std::max(0.0, r(i, i).real());
    return p;
}

unsigned sample_outcome(std::span<const double> distribution, CounterRng &rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    unsigned last = 0;
    for (size_t i = 0; i < distribution.size(); i++) {
        if (distribution[i] <= 0.0) continue;
        acc += distribution[i];
        last = static_cast<unsigned>(i);
        if (u < acc) return last;
    }
    return last;
}

unsigned measure_pauli(const StateVector &psi, unsigned q, CounterRng &rng) {
    auto p = outcome_distribution(psi, q);
    return sample_outcome(p, rng);
}

std::array<Observable, 3> generalized_stabilizers(const Bits3 &s) {
    Matrix w = Matrix::Identity(8, 8);
    for (int i = 0; i < 3; i++) {
        if (s[static_cast<size_t>(i)]) w = gate_matrix(3, Gate::z(i)) * w;
    }
    auto make = [&](int target, int a, int b) {
        Matrix m = gate_matrix(3, Gate::x(target)) * gate_matrix(3, Gate::cz(a, b));
        return Observable(3, w * m * w.adjoint());
    };
    return {make(0, 1, 2), make(1, 0, 2), make(2, 0, 1)};
}

std::array<Observable, 3> theorem_observables() {
    auto make = [](int target, int a, int b) {
        return Observable(3, gate_matrix(3, Gate::cz(a, b)) * gate_matrix(3, Gate::x(target)));
    };
    return {make(2, 0, 1), make(1, 0, 2), make(0, 1, 2)};
}

double fidelity(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionError("fidelity: qubit count mismatch");
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const DensityState &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionError("fidelity: qubit count mismatch");
    return b.amplitudes().dot(a.matrix() * b.amplitudes()).real();
}

double trace_norm(const Matrix &m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

double trace_distance(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionError("trace_distance: qubit count mismatch");
    return 0.5 * trace_norm(a.projector() - b.projector());
}

double trace_distance(const DensityState &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionError("trace_distance: qubit count mismatch");
    return 0.5 * trace_norm(a.matrix() - b.projector());
}

double trace_distance(const DensityState &a, const DensityState &b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionError("trace_distance: qubit count mismatch");
    return 0.5 * trace_norm(a.matrix() - b.matrix());
}

uint64_t stabilizer_state_count(int num_qubits) {
    uint64_t count = uint64_t{1} << num_qubits;
    for (int k = 1; k <= num_qubits; k++) count *= (uint64_t{1} << k) + 1;
    return count;
}

std::vector<StateVector> enumerate_stabilizer_states(int num_qubits) {
    if (num_qubits < 1 || num_qubits > 3) {
        throw DimensionError("stabilizer enumeration supports 1..3 qubits, got " + std::to_string(num_qubits));
    }
    std::vector<Gate> generators;
    for (int i = 0; i < num_qubits; i++) {
        generators.push_back(Gate::h(i));
        generators.push_back(Gate::s(i));
        for (int j = 0; j < i; j++) generators.push_back(Gate::cz(j, i));
    }
    // Amplitudes lie on a coarse grid, so rounding to 1e-9 is an exact key.
    auto key_of = [](const StateVector &psi) {
        std::vector<long long> key;
        key.reserve(static_cast<size_t>(2 * psi.dim()));
        for (Eigen::Index i = 0; i < psi.dim(); i++) {
            key.push_back(std::llround(psi[i].real() * 1e9));
            key.push_back(std::llround(psi[i].imag() * 1e9));
        }
        return key;
    };

    std::vector<StateVector> states;
    std::map<std::vector<long long>, size_t> seen;
    std::deque<size_t> frontier;
    StateVector start = StateVector::basis(num_qubits, 0);
    seen.emplace(key_of(start), 0);
    states.push_back(start);
    frontier.push_back(0);
    while (!frontier.empty()) {
        size_t idx = frontier.front();
        frontier.pop_front();
        for (const Gate &g : generators) {
            StateVector next = apply_gate(states[idx], g).canonical();
            auto [it, inserted] = seen.emplace(key_of(next), states.size());
            if (inserted) {
                states.push_back(std::move(next));
                frontier.push_back(states.size() - 1);
            }
        }
    }
    return states;
}

ImpossibilityReport magic_impossibility_demo() {
    StateVector plus = StateVector::plus(1);
    StateVector tp = apply_gate(plus, Gate::t(0));
    StateVector tdp = apply_gate(plus, Gate::tdag(0));
    ImpossibilityReport r;
    r.t_plus_z = outcome_distribution(tp, 0);
    r.t_plus_x = outcome_distribution(tp, 1);
    r.tdag_plus_z = outcome_distribution(tdp, 0);
    r.tdag_plus_x = outcome_distribution(tdp, 1);
    r.fidelity = fidelity(tp, tdp);
    r.statistics_match = true;
    for (size_t i = 0; i < 2; i++) {
        if (std::abs(r.t_plus_z[i] - r.tdag_plus_z[i]) > kExactTol ||
            std::abs(r.t_plus_x[i] - r.tdag_plus_x[i]) > kExactTol) {
            r.statistics_match = false;
        }
    }
    return r;
}

std::string format_distribution_text(std::span<const double> distribution, int num_qubits) {
    std::ostringstream out;
    out << "outcome probability\n" << std::fixed << std::setprecision(12);
    for (size_t i = 0; i < distribution.size(); i++) {
        out << format_bits(static_cast<Word>(i), num_qubits) << ' ' << distribution[i] << '\n';
    }
    return out.str();
}

std::string format_distribution_csv(std::span<const double> distribution, int num_qubits) {
    std::ostringstream out;
    out << "outcome,probability\n" << std::fixed << std::setprecision(12);
    for (size_t i = 0; i < distribution.size(); i++) {
        out << format_bits(static_cast<Word>(i), num_qubits) << ',' << distribution[i] << '\n';
    }
    return out.str();
}

}  // namespace cczst::qsim
