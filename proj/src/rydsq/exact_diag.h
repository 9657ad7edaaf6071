// Copyright 2026 The rydsq Authors
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

#ifndef RYDSQ_EXACT_DIAG_H
#define RYDSQ_EXACT_DIAG_H

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydsq/geometry.h"
#include "rydsq/krylov.h"
#include "rydsq/potentials.h"
#include "rydsq/weak_dressing.h"

namespace rydsq {

/// Largest array handled by exact diagonalization (3^9 = 19683 states).
constexpr int kMaxExactAtoms = 9;

/// Per-atom levels; basis index = sum_i level_i * 3^i.
enum Level : int { kG = 0, kE = 1, kR = 2 };

struct QuantumState {
    int n_atoms = 0;
    Eigen::VectorXcd amplitudes;

    /// |gg...g>.
    static QuantumState ground(int n_atoms);
    double norm() const {
        return amplitudes.norm();
    }
    /// Little-endian (real, imag) float64 pairs.
    void dump(const std::string &path) const;
    static QuantumState load(const std::string &path, int n_atoms);
};

/// Instantaneous drive amplitudes in rad/s.
struct DriveValues {
    double omega_r = 0;
    double delta = 0;
    double omega_c = 0;
    bool operator==(const DriveValues &o) const = default;
    bool operator<(const DriveValues &o) const;
};

struct DriveStep {
    DriveValues drive;
    double dt = 0;
    bool operator==(const DriveStep &o) const = default;
};

/// Linear switch-on/off of the Rydberg drive, piecewise constant at step
/// midpoints. Omega_r goes 0 -> max while delta goes
/// delta_start_factor * delta -> delta.
struct RampSchedule {
    double duration = 225e-9;
    double step = 6.5e-9;
    double delta_start_factor = 3;

    int n_steps() const;
    std::vector<DriveStep> ramp_up(const DressingParams &p) const;
    std::vector<DriveStep> ramp_down(const DressingParams &p) const;
};

/// Throws std::invalid_argument naming the cap and the memory that would be required.
void check_exact_size(int n_atoms);

/// Sparse 3^N x 3^N Hamiltonian / hbar (rad/s).
SparseHermitian build_h3(const ArrayGeometry &g, double c6, const DriveValues &drive);
/// Static drive taken from the parameters (omega_c included).
SparseHermitian build_h3(const ArrayGeometry &g, const DressingParams &p);

/// Time propagation for one geometry. Without a clock drive the Hamiltonian
/// is block diagonal in the set of atoms outside |g>; those blocks are
/// propagated exactly by dense eigendecomposition, which stays exact however
/// large the van der Waals shifts are. With a clock drive a Lanczos
/// exponential of the full sparse operator is used.
class ExactEngine {
   public:
    ExactEngine(const ArrayGeometry &g, double c6);
    ~ExactEngine();
    ExactEngine(const ExactEngine &) = delete;
    ExactEngine &operator=(const ExactEngine &) = delete;

    int n_atoms() const {
        return n_;
    }
    /// psi <- exp(-i H(drive) duration) psi.
    void evolve(QuantumState &psi, const DriveValues &drive, double duration);
    /// Consecutive identical steps are merged before propagation. Pure
    /// Rydberg step lists of more than one step are composed once per block
    /// and cached.
    void evolve_steps(QuantumState &psi, const std::vector<DriveStep> &steps);
    /// Ideal instantaneous rotation exp(-i angle/2 (cos(phase) X + sin(phase) Y))
    /// on every atom in the {g, e} subspace; |r> untouched.
    void rotate_clock(QuantumState &psi, double angle, double phase) const;

    SparseHermitian hamiltonian(const DriveValues &drive) const;
    double interaction(int i, int j) const {
        return u_(i, j);
    }

   private:
    struct Block;
    struct Decomposition;
    struct Composed;
    const Decomposition &decomposition(const DriveValues &drive);
    Eigen::MatrixXd block_hamiltonian(const Block &b, const DriveValues &drive) const;

    int n_;
    ArrayGeometry geometry_;
    Eigen::MatrixXd u_;
    std::vector<Block> blocks_;
    std::map<DriveValues, std::unique_ptr<Decomposition>> cache_;
    std::vector<std::pair<std::vector<DriveStep>, std::unique_ptr<Composed>>> composed_;
};

/// Spin-echo sequence segments.
struct Segment {
    enum Kind { kClockPulse, kRydbergOn, kEchoPi, kQuadratureRotation, kFinalPi2 };
    Kind kind;
    double angle = 0;     // rotations
    double phase = 0;     // rotation axis azimuth
    double duration = 0;  // Rydberg hold time, excluding ramps
};

struct PulseSequence {
    std::vector<Segment> segments;
    /// pi/2 - dressing t/2 - echo pi - dressing t/2 - alpha - pi/2.
    static PulseSequence spin_echo(double t_int, double alpha = 0);
    void validate() const;
};

struct SequenceOptions {
    RampSchedule ramp;
    bool ramps = true;
    int alpha_points = 181;
    double rydberg_warning = 0.05;
};

/// Observables of the final state after projecting out |r> and renormalizing.
struct ExactObservables {
    SqueezingObservables squeezing;
    double rydberg_population_final = 0;  // mean per atom, before projection
    double rydberg_population_max = 0;    // max over segment boundaries
    double norm_error = 0;
    bool adiabaticity_warning = false;
    QuantumState final_state;
    std::string to_json() const;
};

/// Runs the sequence up to its first readout segment, then evaluates the
/// variance over a full alpha grid analytically.
ExactObservables run_sequence(
    ExactEngine &engine, const DressingParams &p, const PulseSequence &seq, const SequenceOptions &options = {});
ExactObservables run_sequence(
    const ArrayGeometry &g, const DressingParams &p, const PulseSequence &seq, const SequenceOptions &options = {});

/// Squeezing observables of a state (|r> projected out and renormalized).
/// The quadrature axes are e1 = z projected orthogonal to the mean spin n0
/// and e2 = e1 x n0; alpha measures cos(alpha) e1 + sin(alpha) e2.
SqueezingObservables state_observables(const QuantumState &psi, int alpha_points = 181);

/// Mean per-atom |r> population.
double rydberg_population(const QuantumState &psi);

/// Distribution of the number of excited atoms after rotating the measured
/// quadrature alpha onto z; the sum of (k - N/2) gives the readout variance.
std::vector<double> readout_distribution(const QuantumState &psi, double alpha);

/// Pair shift V(r) = E(dressed ee) - 2 E(dressed e) in Hz from the static
/// two-atom Hamiltonian without clock drive.
double dressed_pair_shift(const DressingParams &p, double r);

}  // namespace rydsq

#endif
