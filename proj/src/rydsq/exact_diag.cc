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

#include "rydsq/exact_diag.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace rydsq {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint32_t pow3(int n) {
    std::uint32_t r = 1;
    for (int k = 0; k < n; k++) {
        r *= 3;
    }
    return r;
}

std::vector<DriveStep> merge_steps(const std::vector<DriveStep> &steps) {
    std::vector<DriveStep> out;
    for (const auto &s : steps) {
        if (s.dt < 0) {
            throw std::invalid_argument("negative step duration");
        }
        if (s.dt == 0) {
            continue;
        }
        if (!out.empty() && out.back().drive == s.drive) {
            out.back().dt += s.dt;
        } else {
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace

bool DriveValues::operator<(const DriveValues &o) const {
    return std::tie(omega_r, delta, omega_c) < std::tie(o.omega_r, o.delta, o.omega_c);
}

QuantumState QuantumState::ground(int n_atoms) {
    check_exact_size(n_atoms);
    QuantumState s;
    s.n_atoms = n_atoms;
    s.amplitudes = Eigen::VectorXcd::Zero(pow3(n_atoms));
    s.amplitudes[0] = 1;
    return s;
}

void QuantumState::dump(const std::string &path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::invalid_argument("cannot write " + path);
    }
    for (Eigen::Index k = 0; k < amplitudes.size(); k++) {
        double pair[2] = {amplitudes[k].real(), amplitudes[k].imag()};
        unsigned char bytes[16];
        for (int h = 0; h < 2; h++) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(pair[h]);
            for (int b = 0; b < 8; b++) {
                bytes[8 * h + b] = (unsigned char)(bits >> (8 * b));
            }
        }
        f.write(reinterpret_cast<const char *>(bytes), 16);
    }
}

QuantumState QuantumState::load(const std::string &path, int n_atoms) {
    check_exact_size(n_atoms);
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::invalid_argument("cannot read " + path);
    }
    QuantumState s;
    s.n_atoms = n_atoms;
    std::uint32_t dim = pow3(n_atoms);
    s.amplitudes.resize(dim);
    for (std::uint32_t k = 0; k < dim; k++) {
        unsigned char bytes[16];
        if (!f.read(reinterpret_cast<char *>(bytes), 16)) {
            throw std::invalid_argument("state file too short for " + std::to_string(n_atoms) + " atoms");
        }
        double pair[2];
        for (int h = 0; h < 2; h++) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; b++) {
                bits |= (std::uint64_t)bytes[8 * h + b] << (8 * b);
            }
            pair[h] = std::bit_cast<double>(bits);
        }
        s.amplitudes[k] = cplx(pair[0], pair[1]);
    }
    return s;
}

int RampSchedule::n_steps() const {
    if (!(duration >= 0) || !(step > 0)) {
        throw std::invalid_argument("ramp duration must be >= 0 and step > 0");
    }
    if (duration > 0 && step > duration) {
        throw std::invalid_argument("ramp step exceeds ramp duration");
    }
    return (int)std::lround(duration / step);
}

std::vector<DriveStep> RampSchedule::ramp_up(const DressingParams &p) const {
    int n = n_steps();
    std::vector<DriveStep> out;
    if (n == 0) {
        return out;
    }
    double dt = duration / n;
    for (int k = 0; k < n; k++) {
        double f = (k + 0.5) / n;
        DriveValues d;
        d.omega_r = f * p.omega_r;
        d.delta = (delta_start_factor + (1 - delta_start_factor) * f) * p.delta;
        out.push_back({d, dt});
    }
    return out;
}

std::vector<DriveStep> RampSchedule::ramp_down(const DressingParams &p) const {
    auto up = ramp_up(p);
    std::reverse(up.begin(), up.end());
    return up;
}

void check_exact_size(int n_atoms) {
    if (n_atoms < 1) {
        throw std::invalid_argument("exact diagonalization needs at least one atom");
    }
    if (n_atoms > kMaxExactAtoms) {
        double bytes = std::pow(3.0, n_atoms) * 16.0;
        std::ostringstream msg;
        msg << "exact diagonalization is capped at N=" << kMaxExactAtoms << " atoms (3^" << kMaxExactAtoms
            << " = 19683 states); N=" << n_atoms << " would need " << bytes / (1 << 30)
            << " GiB per state vector alone";
        throw std::invalid_argument(msg.str());
    }
}

SparseHermitian build_h3(const ArrayGeometry &g, double c6, const DriveValues &drive) {
    ExactEngine engine(g, c6);
    return engine.hamiltonian(drive);
}

SparseHermitian build_h3(const ArrayGeometry &g, const DressingParams &p) {
    return build_h3(g, p.c6, {p.omega_r, p.delta, p.omega_c});
}

struct ExactEngine::Block {
    std::vector<int> atoms;
    std::vector<std::uint32_t> index;  // local b -> global basis index
};

struct ExactEngine::Decomposition {
    std::vector<Eigen::MatrixXd> vectors;
    std::vector<Eigen::VectorXd> values;
};

struct ExactEngine::Composed {
    std::vector<Eigen::MatrixXcd> unitary;
};

ExactEngine::ExactEngine(const ArrayGeometry &g, double c6) : geometry_(g) {
    n_ = (int)g.size();
    check_exact_size(n_);
    if (!std::isfinite(c6)) {
        throw std::invalid_argument("c6 must be finite");
    }
    u_ = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; i++) {
        for (int j = i + 1; j < n_; j++) {
            double r = g.distance(i, j);
            u_(i, j) = u_(j, i) = c6 / std::pow(r, 6);
        }
    }
    std::vector<std::uint32_t> p3(n_ + 1, 1);
    for (int k = 1; k <= n_; k++) {
        p3[k] = p3[k - 1] * 3;
    }
    for (std::uint32_t mask = 0; mask < (1u << n_); mask++) {
        Block b;
        for (int i = 0; i < n_; i++) {
            if (mask >> i & 1) {
                b.atoms.push_back(i);
            }
        }
        int k = (int)b.atoms.size();
        b.index.resize(1u << k);
        for (std::uint32_t loc = 0; loc < (1u << k); loc++) {
            std::uint32_t idx = 0;
            for (int a = 0; a < k; a++) {
                idx += p3[b.atoms[a]] * ((loc >> a & 1) ? kR : kE);
            }
            b.index[loc] = idx;
        }
        blocks_.push_back(std::move(b));
    }
}

ExactEngine::~ExactEngine() = default;

SparseHermitian ExactEngine::hamiltonian(const DriveValues &drive) const {
    std::uint32_t dim = pow3(n_);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve((std::size_t)dim * (n_ + 1));
    std::vector<int> lv(n_);
    std::vector<std::uint32_t> p3(n_, 1);
    for (int k = 1; k < n_; k++) {
        p3[k] = p3[k - 1] * 3;
    }
    for (std::uint32_t x = 0; x < dim; x++) {
        std::uint32_t rest = x;
        for (int i = 0; i < n_; i++) {
            lv[i] = rest % 3;
            rest /= 3;
        }
        double diag = 0;
        for (int i = 0; i < n_; i++) {
            if (lv[i] == kR) {
                diag += drive.delta;
                for (int j = i + 1; j < n_; j++) {
                    if (lv[j] == kR) {
                        diag += u_(i, j);
                    }
                }
            }
        }
        if (diag != 0) {
            trips.emplace_back(x, x, diag);
        }
        for (int i = 0; i < n_; i++) {
            if (lv[i] == kE && drive.omega_r != 0) {
                trips.emplace_back(x, x + p3[i], 0.5 * drive.omega_r);
                trips.emplace_back(x + p3[i], x, 0.5 * drive.omega_r);
            }
            if (lv[i] == kG && drive.omega_c != 0) {
                trips.emplace_back(x, x + p3[i], 0.5 * drive.omega_c);
                trips.emplace_back(x + p3[i], x, 0.5 * drive.omega_c);
            }
        }
    }
    SparseHermitian h(dim, dim);
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
}

Eigen::MatrixXd ExactEngine::block_hamiltonian(const Block &b, const DriveValues &drive) const {
    int k = (int)b.atoms.size();
    int dim = 1 << k;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int loc = 0; loc < dim; loc++) {
        double diag = 0;
        for (int a = 0; a < k; a++) {
            if (loc >> a & 1) {
                diag += drive.delta;
                for (int c = a + 1; c < k; c++) {
                    if (loc >> c & 1) {
                        diag += u_(b.atoms[a], b.atoms[c]);
                    }
                }
            } else {
                h(loc, loc | (1 << a)) = h(loc | (1 << a), loc) = 0.5 * drive.omega_r;
            }
        }
        h(loc, loc) = diag;
    }
    return h;
}

const ExactEngine::Decomposition &ExactEngine::decomposition(const DriveValues &drive) {
    auto it = cache_.find(drive);
    if (it != cache_.end()) {
        return *it->second;
    }
    if (cache_.size() >= 8) {
        cache_.clear();
    }
    auto d = std::make_unique<Decomposition>();
    for (const auto &b : blocks_) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_hamiltonian(b, drive));
        if (eig.info() != Eigen::Success) {
            throw NumericalError("block eigendecomposition failed");
        }
        d->vectors.push_back(eig.eigenvectors());
        d->values.push_back(eig.eigenvalues());
    }
    auto &slot = cache_[drive];
    slot = std::move(d);
    return *slot;
}

void ExactEngine::evolve(QuantumState &psi, const DriveValues &drive, double duration) {
    if (psi.n_atoms != n_) {
        throw std::invalid_argument("state and engine atom numbers differ");
    }
    if (duration < 0) {
        throw std::invalid_argument("negative evolution time");
    }
    if (duration == 0) {
        return;
    }
    if (drive.omega_c != 0) {
        expv_hermitian(hamiltonian(drive), duration, psi.amplitudes, 1e-12);
        return;
    }
    const auto &d = decomposition(drive);
    for (std::size_t bi = 0; bi < blocks_.size(); bi++) {
        const auto &b = blocks_[bi];
        int dim = (int)b.index.size();
        Eigen::VectorXcd local(dim);
        for (int k = 0; k < dim; k++) {
            local[k] = psi.amplitudes[b.index[k]];
        }
        Eigen::VectorXcd coeff = d.vectors[bi].transpose().cast<cplx>() * local;
        for (int k = 0; k < dim; k++) {
            coeff[k] *= std::exp(cplx(0, -d.values[bi][k] * duration));
        }
        local = d.vectors[bi].cast<cplx>() * coeff;
        for (int k = 0; k < dim; k++) {
            psi.amplitudes[b.index[k]] = local[k];
        }
    }
}

void ExactEngine::evolve_steps(QuantumState &psi, const std::vector<DriveStep> &raw) {
    auto steps = merge_steps(raw);
    bool pure = std::all_of(steps.begin(), steps.end(), [](const DriveStep &s) { return s.drive.omega_c == 0; });
    if (steps.size() <= 1 || !pure) {
        for (const auto &s : steps) {
            evolve(psi, s.drive, s.dt);
        }
        return;
    }
    const Composed *found = nullptr;
    for (const auto &entry : composed_) {
        if (entry.first == steps) {
            found = entry.second.get();
            break;
        }
    }
    if (!found) {
        // Build the product for this list and its time reverse together; a
        // ramp down is the reversed ramp up, so both come from one set of
        // eigendecompositions.
        auto fwd = std::make_unique<Composed>();
        auto rev = std::make_unique<Composed>();
        for (const auto &b : blocks_) {
            int dim = (int)b.index.size();
            fwd->unitary.push_back(Eigen::MatrixXcd::Identity(dim, dim));
            rev->unitary.push_back(Eigen::MatrixXcd::Identity(dim, dim));
        }
        for (const auto &s : steps) {
            for (std::size_t bi = 0; bi < blocks_.size(); bi++) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_hamiltonian(blocks_[bi], s.drive));
                Eigen::MatrixXcd v = eig.eigenvectors().cast<cplx>();
                Eigen::VectorXcd ph(v.cols());
                for (Eigen::Index k = 0; k < ph.size(); k++) {
                    ph[k] = std::exp(cplx(0, -eig.eigenvalues()[k] * s.dt));
                }
                Eigen::MatrixXcd step_u = v * ph.asDiagonal() * v.transpose();
                fwd->unitary[bi] = step_u * fwd->unitary[bi];
                rev->unitary[bi] = rev->unitary[bi] * step_u;
            }
        }
        if (composed_.size() >= 4) {
            composed_.clear();
        }
        auto reversed = steps;
        std::reverse(reversed.begin(), reversed.end());
        found = fwd.get();
        composed_.emplace_back(steps, std::move(fwd));
        if (reversed != steps) {
            composed_.emplace_back(std::move(reversed), std::move(rev));
        }
    }
    for (std::size_t bi = 0; bi < blocks_.size(); bi++) {
        const auto &b = blocks_[bi];
        int dim = (int)b.index.size();
        Eigen::VectorXcd local(dim);
        for (int k = 0; k < dim; k++) {
            local[k] = psi.amplitudes[b.index[k]];
        }
        local = found->unitary[bi] * local;
        for (int k = 0; k < dim; k++) {
            psi.amplitudes[b.index[k]] = local[k];
        }
    }
}

void ExactEngine::rotate_clock(QuantumState &psi, double angle, double phase) const {
    double c = std::cos(angle / 2), s = std::sin(angle / 2);
    cplx ge = cplx(0, -s) * std::exp(cplx(0, -phase));  // <e|U|g>
    cplx eg = cplx(0, -s) * std::exp(cplx(0, phase));   // <g|U|e>
    std::uint32_t dim = pow3(n_);
    std::uint32_t stride = 1;
    for (int i = 0; i < n_; i++) {
        for (std::uint32_t x = 0; x < dim; x++) {
            if ((x / stride) % 3 != kG) {
                continue;
            }
            cplx ag = psi.amplitudes[x], ae = psi.amplitudes[x + stride];
            psi.amplitudes[x + stride] = c * ae + ge * ag;
            psi.amplitudes[x] = eg * ae + c * ag;
        }
        stride *= 3;
    }
}

PulseSequence PulseSequence::spin_echo(double t_int, double alpha) {
    PulseSequence seq;
    // The first pulse takes |g> (spin down) to the +x axis.
    seq.segments.push_back({Segment::kClockPulse, kPi / 2, -kPi / 2, 0});
    seq.segments.push_back({Segment::kRydbergOn, 0, 0, t_int / 2});
    seq.segments.push_back({Segment::kEchoPi, kPi, 0, 0});
    seq.segments.push_back({Segment::kRydbergOn, 0, 0, t_int / 2});
    seq.segments.push_back({Segment::kQuadratureRotation, alpha, 0, 0});
    seq.segments.push_back({Segment::kFinalPi2, kPi / 2, 0, 0});
    return seq;
}

void PulseSequence::validate() const {
    if (segments.empty()) {
        throw std::invalid_argument("pulse sequence is empty");
    }
    for (const auto &s : segments) {
        if (!(s.duration >= 0) || !std::isfinite(s.duration)) {
            throw std::invalid_argument("segment durations must be finite and non-negative");
        }
        if (!std::isfinite(s.angle) || !std::isfinite(s.phase)) {
            throw std::invalid_argument("segment angles must be finite");
        }
    }
}

double rydberg_population(const QuantumState &psi) {
    double total = 0;
    for (Eigen::Index x = 0; x < psi.amplitudes.size(); x++) {
        double p = std::norm(psi.amplitudes[x]);
        if (p == 0) {
            continue;
        }
        std::uint32_t rest = (std::uint32_t)x;
        int count = 0;
        for (int i = 0; i < psi.n_atoms; i++) {
            count += rest % 3 == kR;
            rest /= 3;
        }
        total += p * count;
    }
    return total / psi.n_atoms;
}

namespace {

/// Qubit-space amplitudes (bit i set = atom i in |e>), renormalized.
Eigen::VectorXcd project_qubits(const QuantumState &psi) {
    int n = psi.n_atoms;
    std::uint32_t dim = 1u << n;
    Eigen::VectorXcd q(dim);
    for (std::uint32_t b = 0; b < dim; b++) {
        std::uint32_t idx = 0, p = 1;
        for (int i = 0; i < n; i++) {
            if (b >> i & 1) {
                idx += p;
            }
            p *= 3;
        }
        q[b] = psi.amplitudes[idx];
    }
    double norm = q.norm();
    if (norm < 1e-12) {
        throw NumericalError("state has no weight in the clock subspace");
    }
    return q / norm;
}

/// Collective spin components S_a |q> for a = x, y, z.
std::array<Eigen::VectorXcd, 3> collective_spin(const Eigen::VectorXcd &q, int n) {
    std::array<Eigen::VectorXcd, 3> out;
    for (auto &v : out) {
        v = Eigen::VectorXcd::Zero(q.size());
    }
    for (Eigen::Index b = 0; b < q.size(); b++) {
        for (int i = 0; i < n; i++) {
            std::uint32_t bit = 1u << i;
            bool up = b & bit;
            Eigen::Index f = b ^ bit;
            // Pauli action in the (up = e, down = g) basis.
            out[0][b] += 0.5 * q[f];
            out[1][b] += 0.5 * q[f] * (up ? cplx(0, -1) : cplx(0, 1));
            out[2][b] += 0.5 * q[b] * (up ? 1.0 : -1.0);
        }
    }
    return out;
}

struct SpinFrame {
    Eigen::Vector3d mean;
    Eigen::Matrix3d cov;
    Eigen::Vector3d n0, e1, e2;
};

SpinFrame spin_frame(const Eigen::VectorXcd &q, int n) {
    auto s = collective_spin(q, n);
    SpinFrame f;
    for (int a = 0; a < 3; a++) {
        f.mean[a] = q.dot(s[a]).real();
    }
    for (int a = 0; a < 3; a++) {
        for (int b = 0; b < 3; b++) {
            f.cov(a, b) = s[a].dot(s[b]).real() - f.mean[a] * f.mean[b];
        }
    }
    double len = f.mean.norm();
    f.n0 = len > 1e-12 ? Eigen::Vector3d(f.mean / len) : Eigen::Vector3d::UnitX();
    Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d e1 = z - z.dot(f.n0) * f.n0;
    if (e1.norm() < 1e-9) {
        Eigen::Vector3d x = Eigen::Vector3d::UnitX();
        e1 = x - x.dot(f.n0) * f.n0;
    }
    f.e1 = e1.normalized();
    f.e2 = f.e1.cross(f.n0);
    return f;
}

}  // namespace

SqueezingObservables state_observables(const QuantumState &psi, int alpha_points) {
    int n = psi.n_atoms;
    auto q = project_qubits(psi);
    auto f = spin_frame(q, n);
    SqueezingObservables obs;
    obs.contrast = f.mean.norm() / (0.5 * n);
    double qpn = 0.25 * n;
    auto ratio = [&](double alpha) {
        Eigen::Vector3d u = std::cos(alpha) * f.e1 + std::sin(alpha) * f.e2;
        return u.dot(f.cov * u) / qpn;
    };
    auto best = minimize_over_alpha(ratio, alpha_points, &obs.alpha_grid, &obs.var_ratio_grid);
    obs.alpha_opt = best.first;
    obs.var_ratio_min = best.second;
    obs.xi_w_sq = obs.contrast > 0 ? obs.var_ratio_min / (obs.contrast * obs.contrast)
                                   : std::numeric_limits<double>::infinity();
    return obs;
}

std::vector<double> readout_distribution(const QuantumState &psi, double alpha) {
    int n = psi.n_atoms;
    auto q = project_qubits(psi);
    auto f = spin_frame(q, n);
    Eigen::Vector3d u = std::cos(alpha) * f.e1 + std::sin(alpha) * f.e2;
    // Single-qubit rotation taking the Bloch direction u onto +z.
    Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d axis = u.cross(z);
    double s = axis.norm();
    double angle = std::atan2(s, u.dot(z));
    axis = s > 1e-15 ? Eigen::Vector3d(axis / s) : Eigen::Vector3d::UnitX();
    double c2 = std::cos(angle / 2), s2 = std::sin(angle / 2);
    // exp(-i angle/2 axis.sigma) in the (up, down) basis.
    cplx uu = cplx(c2, -s2 * axis.z());
    cplx ud = cplx(-s2 * axis.y(), -s2 * axis.x());
    cplx du = cplx(s2 * axis.y(), -s2 * axis.x());
    cplx dd = cplx(c2, s2 * axis.z());
    for (int i = 0; i < n; i++) {
        std::uint32_t bit = 1u << i;
        for (Eigen::Index b = 0; b < q.size(); b++) {
            if (b & bit) {
                continue;
            }
            cplx down = q[b], up = q[b | bit];
            q[b | bit] = uu * up + ud * down;
            q[b] = du * up + dd * down;
        }
    }
    std::vector<double> dist(n + 1, 0.0);
    for (Eigen::Index b = 0; b < q.size(); b++) {
        dist[std::popcount((std::uint32_t)b)] += std::norm(q[b]);
    }
    return dist;
}

std::string ExactObservables::to_json() const {
    nlohmann::json j;
    j["contrast"] = squeezing.contrast;
    j["alpha_opt_deg"] = squeezing.alpha_opt * 180 / kPi;
    j["var_ratio_min"] = squeezing.var_ratio_min;
    j["xi_w_sq"] = squeezing.xi_w_sq;
    j["xi_db"] = squeezing.xi_db();
    j["rydberg_population_final"] = rydberg_population_final;
    j["rydberg_population_max"] = rydberg_population_max;
    j["norm_error"] = norm_error;
    j["adiabaticity_warning"] = adiabaticity_warning;
    nlohmann::json grid = nlohmann::json::array();
    for (std::size_t k = 0; k < squeezing.alpha_grid.size(); k++) {
        grid.push_back({squeezing.alpha_grid[k] * 180 / kPi, squeezing.var_ratio_grid[k]});
    }
    j["var_ratio_vs_alpha_deg"] = grid;
    return j.dump(2);
}

ExactObservables run_sequence(
    ExactEngine &engine, const DressingParams &p, const PulseSequence &seq, const SequenceOptions &options) {
    p.validate();
    seq.validate();
    auto state = QuantumState::ground(engine.n_atoms());
    ExactObservables out;
    auto track = [&]() {
        out.rydberg_population_max = std::max(out.rydberg_population_max, rydberg_population(state));
    };
    DriveValues hold{p.omega_r, p.delta, 0};
    bool readout = false;
    for (const auto &s : seq.segments) {
        switch (s.kind) {
            case Segment::kClockPulse:
                engine.rotate_clock(state, s.angle, s.phase);
                break;
            case Segment::kEchoPi:
                engine.rotate_clock(state, s.angle, s.phase);
                break;
            case Segment::kRydbergOn:
                // A zero-length dressing window is skipped with its ramps.
                if (s.duration <= 0) {
                    break;
                }
                if (options.ramps) {
                    engine.evolve_steps(state, options.ramp.ramp_up(p));
                    track();
                }
                engine.evolve(state, hold, s.duration);
                track();
                if (options.ramps) {
                    engine.evolve_steps(state, options.ramp.ramp_down(p));
                    track();
                }
                break;
            case Segment::kQuadratureRotation:
            case Segment::kFinalPi2:
                readout = true;
                break;
        }
        if (readout) {
            break;
        }
    }
    out.rydberg_population_final = rydberg_population(state);
    out.norm_error = std::abs(state.norm() - 1);
    out.adiabaticity_warning = out.rydberg_population_final > options.rydberg_warning;
    out.squeezing = state_observables(state, options.alpha_points);
    out.final_state = std::move(state);
    return out;
}

ExactObservables run_sequence(
    const ArrayGeometry &g, const DressingParams &p, const PulseSequence &seq, const SequenceOptions &options) {
    ExactEngine engine(g, p.c6);
    return run_sequence(engine, p, seq, options);
}

double dressed_pair_shift(const DressingParams &p, double r) {
    p.validate();
    if (!(r > 0)) {
        throw std::invalid_argument("separation must be positive");
    }
    double om = p.omega_r, d = p.delta;
    double u = p.c6 / std::pow(r, 6);
    Eigen::Matrix3d pair;
    double c = om / std::sqrt(2.0);
    pair << 0, c, 0, c, d, c, 0, c, 2 * d + u;
    Eigen::Matrix2d single;
    single << 0, om / 2, om / 2, d;

    auto dressed = [](const auto &h, const char *what) {
        Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(h)>> eig(h);
        Eigen::Index best = 0;
        double overlap = 0;
        for (Eigen::Index k = 0; k < h.rows(); k++) {
            double o = std::norm(eig.eigenvectors()(0, k));
            if (o > overlap) {
                overlap = o;
                best = k;
            }
        }
        if (overlap < 0.5) {
            throw NumericalError(
                std::string("dressed ") + what + " state is not identifiable (near-degenerate dressed crossing)");
        }
        return eig.eigenvalues()[best];
    };
    double e_pair = dressed(pair, "|ee>");
    double e_single = dressed(single, "|e>");
    return (e_pair - 2 * e_single) / kTwoPi;
}

}  // namespace rydsq
