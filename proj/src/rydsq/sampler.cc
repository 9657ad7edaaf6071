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

#include "rydsq/sampler.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rydsq/parallel.h"
#include "rydsq/tempered_binomial.h"

namespace rydsq {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double clip_probability(double p, int &clipped) {
    if (p < 0 || p > 1) {
        clipped++;
        return std::clamp(p, 0.0, 1.0);
    }
    return p;
}

std::string format_double(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

}  // namespace

std::string to_string(RecordMode m) {
    switch (m) {
        case RecordMode::kQuadrature:
            return "quadrature";
        case RecordMode::kStability:
            return "stability";
        case RecordMode::kEllipse:
            return "ellipse";
    }
    return "quadrature";
}

std::string to_string(LaserPhaseMode m) {
    switch (m) {
        case LaserPhaseMode::kFixed:
            return "fixed";
        case LaserPhaseMode::kWhite:
            return "white";
        case LaserPhaseMode::kRandomUniform:
            return "random_uniform";
    }
    return "fixed";
}

RecordMode record_mode_from_string(const std::string &s) {
    if (s == "quadrature") {
        return RecordMode::kQuadrature;
    }
    if (s == "stability") {
        return RecordMode::kStability;
    }
    if (s == "ellipse") {
        return RecordMode::kEllipse;
    }
    throw std::invalid_argument("unknown record mode '" + s + "'");
}

LaserPhaseMode laser_phase_mode_from_string(const std::string &s) {
    if (s == "fixed") {
        return LaserPhaseMode::kFixed;
    }
    if (s == "white") {
        return LaserPhaseMode::kWhite;
    }
    if (s == "random_uniform") {
        return LaserPhaseMode::kRandomUniform;
    }
    throw std::invalid_argument("unknown laser phase mode '" + s + "'");
}

void MeasurementRecord::validate() const {
    for (const auto &s : shots) {
        if (!(s.p_a >= 0 && s.p_a <= 1 && s.p_b >= 0 && s.p_b <= 1)) {
            throw std::invalid_argument("excitation fractions must lie in [0, 1]");
        }
        if (s.n_a <= 0 || s.n_b <= 0) {
            throw std::invalid_argument("atom numbers must be positive");
        }
    }
    if (!(t_dark >= 0) || !(cycle_time > 0)) {
        throw std::invalid_argument("t_dark must be >= 0 and cycle_time > 0");
    }
}

void NoiseSpec::validate() const {
    if (!(contrast >= 0 && contrast <= 1)) {
        throw std::invalid_argument("contrast must lie in [0, 1]");
    }
    double slack = (1 - contrast) / 2 + 1e-12;
    if (std::abs(y_a - 0.5) > slack || std::abs(y_b - 0.5) > slack) {
        throw std::invalid_argument("offsets must satisfy |y - 1/2| <= (1 - C)/2");
    }
    if (!(sigma_theta >= 0)) {
        throw std::invalid_argument("sigma_theta must be non-negative");
    }
    if (!std::isfinite(theta0) || !std::isfinite(differential_phase)) {
        throw std::invalid_argument("phases must be finite");
    }
}

std::mt19937_64 make_stream(std::uint64_t seed, const std::string &purpose, std::uint64_t index) {
    std::uint64_t tag = fnv1a(purpose);
    std::seed_seq seq{(std::uint32_t)seed, (std::uint32_t)(seed >> 32), (std::uint32_t)tag, (std::uint32_t)(tag >> 32),
                      (std::uint32_t)index, (std::uint32_t)(index >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64 &rng) {
    return (double)(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64 &rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0);
    double u2 = uniform01(rng);
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * u2);
}

int draw_discrete(const double *pmf, int size, double u) {
    double acc = 0;
    for (int k = 0; k < size; k++) {
        acc += pmf[k];
        if (u < acc) {
            return k;
        }
    }
    // Round-off left u above the accumulated mass: return the last supported outcome.
    for (int k = size - 1; k >= 0; k--) {
        if (pmf[k] > 0) {
            return k;
        }
    }
    return size - 1;
}

double draw_theta(const NoiseSpec &noise, std::uint64_t seed, std::uint64_t index) {
    auto rng = make_stream(seed, "theta", index);
    switch (noise.laser_phase_mode) {
        case LaserPhaseMode::kFixed:
            return noise.theta0;
        case LaserPhaseMode::kWhite:
            return noise.theta0 + noise.sigma_theta * standard_normal(rng);
        case LaserPhaseMode::kRandomUniform:
            return 2 * kPi * uniform01(rng);
    }
    return noise.theta0;
}

namespace {

MeasurementRecord sample_tempered(
    int n_atoms,
    const NoiseSpec &noise,
    double zeta0,
    double zeta1,
    int n_shots,
    std::uint64_t seed,
    const std::string &label,
    int jobs) {
    if (n_atoms < 1) {
        throw std::invalid_argument("n_atoms must be >= 1");
    }
    if (n_shots < 0) {
        throw std::invalid_argument("n_shots must be >= 0");
    }
    noise.validate();
    MeasurementRecord rec;
    rec.mode = noise.laser_phase_mode == LaserPhaseMode::kRandomUniform ? RecordMode::kEllipse : RecordMode::kQuadrature;
    rec.theta_mode = noise.laser_phase_mode;
    rec.label = label;
    rec.phase_offset_deg = noise.differential_phase * 180 / kPi;
    rec.shots.resize(n_shots);
    std::vector<int> clipped(n_shots, 0);
    TemperedBinomial tb(n_atoms);
    EllipseModel zm;
    zm.zeta0 = zeta0;
    zm.zeta1 = zeta1;
    parallel_for((std::size_t)n_shots, jobs, [&](std::size_t k) {
        double theta = draw_theta(noise, seed, k);
        double pa = noise.contrast / 2 * std::cos(theta) + noise.y_a;
        double pb = noise.contrast / 2 * std::cos(theta + noise.differential_phase) + noise.y_b;
        pa = clip_probability(pa, clipped[k]);
        pb = clip_probability(pb, clipped[k]);
        std::vector<double> pmf(n_atoms + 1);
        auto rng = make_stream(seed, "counts/" + label, k);
        tb.pmf(pa, 1 / zm.zeta_sq(theta), pmf.data());
        int ka = draw_discrete(pmf.data(), n_atoms + 1, uniform01(rng));
        tb.pmf(pb, 1 / zm.zeta_sq(theta + noise.differential_phase), pmf.data());
        int kb = draw_discrete(pmf.data(), n_atoms + 1, uniform01(rng));
        rec.shots[k] = {(double)ka / n_atoms, (double)kb / n_atoms, n_atoms, n_atoms};
    });
    for (int c : clipped) {
        rec.clipped += c > 0;
    }
    return rec;
}

}  // namespace

MeasurementRecord sample_css(int n_atoms, const NoiseSpec &noise, int n_shots, std::uint64_t seed, int jobs) {
    return sample_tempered(n_atoms, noise, 1, 1, n_shots, seed, "css", jobs);
}

MeasurementRecord sample_sss(
    int n_atoms, const NoiseSpec &noise, const EllipseModel &model, int n_shots, std::uint64_t seed, int jobs) {
    if (!(model.zeta0 > 0) || !(model.zeta1 > 0) || !std::isfinite(model.zeta0) || !std::isfinite(model.zeta1)) {
        throw std::invalid_argument("zeta must be positive and finite; zeta -> 0 is not normalizable");
    }
    return sample_tempered(n_atoms, noise, model.zeta0, model.zeta1, n_shots, seed, "sss", jobs);
}

void StabilityRunParams::validate() const {
    if (n_atoms < 1 || n_shots < 1) {
        throw std::invalid_argument("stability run needs n_atoms >= 1 and n_shots >= 1");
    }
    if (!(t_dark > 0)) {
        throw std::invalid_argument("t_dark must be positive");
    }
    if (!(cycle_time > 0)) {
        throw std::invalid_argument("cycle_time must be positive");
    }
    if (!(contrast > 0 && contrast <= 1)) {
        throw std::invalid_argument("contrast must lie in (0, 1]");
    }
    double slack = (1 - contrast) / 2 + 1e-12;
    if (std::abs(y_a - 0.5) > slack || std::abs(y_b - 0.5) > slack) {
        throw std::invalid_argument("offsets must satisfy |y - 1/2| <= (1 - C)/2");
    }
    if (!(sigma_theta >= 0) || !(servo_gain >= 0)) {
        throw std::invalid_argument("sigma_theta and servo_gain must be non-negative");
    }
    if (squeezed && (!(zeta0 > 0) || !(zeta1 > 0))) {
        throw std::invalid_argument("zeta must be positive");
    }
}

MeasurementRecord sample_stability_run(const StabilityRunParams &params, std::uint64_t seed) {
    params.validate();
    MeasurementRecord rec;
    rec.mode = RecordMode::kStability;
    rec.theta_mode = params.sigma_theta > 0 ? LaserPhaseMode::kWhite : LaserPhaseMode::kFixed;
    rec.t_dark = params.t_dark;
    rec.cycle_time = params.cycle_time;
    rec.label = params.label;
    double phi = 2 * kPi * params.diff_freq * params.t_dark;
    rec.phase_offset_deg = phi * 180 / kPi;
    double drift = 2 * kPi * params.freq_offset * params.t_dark;
    int n = params.n_atoms;
    TemperedBinomial tb(n);
    EllipseModel zm;
    zm.zeta0 = params.squeezed ? params.zeta0 : 1;
    zm.zeta1 = params.squeezed ? params.zeta1 : 1;
    std::vector<double> pmf(n + 1);
    double correction = 0;
    for (int k = 0; k < params.n_shots; k++) {
        auto theta_rng = make_stream(seed, "theta", (std::uint64_t)k);
        double theta = kPi / 2 + drift - correction + params.sigma_theta * standard_normal(theta_rng);
        double pa = params.contrast / 2 * std::cos(theta) + params.y_a;
        double pb = params.contrast / 2 * std::cos(theta + phi) + params.y_b;
        int clipped = 0;
        pa = clip_probability(pa, clipped);
        pb = clip_probability(pb, clipped);
        rec.clipped += clipped > 0;
        auto rng = make_stream(seed, "counts/" + params.label, (std::uint64_t)k);
        tb.pmf(pa, 1 / zm.zeta_sq(theta), pmf.data());
        int ka = draw_discrete(pmf.data(), n + 1, uniform01(rng));
        tb.pmf(pb, 1 / zm.zeta_sq(theta + phi), pmf.data());
        int kb = draw_discrete(pmf.data(), n + 1, uniform01(rng));
        Shot s{(double)ka / n, (double)kb / n, n, n};
        rec.shots.push_back(s);
        if (params.servo == ServoMode::kIntegrator) {
            double mean = 0.5 * (s.p_a + s.p_b);
            correction += params.servo_gain * (0.5 - mean) * 2 / params.contrast;
        }
    }
    return rec;
}

MeasurementRecord sample_from_distributions(
    const std::vector<double> &dist_a, const std::vector<double> &dist_b, int n_shots, std::uint64_t seed) {
    if (dist_a.size() < 2 || dist_b.size() < 2) {
        throw std::invalid_argument("count distributions need at least two outcomes");
    }
    MeasurementRecord rec;
    rec.mode = RecordMode::kQuadrature;
    rec.label = "exact";
    int na = (int)dist_a.size() - 1, nb = (int)dist_b.size() - 1;
    for (int k = 0; k < n_shots; k++) {
        auto rng = make_stream(seed, "counts/exact", (std::uint64_t)k);
        int ka = draw_discrete(dist_a.data(), na + 1, uniform01(rng));
        int kb = draw_discrete(dist_b.data(), nb + 1, uniform01(rng));
        rec.shots.push_back({(double)ka / na, (double)kb / nb, na, nb});
    }
    return rec;
}

std::string record_to_csv(const MeasurementRecord &r) {
    std::ostringstream out;
    out << "# mode=" << to_string(r.mode) << " label=" << r.label << " cycle_time_s=" << format_double(r.cycle_time)
        << " phase_offset_deg=" << format_double(r.phase_offset_deg) << "\n";
    out << "shot_index,p_a,p_b,n_a,n_b,theta_mode,t_dark_s\n";
    std::string mode = to_string(r.theta_mode);
    std::string t_dark = format_double(r.t_dark);
    for (std::size_t k = 0; k < r.shots.size(); k++) {
        const auto &s = r.shots[k];
        out << k << ',' << format_double(s.p_a) << ',' << format_double(s.p_b) << ',' << s.n_a << ',' << s.n_b << ','
            << mode << ',' << t_dark << '\n';
    }
    return out.str();
}

MeasurementRecord record_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    MeasurementRecord rec;
    bool header = false;
    int line_no = 0;
    long expected_index = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string kv;
            while (meta >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    continue;
                }
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "mode") {
                    rec.mode = record_mode_from_string(val);
                } else if (key == "label") {
                    rec.label = val;
                } else if (key == "cycle_time_s") {
                    rec.cycle_time = std::stod(val);
                } else if (key == "phase_offset_deg") {
                    rec.phase_offset_deg = std::stod(val);
                }
            }
            continue;
        }
        if (!header) {
            if (line.rfind("shot_index,p_a,p_b,n_a,n_b,theta_mode,t_dark_s", 0) != 0) {
                throw std::invalid_argument(
                    "record header must be shot_index,p_a,p_b,n_a,n_b,theta_mode,t_dark_s");
            }
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 7) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 7 fields");
        }
        try {
            long idx = std::stol(fields[0]);
            if (idx != expected_index) {
                throw std::invalid_argument("line " + std::to_string(line_no) + ": shots must be time ordered");
            }
            expected_index++;
            Shot s{std::stod(fields[1]), std::stod(fields[2]), std::stoi(fields[3]), std::stoi(fields[4])};
            rec.theta_mode = laser_phase_mode_from_string(fields[5]);
            rec.t_dark = std::stod(fields[6]);
            rec.shots.push_back(s);
        } catch (const std::invalid_argument &e) {
            if (std::string(e.what()).rfind("line ", 0) == 0) {
                throw;
            }
            throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed field");
        } catch (const std::out_of_range &) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": field out of range");
        }
    }
    if (!header) {
        throw std::invalid_argument("record has no header line");
    }
    rec.validate();
    return rec;
}

void write_record(const MeasurementRecord &r, const std::string &path) {
    std::ofstream f(path);
    if (!f) {
        throw std::invalid_argument("cannot write " + path);
    }
    f << record_to_csv(r);
}

MeasurementRecord read_record(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw std::invalid_argument("cannot open " + path);
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return record_from_csv(buf.str());
}

}  // namespace rydsq
