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

#include "rydsq/rydsq.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "rydsq/ellipse.h"
#include "rydsq/exact_diag.h"
#include "rydsq/geometry.h"
#include "rydsq/least_squares.h"
#include "rydsq/potentials.h"
#include "rydsq/sampler.h"
#include "rydsq/stability.h"
#include "rydsq/tempered_binomial.h"
#include "rydsq/weak_dressing.h"

struct rydsq_geometry {
    rydsq::ArrayGeometry g;
};

struct rydsq_record {
    rydsq::MeasurementRecord r;
};

namespace {

using nlohmann::json;
constexpr double kPi = 3.141592653589793238462643383279502884;

thread_local std::string last_error;

class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

template <typename F>
rydsq_status guarded(F &&body) {
    try {
        body();
        last_error.clear();
        return RYDSQ_OK;
    } catch (const IoError &e) {
        last_error = e.what();
        return RYDSQ_ERR_IO;
    } catch (const rydsq::NumericalError &e) {
        last_error = e.what();
        return RYDSQ_ERR_NUMERICAL;
    } catch (const std::invalid_argument &e) {
        last_error = e.what();
        return RYDSQ_ERR_INVALID_ARGUMENT;
    } catch (const json::exception &e) {
        last_error = std::string("configuration error: ") + e.what();
        return RYDSQ_ERR_INVALID_ARGUMENT;
    } catch (const std::exception &e) {
        last_error = e.what();
        return RYDSQ_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return RYDSQ_ERR_INTERNAL;
    }
}

void require(const void *p, const char *what) {
    if (p == nullptr) {
        throw std::invalid_argument(std::string(what) + " must not be null");
    }
}

char *copy_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::runtime_error("out of memory");
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_config(const char *text, const std::set<std::string> &allowed) {
    json j = (text == nullptr || *text == '\0') ? json::object() : json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("configuration must be a JSON object");
    }
    for (const auto &[key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument("unknown configuration key '" + key + "'");
        }
    }
    return j;
}

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) {
        return fallback;
    }
    return j[key].get<T>();
}

rydsq::DressingParams dressing_from(const json &j) {
    json d = j.contains("dressing") ? j["dressing"] : json::object();
    for (const auto &[key, value] : d.items()) {
        if (key != "omega_r_mhz" && key != "delta_mhz" && key != "c6_ghz_um6" && key != "omega_c_mhz") {
            throw std::invalid_argument("unknown dressing key '" + key + "'");
        }
    }
    auto p = rydsq::DressingParams::from_lab_units(
        get_or(d, "omega_r_mhz", 5.5), get_or(d, "delta_mhz", 11.0), get_or(d, "c6_ghz_um6", 9.1));
    p.omega_c = rydsq::kTwoPi * 1e6 * get_or(d, "omega_c_mhz", 0.0);
    p.validate();
    return p;
}

rydsq::ArrayGeometry geometry_from(const json &j) {
    std::string text = j.contains("geometry") ? j["geometry"].dump() : std::string("{}");
    return rydsq::build_subarrays(rydsq::layout_from_json(text));
}

}  // namespace

extern "C" {

const char *rydsq_version(void) {
    return "0.1.0";
}

const char *rydsq_last_error(void) {
    return last_error.c_str();
}

const char *rydsq_status_name(rydsq_status status) {
    switch (status) {
        case RYDSQ_OK:
            return "ok";
        case RYDSQ_ERR_INVALID_ARGUMENT:
            return "invalid argument";
        case RYDSQ_ERR_NUMERICAL:
            return "numerical failure";
        case RYDSQ_ERR_IO:
            return "i/o failure";
        case RYDSQ_ERR_INTERNAL:
            return "internal error";
    }
    return "unknown status";
}

void rydsq_string_free(char *s) {
    std::free(s);
}

rydsq_status rydsq_geometry_create(const char *layout_json, rydsq_geometry **out) {
    return guarded([&] {
        require(out, "out");
        require(layout_json, "layout_json");
        *out = new rydsq_geometry{rydsq::build_subarrays(rydsq::layout_from_json(layout_json))};
    });
}

rydsq_status rydsq_geometry_size(const rydsq_geometry *g, size_t *n) {
    return guarded([&] {
        require(g, "geometry");
        require(n, "n");
        *n = g->g.size();
    });
}

rydsq_status rydsq_geometry_distance(const rydsq_geometry *g, size_t i, size_t j, double *meters) {
    return guarded([&] {
        require(g, "geometry");
        require(meters, "meters");
        if (i >= g->g.size() || j >= g->g.size()) {
            throw std::invalid_argument("site index out of range");
        }
        *meters = g->g.distance(i, j);
    });
}

void rydsq_geometry_free(rydsq_geometry *g) {
    delete g;
}

rydsq_status rydsq_weak_dressing_potential(
    double omega_r_mhz, double delta_mhz, double c6_ghz_um6, double *v0_hz, double *r_b_m) {
    return guarded([&] {
        require(v0_hz, "v0_hz");
        require(r_b_m, "r_b_m");
        auto p = rydsq::DressingParams::from_lab_units(omega_r_mhz, delta_mhz, c6_ghz_um6);
        p.validate();
        auto v = rydsq::weak_dressing_potential(p);
        *v0_hz = v.v0_hz;
        *r_b_m = v.r_b;
    });
}

rydsq_status rydsq_fit_potential(const char *csv_path, char **report_json) {
    return guarded([&] {
        require(csv_path, "csv_path");
        require(report_json, "report_json");
        auto data = rydsq::read_pair_oscillation_csv(csv_path);
        auto fit = rydsq::fit_soft_core(data);
        json j = json::parse(fit.to_json());
        j["n_points"] = data.points.size();
        *report_json = copy_string(j.dump(2));
    });
}

rydsq_status rydsq_weak_dressing_xi(
    const rydsq_geometry *g,
    double v0_hz,
    double r_b_m,
    double t_int,
    double *xi_w_sq,
    double *contrast,
    double *alpha_opt) {
    return guarded([&] {
        require(g, "geometry");
        require(xi_w_sq, "xi_w_sq");
        if (!(r_b_m > 0) || !(t_int >= 0)) {
            throw std::invalid_argument("r_b must be positive and t_int non-negative");
        }
        if (g->g.size() < 2) {
            throw std::invalid_argument("squeezing needs at least two atoms");
        }
        auto c = rydsq::couplings_from_potential(g->g, {v0_hz, r_b_m});
        auto w = rydsq::wineland(rydsq::interaction_phases(c, t_int));
        *xi_w_sq = w.xi_w_sq;
        if (contrast) {
            *contrast = w.contrast;
        }
        if (alpha_opt) {
            *alpha_opt = w.alpha_opt;
        }
    });
}

rydsq_status rydsq_scan_squeezing(const char *config_json, char **csv) {
    return guarded([&] {
        require(csv, "csv");
        json j = parse_config(
            config_json,
            {"method", "sizes", "potential", "dressing", "lattice_constant_nm", "spacing", "t_max_us", "t_steps",
             "t_int_us", "refine", "ramps", "jobs"});
        std::string method = get_or<std::string>(j, "method", "weak");
        if (method != "weak" && method != "ed") {
            throw std::invalid_argument("method must be weak or ed");
        }
        if (method == "ed" && j.contains("potential")) {
            throw std::invalid_argument("method ed needs a dressing section, not a potential");
        }
        rydsq::SoftCorePotential v;
        double a = get_or(j, "lattice_constant_nm", rydsq::kDefaultLatticeConstant * 1e9) * 1e-9;
        if (j.contains("potential")) {
            const auto &p = j["potential"];
            v.v0_hz = p.at("v0_hz").get<double>();
            v.r_b = p.at("rb_lat").get<double>() * a;
        } else {
            v = rydsq::weak_dressing_potential(dressing_from(j));
        }
        std::vector<std::pair<int, int>> sizes;
        if (j.contains("sizes")) {
            for (const auto &s : j["sizes"]) {
                sizes.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
            }
        } else {
            for (int k = 2; k <= 10; k++) {
                sizes.push_back({k, k});
            }
        }
        double t_max = get_or(j, "t_max_us", 5.0) * 1e-6;
        int steps = get_or(j, "t_steps", 250);
        if (!(t_max > 0) || steps < 2) {
            throw std::invalid_argument("t_max_us must be positive and t_steps >= 2");
        }
        std::vector<double> grid;
        for (int k = 1; k <= steps; k++) {
            grid.push_back(t_max * k / steps);
        }
        if (j.contains("t_int_us")) {
            grid.clear();
            for (const auto &t : j["t_int_us"]) {
                double v = t.get<double>() * 1e-6;
                if (!(v >= 0)) {
                    throw std::invalid_argument("t_int_us entries must be non-negative");
                }
                grid.push_back(v);
            }
            if (grid.empty()) {
                throw std::invalid_argument("t_int_us must not be empty");
            }
        }
        rydsq::ScanOptions o;
        o.lattice_constant = a;
        if (j.contains("spacing")) {
            if (j["spacing"].is_array()) {
                o.spacing_x = j["spacing"].at(0).get<int>();
                o.spacing_y = j["spacing"].at(1).get<int>();
            } else {
                o.spacing_x = o.spacing_y = j["spacing"].get<int>();
            }
        }
        o.refine = get_or(j, "refine", true);
        o.jobs = get_or(j, "jobs", 1);
        if (method == "ed") {
            auto p = dressing_from(j);
            rydsq::SequenceOptions so;
            so.ramps = get_or(j, "ramps", true);
            std::vector<rydsq::ScanRow> rows;
            for (const auto &[r, c] : sizes) {
                rydsq::SubarrayLayout layout;
                layout.rows = r;
                layout.cols = c;
                layout.spacing_x = o.spacing_x;
                layout.spacing_y = o.spacing_y;
                layout.lattice_constant = a;
                auto g = rydsq::build_subarrays(layout);
                rydsq::check_exact_size((int)g.size());
                rydsq::ExactEngine engine(g, p.c6);
                rydsq::ScanRow best;
                best.rows = r;
                best.cols = c;
                best.n = (int)g.size();
                best.xi_w_sq = INFINITY;
                for (double t : grid) {
                    auto obs = rydsq::run_sequence(engine, p, rydsq::PulseSequence::spin_echo(t), so);
                    if (obs.squeezing.xi_w_sq < best.xi_w_sq) {
                        best.t_opt = t;
                        best.alpha_opt = obs.squeezing.alpha_opt;
                        best.contrast = obs.squeezing.contrast;
                        best.var_ratio_min = obs.squeezing.var_ratio_min;
                        best.xi_w_sq = obs.squeezing.xi_w_sq;
                    }
                }
                rows.push_back(best);
            }
            *csv = copy_string(rydsq::scan_to_csv(rows));
            return;
        }
        *csv = copy_string(rydsq::scan_to_csv(rydsq::scan_xi_vs_n(sizes, v, grid, o)));
    });
}

rydsq_status rydsq_ed_evolve(const char *config_json, char **report_json) {
    return guarded([&] {
        require(report_json, "report_json");
        json j = parse_config(
            config_json,
            {"geometry", "dressing", "t_int_us", "ramps", "ramp_duration_ns", "ramp_step_ns", "alpha_points",
             "dump_state", "readout_alpha_deg"});
        auto g = geometry_from(j);
        auto p = dressing_from(j);
        std::vector<double> times;
        if (j.contains("t_int_us")) {
            if (j["t_int_us"].is_array()) {
                for (const auto &t : j["t_int_us"]) {
                    times.push_back(t.get<double>() * 1e-6);
                }
            } else {
                times.push_back(j["t_int_us"].get<double>() * 1e-6);
            }
        } else {
            times.push_back(1e-6);
        }
        rydsq::SequenceOptions o;
        o.ramps = get_or(j, "ramps", true);
        o.ramp.duration = get_or(j, "ramp_duration_ns", 225.0) * 1e-9;
        o.ramp.step = get_or(j, "ramp_step_ns", 6.5) * 1e-9;
        o.alpha_points = get_or(j, "alpha_points", 181);
        std::string dump = get_or<std::string>(j, "dump_state", "");
        rydsq::ExactEngine engine(g, p.c6);
        json out;
        out["n_atoms"] = g.size();
        out["geometry"] = json::parse(j.contains("geometry") ? j["geometry"].dump() : "{}");
        out["beta"] = p.beta();
        json rows = json::array();
        int best = -1;
        double best_xi = INFINITY;
        for (std::size_t k = 0; k < times.size(); k++) {
            auto obs = rydsq::run_sequence(engine, p, rydsq::PulseSequence::spin_echo(times[k]), o);
            json row = json::parse(obs.to_json());
            row.erase("var_ratio_vs_alpha_deg");
            row["t_int_us"] = times[k] * 1e6;
            if (j.contains("readout_alpha_deg")) {
                row["readout_distribution"] =
                    rydsq::readout_distribution(obs.final_state, j["readout_alpha_deg"].get<double>() * kPi / 180);
            }
            rows.push_back(row);
            if (obs.squeezing.xi_w_sq < best_xi) {
                best_xi = obs.squeezing.xi_w_sq;
                best = (int)k;
            }
            if (!dump.empty() && k + 1 == times.size()) {
                obs.final_state.dump(dump);
            }
        }
        out["points"] = rows;
        out["best_index"] = best;
        *report_json = copy_string(out.dump(2));
    });
}

rydsq_status rydsq_simulate_clock(const char *config_json, uint64_t seed, rydsq_record **out) {
    return guarded([&] {
        require(out, "out");
        json j = parse_config(
            config_json,
            {"mode", "n_atoms", "shots", "label", "contrast", "y_a", "y_b", "phi_deg", "sigma_theta", "t_dark_s",
             "cycle_time_s", "zeta0", "zeta1", "variance_gain_db", "servo_gain", "freq_offset_hz", "diff_freq_hz",
             "jobs"});
        std::string mode = get_or<std::string>(j, "mode", "stability");
        std::string label = get_or<std::string>(j, "label", "css");
        if (label != "css" && label != "sss") {
            throw std::invalid_argument("label must be css or sss");
        }
        int n = get_or(j, "n_atoms", 70);
        int shots = get_or(j, "shots", 1000);
        if (n < 1 || shots < 1) {
            throw std::invalid_argument("n_atoms and shots must be positive");
        }
        rydsq::EllipseModel model;
        model.n_atoms = n;
        model.zeta0 = get_or(j, "zeta0", 1.0);
        model.zeta1 = get_or(j, "zeta1", 1.0);
        if (j.contains("variance_gain_db") && !j["variance_gain_db"].is_null()) {
            double g = j["variance_gain_db"].get<double>();
            model.zeta0 = rydsq::zeta_for_variance_ratio(n, 0.5, std::pow(10.0, -g / 10));
        }
        bool squeezed = label == "sss";
        double t_dark = get_or(j, "t_dark_s", 54.5e-3);
        double cycle = get_or(j, "cycle_time_s", 1.4);
        int jobs = get_or(j, "jobs", 1);
        rydsq::MeasurementRecord rec;
        if (mode == "stability") {
            rydsq::StabilityRunParams p;
            p.n_atoms = n;
            p.n_shots = shots;
            p.t_dark = t_dark;
            p.cycle_time = cycle;
            p.contrast = get_or(j, "contrast", 1.0);
            p.y_a = get_or(j, "y_a", 0.5);
            p.y_b = get_or(j, "y_b", 0.5);
            p.sigma_theta = get_or(j, "sigma_theta", 0.0);
            p.freq_offset = get_or(j, "freq_offset_hz", 0.0);
            p.diff_freq = get_or(j, "diff_freq_hz", 0.0);
            p.servo_gain = get_or(j, "servo_gain", 0.0);
            p.servo = p.servo_gain > 0 ? rydsq::ServoMode::kIntegrator : rydsq::ServoMode::kOff;
            p.squeezed = squeezed;
            p.zeta0 = model.zeta0;
            p.zeta1 = model.zeta1;
            p.label = label;
            rec = rydsq::sample_stability_run(p, seed);
        } else if (mode == "quadrature" || mode == "ellipse") {
            rydsq::NoiseSpec noise;
            double sigma = get_or(j, "sigma_theta", 0.0);
            if (mode == "ellipse") {
                noise.laser_phase_mode = rydsq::LaserPhaseMode::kRandomUniform;
            } else {
                noise.laser_phase_mode = sigma > 0 ? rydsq::LaserPhaseMode::kWhite : rydsq::LaserPhaseMode::kFixed;
                noise.theta0 = kPi / 2;
            }
            noise.sigma_theta = sigma;
            noise.differential_phase = get_or(j, "phi_deg", 0.0) * kPi / 180;
            noise.contrast = get_or(j, "contrast", 1.0);
            noise.y_a = get_or(j, "y_a", 0.5);
            noise.y_b = get_or(j, "y_b", 0.5);
            rec = squeezed ? rydsq::sample_sss(n, noise, model, shots, seed, jobs)
                           : rydsq::sample_css(n, noise, shots, seed, jobs);
            rec.t_dark = t_dark;
            rec.cycle_time = cycle;
        } else {
            throw std::invalid_argument("mode must be quadrature, stability or ellipse");
        }
        *out = new rydsq_record{std::move(rec)};
    });
}

rydsq_status rydsq_record_read(const char *path, rydsq_record **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        std::ifstream f(path);
        if (!f) {
            throw IoError(std::string("cannot open ") + path);
        }
        *out = new rydsq_record{rydsq::read_record(path)};
    });
}

rydsq_status rydsq_record_parse(const char *csv_text, rydsq_record **out) {
    return guarded([&] {
        require(csv_text, "csv_text");
        require(out, "out");
        *out = new rydsq_record{rydsq::record_from_csv(csv_text)};
    });
}

rydsq_status rydsq_record_write(const rydsq_record *r, const char *path) {
    return guarded([&] {
        require(r, "record");
        require(path, "path");
        std::ofstream f(path);
        if (!f) {
            throw IoError(std::string("cannot write ") + path);
        }
        f << rydsq::record_to_csv(r->r);
        if (!f) {
            throw IoError(std::string("write failed for ") + path);
        }
    });
}

rydsq_status rydsq_record_to_csv(const rydsq_record *r, char **csv) {
    return guarded([&] {
        require(r, "record");
        require(csv, "csv");
        *csv = copy_string(rydsq::record_to_csv(r->r));
    });
}

rydsq_status rydsq_record_size(const rydsq_record *r, size_t *n_shots) {
    return guarded([&] {
        require(r, "record");
        require(n_shots, "n_shots");
        *n_shots = r->r.shots.size();
    });
}

rydsq_status rydsq_record_shot(const rydsq_record *r, size_t index, double *p_a, double *p_b) {
    return guarded([&] {
        require(r, "record");
        require(p_a, "p_a");
        require(p_b, "p_b");
        if (index >= r->r.shots.size()) {
            throw std::invalid_argument("shot index out of range");
        }
        *p_a = r->r.shots[index].p_a;
        *p_b = r->r.shots[index].p_b;
    });
}

void rydsq_record_free(rydsq_record *r) {
    delete r;
}

rydsq_status rydsq_overlapping_adev(
    const double *y,
    size_t n,
    double sample_interval,
    rydsq_adev_axis axis,
    size_t *n_points,
    double *tau,
    double *adev,
    double *err) {
    return guarded([&] {
        require(y, "y");
        require(n_points, "n_points");
        require(tau, "tau");
        require(adev, "adev");
        auto curve = rydsq::overlapping_adev(
            std::vector<double>(y, y + n), sample_interval,
            axis == RYDSQ_AXIS_COUNT ? rydsq::AdevAxis::kCount : rydsq::AdevAxis::kTime);
        *n_points = curve.points.size();
        for (std::size_t k = 0; k < curve.points.size(); k++) {
            tau[k] = curve.points[k].tau;
            adev[k] = curve.points[k].adev;
            if (err) {
                err[k] = curve.points[k].err;
            }
        }
    });
}

rydsq_status rydsq_allan(const rydsq_record *r, const char *config_json, char **curve_csv, char **fit_json) {
    return guarded([&] {
        require(r, "record");
        require(curve_csv, "curve_csv");
        json j = parse_config(config_json, {"axis", "contrast", "spacing", "slope_sigmas"});
        std::string axis = get_or<std::string>(j, "axis", "time");
        std::string spacing = get_or<std::string>(j, "spacing", "octave");
        if (spacing != "octave" && spacing != "all") {
            throw std::invalid_argument("spacing must be octave or all");
        }
        auto sp = spacing == "all" ? rydsq::AdevSpacing::kAll : rydsq::AdevSpacing::kOctave;
        auto dz = rydsq::dz_from_record(r->r);
        rydsq::AllanCurve curve;
        json extra;
        if (axis == "time") {
            double c = get_or(j, "contrast", 1.0);
            auto s = rydsq::freq_series(dz, c, r->r.t_dark, r->r.cycle_time);
            curve = rydsq::overlapping_adev(s.values, s.sample_interval, rydsq::AdevAxis::kTime, sp);
            extra["series"] = "omega_rad_per_s";
        } else if (axis == "count") {
            curve = rydsq::overlapping_adev(dz, r->r.cycle_time, rydsq::AdevAxis::kCount, sp);
            extra["series"] = "d_z";
        } else {
            throw std::invalid_argument("axis must be time or count");
        }
        *curve_csv = copy_string(curve.to_csv());
        if (fit_json) {
            json f = json::parse(rydsq::fit_white_noise(curve, get_or(j, "slope_sigmas", 3.0)).to_json());
            f["series"] = extra["series"];
            f["axis"] = axis;
            f["n_samples"] = curve.n_samples;
            f["tau0_s"] = curve.tau0;
            *fit_json = copy_string(f.dump(2));
        }
    });
}

rydsq_status rydsq_ellipse_fit(
    const rydsq_record *cal,
    const rydsq_record *meas,
    const char *config_json,
    uint64_t seed,
    char **report_json,
    char **adev_csv) {
    return guarded([&] {
        require(cal, "cal");
        require(meas, "meas");
        require(report_json, "report_json");
        json j = parse_config(config_json, {"model", "n_bootstrap", "jobs", "nodes"});
        std::string model = get_or<std::string>(j, "model", "css");
        if (model != "css" && model != "sss") {
            throw std::invalid_argument("model must be css or sss");
        }
        rydsq::PipelineOptions o;
        o.squeezed_model = model == "sss";
        o.n_bootstrap = get_or(j, "n_bootstrap", 50);
        o.jobs = get_or(j, "jobs", 1);
        o.nodes = get_or(j, "nodes", rydsq::kDefaultThetaNodes);
        if (o.n_bootstrap < 0 || o.nodes < 8) {
            throw std::invalid_argument("n_bootstrap must be >= 0 and nodes >= 8");
        }
        auto res = rydsq::calibrated_pipeline(cal->r, meas->r, o, seed);
        json out = json::parse(res.to_json());
        out["model"] = model;
        *report_json = copy_string(out.dump(2));
        if (adev_csv) {
            *adev_csv = copy_string(res.adev.to_csv());
        }
    });
}

rydsq_status rydsq_fisher(const char *config_json, char **report_json) {
    return guarded([&] {
        require(report_json, "report_json");
        json j = parse_config(config_json, {"n_atoms", "contrast", "y0", "zeta0", "zeta1", "phi_deg", "h", "nodes"});
        rydsq::EllipseModel m;
        m.n_atoms = get_or(j, "n_atoms", 70);
        m.contrast = get_or(j, "contrast", 0.95);
        m.y0 = get_or(j, "y0", 0.5);
        m.zeta0 = get_or(j, "zeta0", 1.0);
        m.zeta1 = get_or(j, "zeta1", 1.0);
        m.validate();
        std::vector<double> phis{0, 30};
        if (j.contains("phi_deg")) {
            phis = j["phi_deg"].is_array() ? j["phi_deg"].get<std::vector<double>>()
                                           : std::vector<double>{j["phi_deg"].get<double>()};
        }
        double h = get_or(j, "h", 1e-4);
        int nodes = get_or(j, "nodes", rydsq::kDefaultThetaNodes);
        json rows = json::array();
        for (double phi : phis) {
            auto f = rydsq::fisher_information(m, phi * kPi / 180, h, nodes);
            rows.push_back({{"phi_deg", phi},
                            {"information", f.information},
                            {"richardson", f.richardson},
                            {"richardson_rel", f.richardson_rel},
                            {"cramer_rao_single_shot_rad", f.information > 0 ? 1 / std::sqrt(f.information) : INFINITY}});
        }
        json out;
        out["model"] = {{"n_atoms", m.n_atoms}, {"contrast", m.contrast}, {"y0", m.y0}, {"zeta0", m.zeta0},
                        {"zeta1", m.zeta1}};
        out["rows"] = rows;
        *report_json = copy_string(out.dump(2));
    });
}

rydsq_status rydsq_zeta_for_variance_ratio(int n_atoms, double p, double ratio, double *zeta) {
    return guarded([&] {
        require(zeta, "zeta");
        *zeta = rydsq::zeta_for_variance_ratio(n_atoms, p, ratio);
    });
}

}  // extern "C"
