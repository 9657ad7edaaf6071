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

// rydsq command-line driver. Every command reads an optional JSON config,
// applies flag overrides, writes its outputs into the output directory and
// records a manifest (config, config hash, seed, inputs, output hashes) that
// `rydsq replay` re-executes and compares byte for byte.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rydsq/rydsq.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

// A failed library call, carrying the process exit code.
struct CommandError : std::runtime_error {
    int code;
    CommandError(int c, const std::string &msg) : std::runtime_error(msg), code(c) {}
};

int exit_code_for(rydsq_status s) {
    switch (s) {
        case RYDSQ_OK:
            return kExitOk;
        case RYDSQ_ERR_INVALID_ARGUMENT:
        case RYDSQ_ERR_IO:
            return kExitUsage;
        case RYDSQ_ERR_NUMERICAL:
            return kExitNumerical;
        default:
            return kExitInternal;
    }
}

void check(rydsq_status s) {
    if (s != RYDSQ_OK) {
        throw CommandError(exit_code_for(s), std::string(rydsq_status_name(s)) + ": " + rydsq_last_error());
    }
}

std::string take(char *s) {
    std::string out = s ? s : "";
    rydsq_string_free(s);
    return out;
}

struct Record {
    rydsq_record *r = nullptr;
    Record() = default;
    Record(const Record &) = delete;
    Record &operator=(const Record &) = delete;
    ~Record() {
        rydsq_record_free(r);
    }
};

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw CommandError(kExitUsage, "cannot open " + path);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
        throw CommandError(kExitUsage, "cannot write " + path.string());
    }
}

// Everything a command needs to run; exactly what the manifest stores.
struct Invocation {
    std::string command;
    json config = json::object();
    std::uint64_t seed = 0;
    bool stochastic = false;
    std::map<std::string, std::string> inputs;  // role -> path
};

using Outputs = std::map<std::string, std::string>;  // file name -> content
using Runner = std::function<Outputs(const Invocation &)>;

std::string input_text(const Invocation &inv, const std::string &role) {
    auto it = inv.inputs.find(role);
    if (it == inv.inputs.end()) {
        throw CommandError(kExitUsage, "missing input '" + role + "'");
    }
    return read_file(it->second);
}

void load_record(const Invocation &inv, const std::string &role, Record &rec) {
    check(rydsq_record_parse(input_text(inv, role).c_str(), &rec.r));
}

json subset(const json &config, std::initializer_list<const char *> keys) {
    json out = json::object();
    for (const char *k : keys) {
        if (config.contains(k)) {
            out[k] = config[k];
        }
    }
    return out;
}

Outputs run_fit_potential(const Invocation &inv) {
    auto it = inv.inputs.find("data");
    if (it == inv.inputs.end()) {
        throw CommandError(kExitUsage, "fit-potential needs --in");
    }
    char *report = nullptr;
    check(rydsq_fit_potential(it->second.c_str(), &report));
    return {{"fit_potential.json", take(report) + "\n"}};
}

Outputs run_scan_squeezing(const Invocation &inv) {
    char *csv = nullptr;
    check(rydsq_scan_squeezing(inv.config.dump().c_str(), &csv));
    return {{"scan_squeezing.csv", take(csv)}};
}

Outputs run_ed_evolve(const Invocation &inv) {
    char *report = nullptr;
    check(rydsq_ed_evolve(inv.config.dump().c_str(), &report));
    return {{"ed_evolve.json", take(report) + "\n"}};
}

Outputs run_simulate_clock(const Invocation &inv) {
    json sim = inv.config;
    json allan_cfg = json::object();
    if (sim.contains("allan")) {
        allan_cfg = sim["allan"];
        sim.erase("allan");
    }
    if (!allan_cfg.contains("contrast") && sim.contains("contrast")) {
        allan_cfg["contrast"] = sim["contrast"];
    }
    Record rec;
    check(rydsq_simulate_clock(sim.dump().c_str(), inv.seed, &rec.r));
    char *csv = nullptr;
    check(rydsq_record_to_csv(rec.r, &csv));
    Outputs out{{"record.csv", take(csv)}};
    std::string mode = sim.value("mode", "stability");
    if (mode != "ellipse") {
        char *curve = nullptr;
        char *fit = nullptr;
        check(rydsq_allan(rec.r, allan_cfg.dump().c_str(), &curve, &fit));
        out["allan.csv"] = take(curve);
        out["allan_fit.json"] = take(fit) + "\n";
    }
    return out;
}

Outputs run_allan(const Invocation &inv) {
    Record rec;
    load_record(inv, "record", rec);
    char *curve = nullptr;
    char *fit = nullptr;
    check(rydsq_allan(rec.r, inv.config.dump().c_str(), &curve, &fit));
    return {{"allan.csv", take(curve)}, {"allan_fit.json", take(fit) + "\n"}};
}

json pipeline(const Invocation &inv, const std::string &cal, const std::string &meas, const json &cfg, std::string *adev) {
    Record c;
    Record m;
    load_record(inv, cal, c);
    load_record(inv, meas, m);
    char *report = nullptr;
    char *curve = nullptr;
    check(rydsq_ellipse_fit(c.r, m.r, cfg.dump().c_str(), inv.seed, &report, adev ? &curve : nullptr));
    if (adev) {
        *adev = take(curve);
    }
    return json::parse(take(report));
}

Outputs run_ellipse_fit(const Invocation &inv) {
    std::string adev;
    json report = pipeline(inv, "cal", "meas", inv.config, &adev);
    if (inv.inputs.count("ref_cal") && inv.inputs.count("ref_meas")) {
        json ref_cfg = inv.config;
        ref_cfg["model"] = "css";
        json ref = pipeline(inv, "ref_cal", "ref_meas", ref_cfg, nullptr);
        double a_ref = ref.at("adev_amplitude").get<double>();
        double a = report.at("adev_amplitude").get<double>();
        report["reference"] = ref;
        report["ratio_db"] = 20 * std::log10(a_ref / a);
    }
    return {{"ellipse_fit.json", report.dump(2) + "\n"}, {"ellipse_adev.csv", adev}};
}

Outputs run_fisher(const Invocation &inv) {
    char *report = nullptr;
    check(rydsq_fisher(inv.config.dump().c_str(), &report));
    return {{"fisher.json", take(report) + "\n"}};
}

const std::map<std::string, Runner> &runners() {
    static const std::map<std::string, Runner> r{
        {"fit-potential", run_fit_potential}, {"scan-squeezing", run_scan_squeezing},
        {"ed-evolve", run_ed_evolve},         {"simulate-clock", run_simulate_clock},
        {"allan", run_allan},                 {"ellipse-fit", run_ellipse_fit},
        {"fisher", run_fisher},
    };
    return r;
}

json make_manifest(const Invocation &inv, const Outputs &outputs) {
    json m;
    m["command"] = inv.command;
    m["version"] = rydsq_version();
    m["config"] = inv.config;
    m["config_hash"] = hex(fnv1a(inv.config.dump()));
    if (inv.stochastic) {
        m["seed"] = inv.seed;
    }
    json inputs = json::object();
    for (const auto &[role, path] : inv.inputs) {
        inputs[role] = {{"path", fs::absolute(path).string()}, {"hash", hex(fnv1a(read_file(path)))}};
    }
    m["inputs"] = inputs;
    json outs = json::object();
    for (const auto &[name, text] : outputs) {
        outs[name] = hex(fnv1a(text));
    }
    m["outputs"] = outs;
    return m;
}

fs::path default_out_dir() {
    const char *env = std::getenv("RYDSQ_OUTPUT_DIR");
    return (env && *env) ? fs::path(env) : fs::path(".");
}

int execute(const Invocation &inv, const fs::path &out_dir) {
    Outputs outputs = runners().at(inv.command)(inv);
    fs::create_directories(out_dir);
    json manifest = make_manifest(inv, outputs);
    for (const auto &[name, text] : outputs) {
        write_file(out_dir / name, text);
    }
    std::string manifest_name = inv.command + ".manifest.json";
    write_file(out_dir / manifest_name, manifest.dump(2) + "\n");
    for (const auto &[name, text] : outputs) {
        std::cout << (out_dir / name).string() << "\n";
    }
    std::cout << (out_dir / manifest_name).string() << "\n";
    return kExitOk;
}

int replay(const std::string &manifest_path, const std::string &out_dir) {
    json m = json::parse(read_file(manifest_path), nullptr, false);
    if (m.is_discarded() || !m.is_object() || !m.contains("command") || !m.contains("config")) {
        throw CommandError(kExitUsage, "not a manifest: " + manifest_path);
    }
    Invocation inv;
    inv.command = m["command"].get<std::string>();
    if (!runners().count(inv.command)) {
        throw CommandError(kExitUsage, "manifest names unknown command " + inv.command);
    }
    inv.config = m["config"];
    if (m.contains("seed")) {
        inv.stochastic = true;
        inv.seed = m["seed"].get<std::uint64_t>();
    }
    if (hex(fnv1a(inv.config.dump())) != m.value("config_hash", "")) {
        throw CommandError(kExitUsage, "config hash mismatch in " + manifest_path);
    }
    for (const auto &[role, entry] : m["inputs"].items()) {
        std::string path = entry.at("path").get<std::string>();
        if (hex(fnv1a(read_file(path))) != entry.at("hash").get<std::string>()) {
            throw CommandError(kExitUsage, "input '" + role + "' changed since the manifest was written: " + path);
        }
        inv.inputs[role] = path;
    }
    Outputs outputs = runners().at(inv.command)(inv);
    int mismatches = 0;
    for (const auto &[name, hash] : m["outputs"].items()) {
        auto it = outputs.find(name);
        std::string got = it == outputs.end() ? std::string("missing") : hex(fnv1a(it->second));
        bool same = got == hash.get<std::string>();
        mismatches += !same;
        std::cout << (same ? "identical " : "DIFFERENT ") << name << " " << got << "\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        for (const auto &[name, text] : outputs) {
            write_file(fs::path(out_dir) / name, text);
        }
    }
    if (mismatches) {
        throw CommandError(kExitNumerical, std::to_string(mismatches) + " output(s) differ from the manifest");
    }
    return kExitOk;
}

// Parses `key=value` where value is JSON if it parses, else a string.
// Dotted keys address nested objects.
void apply_override(json &config, const std::string &assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw CommandError(kExitUsage, "--set expects key=value, got '" + assignment + "'");
    }
    std::string key = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    json *node = &config;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
        node = &(*node)[key.substr(start, dot - start)];
        if (!node->is_object()) {
            *node = json::object();
        }
    }
    (*node)[key.substr(start)] = value;
}

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"rydsq: Rydberg-dressed spin squeezing simulation and clock analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rydsq_version()));

    CommonFlags flags;
    std::map<std::string, std::string> paths;
    std::string model;
    std::string axis;
    std::string manifest_path;

    struct Spec {
        const char *name;
        const char *help;
        bool config;
        bool jobs;
        bool stochastic;
    };
    const Spec specs[] = {
        {"fit-potential", "Fit the soft-core potential to pair-oscillation data", false, false, false},
        {"scan-squeezing", "Optimal squeezing versus array size (weak dressing or exact)", true, true, false},
        {"ed-evolve", "Exact spin-echo evolution of a small array", true, false, false},
        {"simulate-clock", "Synthetic clock-comparison record and its Allan deviation", true, true, true},
        {"allan", "Differential Allan deviation of a record", true, false, false},
        {"ellipse-fit", "Calibrated maximum-likelihood ellipse fit", true, true, true},
        {"fisher", "Fisher information of the differential phase", true, false, false},
    };
    std::map<std::string, CLI::App *> subs;
    for (const auto &s : specs) {
        auto *sub = app.add_subcommand(s.name, s.help);
        subs[s.name] = sub;
        sub->add_option("--out", flags.out_dir, "Output directory (default: $RYDSQ_OUTPUT_DIR or .)");
        if (s.config) {
            sub->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
            sub->add_option("--set", flags.overrides, "Override a config key: key=value (JSON value)");
        }
        if (s.jobs) {
            sub->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
        }
        if (s.stochastic) {
            sub->add_option("--seed", flags.seed, "Random seed")->required();
        }
    }
    subs["fit-potential"]->add_option("--in", paths["data"], "Pair-oscillation CSV (r_lat,freq_hz,err_hz)")->required();
    subs["allan"]->add_option("--in", paths["record"], "Record CSV")->required();
    subs["allan"]->add_option("--axis", axis, "time or count");
    auto *ef = subs["ellipse-fit"];
    ef->add_option("--cal", paths["cal"], "Calibration record CSV")->required();
    ef->add_option("--meas", paths["meas"], "Measurement record CSV")->required();
    ef->add_option("--model", model, "css or sss");
    ef->add_option("--ref-cal", paths["ref_cal"], "CSS reference calibration record for ratio_db");
    ef->add_option("--ref-meas", paths["ref_meas"], "CSS reference measurement record for ratio_db");

    auto *rp = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
    rp->add_option("--manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
    rp->add_option("--out", flags.out_dir, "Also write the regenerated outputs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (rp->parsed()) {
            return replay(manifest_path, flags.out_dir);
        }
        Invocation inv;
        for (const auto &s : specs) {
            if (subs[s.name]->parsed()) {
                inv.command = s.name;
                inv.stochastic = s.stochastic;
                if (s.config && !flags.config_path.empty()) {
                    inv.config = json::parse(read_file(flags.config_path), nullptr, false);
                    if (inv.config.is_discarded() || !inv.config.is_object()) {
                        throw CommandError(kExitUsage, "config must be a JSON object: " + flags.config_path);
                    }
                }
                if (s.jobs && flags.jobs > 0) {
                    inv.config["jobs"] = flags.jobs;
                }
            }
        }
        for (const auto &o : flags.overrides) {
            apply_override(inv.config, o);
        }
        if (!model.empty()) {
            inv.config["model"] = model;
        }
        if (!axis.empty()) {
            inv.config["axis"] = axis;
        }
        inv.seed = flags.seed;
        for (const auto &[role, path] : paths) {
            if (!path.empty()) {
                inv.inputs[role] = path;
            }
        }
        if (inv.inputs.count("ref_cal") != inv.inputs.count("ref_meas")) {
            throw CommandError(kExitUsage, "--ref-cal and --ref-meas must be given together");
        }
        for (const auto &[role, path] : inv.inputs) {
            if (!fs::is_regular_file(path)) {
                throw CommandError(kExitUsage, "input file not found: " + path);
            }
        }
        fs::path out = flags.out_dir.empty() ? default_out_dir() : fs::path(flags.out_dir);
        return execute(inv, out);
    } catch (const CommandError &e) {
        std::cerr << "rydsq: " << e.what() << "\n";
        return e.code;
    } catch (const json::exception &e) {
        std::cerr << "rydsq: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "rydsq: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
