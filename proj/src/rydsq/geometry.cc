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

#include "rydsq/geometry.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace rydsq {

ArrayGeometry::ArrayGeometry(double lattice_constant, std::vector<LatticeSite> sites, std::vector<int> labels)
    : lattice_constant_(lattice_constant), sites_(std::move(sites)), labels_(std::move(labels)) {
    if (!(lattice_constant_ > 0) || !std::isfinite(lattice_constant_)) {
        throw std::invalid_argument("lattice_constant must be positive and finite");
    }
    if (sites_.size() != labels_.size()) {
        throw std::invalid_argument("every site needs exactly one subarray label");
    }
    std::set<std::pair<int, int>> seen;
    for (const auto &s : sites_) {
        if (!seen.insert({s.ix, s.iy}).second) {
            throw std::invalid_argument(
                "duplicate lattice site (" + std::to_string(s.ix) + ", " + std::to_string(s.iy) + ")");
        }
    }
    for (int label : labels_) {
        if (label < 0) {
            throw std::invalid_argument("subarray labels must be non-negative");
        }
    }
}

int ArrayGeometry::num_subarrays() const {
    std::set<int> distinct(labels_.begin(), labels_.end());
    return (int)distinct.size();
}

double ArrayGeometry::distance_lattice(std::size_t i, std::size_t j) const {
    double dx = sites_[i].ix - sites_[j].ix;
    double dy = sites_[i].iy - sites_[j].iy;
    return std::hypot(dx, dy);
}

double ArrayGeometry::distance(std::size_t i, std::size_t j) const {
    return distance_lattice(i, j) * lattice_constant_;
}

std::vector<std::size_t> ArrayGeometry::subarray_indices(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < labels_.size(); k++) {
        if (labels_[k] == label) {
            out.push_back(k);
        }
    }
    return out;
}

ArrayGeometry ArrayGeometry::subarray(int label) const {
    std::vector<LatticeSite> sites;
    for (std::size_t k : subarray_indices(label)) {
        sites.push_back(sites_[k]);
    }
    if (sites.empty()) {
        throw std::invalid_argument("no subarray with label " + std::to_string(label));
    }
    std::vector<int> labels(sites.size(), 0);
    return ArrayGeometry(lattice_constant_, std::move(sites), std::move(labels));
}

double ArrayGeometry::diameter() const {
    double best = 0;
    for (std::size_t i = 0; i < sites_.size(); i++) {
        for (std::size_t j = i + 1; j < sites_.size(); j++) {
            best = std::max(best, distance(i, j));
        }
    }
    return best;
}

ArrayGeometry ArrayGeometry::translated(int dx, int dy) const {
    std::vector<LatticeSite> moved = sites_;
    for (auto &s : moved) {
        s.ix += dx;
        s.iy += dy;
    }
    return ArrayGeometry(lattice_constant_, std::move(moved), labels_);
}

ArrayGeometry build_subarrays(const SubarrayLayout &layout) {
    if (layout.rows < 1 || layout.cols < 1 || layout.n_subarrays < 1) {
        throw std::invalid_argument("rows, cols and n_subarrays must be at least 1");
    }
    if (layout.spacing_x < 1 || layout.spacing_y < 1) {
        throw std::invalid_argument("spacing must be at least one lattice unit");
    }
    if (layout.gap < 1) {
        throw std::invalid_argument("gap must be at least one lattice unit");
    }
    if (layout.gap < kMinIndependentGap && !layout.allow_small_gap && layout.n_subarrays > 1) {
        throw std::invalid_argument(
            "gap of " + std::to_string(layout.gap) + " lattice units is below the independence threshold of " +
            std::to_string(kMinIndependentGap) + " (set allow_small_gap to override)");
    }

    int width = (layout.cols - 1) * layout.spacing_x;
    std::vector<LatticeSite> sites;
    std::vector<int> labels;
    sites.reserve((std::size_t)layout.rows * layout.cols * layout.n_subarrays);
    for (int s = 0; s < layout.n_subarrays; s++) {
        int x0 = s * (width + layout.gap);
        for (int r = 0; r < layout.rows; r++) {
            for (int c = 0; c < layout.cols; c++) {
                sites.push_back({x0 + c * layout.spacing_x, r * layout.spacing_y});
                labels.push_back(s);
            }
        }
    }
    return ArrayGeometry(layout.lattice_constant, std::move(sites), std::move(labels));
}

std::vector<SitePair> pair_distances(const ArrayGeometry &geometry) {
    std::vector<SitePair> out;
    std::size_t n = geometry.size();
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            out.push_back({i, j, geometry.distance(i, j)});
        }
    }
    return out;
}

SubarrayLayout layout_from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw std::invalid_argument(std::string("geometry config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("geometry config must be a JSON object");
    }
    SubarrayLayout layout;
    auto read_int = [&](const char *key, int &dst) {
        if (!j.contains(key)) {
            return;
        }
        if (!j[key].is_number_integer()) {
            throw std::invalid_argument(std::string("geometry.") + key + " must be an integer");
        }
        dst = j[key].get<int>();
    };
    read_int("rows", layout.rows);
    read_int("cols", layout.cols);
    read_int("n_subarrays", layout.n_subarrays);
    read_int("gap", layout.gap);
    if (j.contains("lattice_constant_nm")) {
        if (!j["lattice_constant_nm"].is_number()) {
            throw std::invalid_argument("geometry.lattice_constant_nm must be a number");
        }
        layout.lattice_constant = j["lattice_constant_nm"].get<double>() * 1e-9;
    }
    if (j.contains("spacing")) {
        const auto &sp = j["spacing"];
        if (sp.is_number_integer()) {
            layout.spacing_x = layout.spacing_y = sp.get<int>();
        } else if (sp.is_array() && sp.size() == 2 && sp[0].is_number_integer() && sp[1].is_number_integer()) {
            layout.spacing_x = sp[0].get<int>();
            layout.spacing_y = sp[1].get<int>();
        } else {
            throw std::invalid_argument("geometry.spacing must be an integer or [x, y] integer pair");
        }
    }
    if (j.contains("allow_small_gap")) {
        if (!j["allow_small_gap"].is_boolean()) {
            throw std::invalid_argument("geometry.allow_small_gap must be a boolean");
        }
        layout.allow_small_gap = j["allow_small_gap"].get<bool>();
    }
    return layout;
}

std::string layout_to_json(const SubarrayLayout &layout) {
    nlohmann::json j;
    j["lattice_constant_nm"] = layout.lattice_constant * 1e9;
    j["rows"] = layout.rows;
    j["cols"] = layout.cols;
    if (layout.spacing_x == layout.spacing_y) {
        j["spacing"] = layout.spacing_x;
    } else {
        j["spacing"] = {layout.spacing_x, layout.spacing_y};
    }
    j["n_subarrays"] = layout.n_subarrays;
    j["gap"] = layout.gap;
    if (layout.allow_small_gap) {
        j["allow_small_gap"] = true;
    }
    return j.dump();
}

std::string subarray_name(int label) {
    if (label >= 0 && label < 26) {
        return std::string(1, (char)('A' + label));
    }
    return "S" + std::to_string(label);
}

}  // namespace rydsq
