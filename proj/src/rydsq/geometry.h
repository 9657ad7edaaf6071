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

#ifndef RYDSQ_GEOMETRY_H
#define RYDSQ_GEOMETRY_H

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rydsq {

/// Default optical-lattice constant in meters.
constexpr double kDefaultLatticeConstant = 575e-9;

/// Subarrays closer than this (in lattice units) are not treated as independent.
constexpr int kMinIndependentGap = 12;

struct LatticeSite {
    int ix = 0;
    int iy = 0;
    bool operator==(const LatticeSite &other) const = default;
};

struct SitePair {
    std::size_t i;
    std::size_t j;
    double distance;  // meters
};

/// Parameters of a rectangular multi-subarray layout.
///
/// Each subarray is `rows` x `cols` atoms; columns run along x with pitch
/// `spacing_x`, rows along y with pitch `spacing_y`. Subarrays are tiled along
/// x and separated by `gap` empty lattice units between their closest columns.
struct SubarrayLayout {
    int rows = 1;
    int cols = 1;
    int spacing_x = 2;
    int spacing_y = 2;
    int n_subarrays = 1;
    int gap = kMinIndependentGap;
    double lattice_constant = kDefaultLatticeConstant;
    bool allow_small_gap = false;
};

/// Atom positions on a 2D square lattice, each tagged with a subarray label.
///
/// Immutable once constructed.
class ArrayGeometry {
   public:
    ArrayGeometry(double lattice_constant, std::vector<LatticeSite> sites, std::vector<int> labels);

    double lattice_constant() const {
        return lattice_constant_;
    }
    std::size_t size() const {
        return sites_.size();
    }
    const std::vector<LatticeSite> &sites() const {
        return sites_;
    }
    const std::vector<int> &labels() const {
        return labels_;
    }
    int num_subarrays() const;

    /// Euclidean distance between sites i and j in meters.
    double distance(std::size_t i, std::size_t j) const;
    /// Same, in lattice units.
    double distance_lattice(std::size_t i, std::size_t j) const;

    /// Indices of the sites carrying `label`, in site order.
    std::vector<std::size_t> subarray_indices(int label) const;
    /// New geometry holding only the sites of one subarray (relabelled 0).
    ArrayGeometry subarray(int label) const;

    /// Largest pairwise distance in meters (0 for a single site).
    double diameter() const;

    /// Translated copy; used by invariance checks.
    ArrayGeometry translated(int dx, int dy) const;

   private:
    double lattice_constant_;
    std::vector<LatticeSite> sites_;
    std::vector<int> labels_;
};

ArrayGeometry build_subarrays(const SubarrayLayout &layout);

/// All unordered pairs (i < j) with their distances.
std::vector<SitePair> pair_distances(const ArrayGeometry &geometry);

/// Structured-text (JSON) round trip of the layout keys
/// lattice_constant_nm, rows, cols, spacing, n_subarrays, gap.
/// `spacing` may be a single integer or an [x, y] pair.
SubarrayLayout layout_from_json(const std::string &text);
std::string layout_to_json(const SubarrayLayout &layout);

/// Single-letter label used in outputs ("A", "B", ...).
std::string subarray_name(int label);

}  // namespace rydsq

#endif
