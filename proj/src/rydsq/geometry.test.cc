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

#include <cmath>
#include <random>
#include <set>

#include "gtest/gtest.h"

using namespace rydsq;

namespace {

SubarrayLayout layout(int rows, int cols, int sx, int sy, int n_sub, int gap) {
    SubarrayLayout l;
    l.rows = rows;
    l.cols = cols;
    l.spacing_x = sx;
    l.spacing_y = sy;
    l.n_subarrays = n_sub;
    l.gap = gap;
    return l;
}

}  // namespace

TEST(geometry, four_square_subarrays) {
    auto g = build_subarrays(layout(4, 4, 2, 2, 4, 12));
    ASSERT_EQ(g.size(), 64u);
    ASSERT_EQ(g.num_subarrays(), 4);
    for (int s = 0; s < 4; s++) {
        ASSERT_EQ(g.subarray_indices(s).size(), 16u);
    }
}

TEST(geometry, single_site) {
    auto g = build_subarrays(layout(1, 1, 1, 1, 1, 12));
    ASSERT_EQ(g.size(), 1u);
    ASSERT_TRUE(pair_distances(g).empty());
    ASSERT_EQ(g.diameter(), 0.0);
}

TEST(geometry, rectangular_spacing_nearest_neighbors) {
    auto g = build_subarrays(layout(5, 14, 3, 2, 2, 12));
    ASSERT_EQ(g.size(), 140u);
    auto sub = g.subarray(0);
    std::set<double> nn;
    for (std::size_t i = 0; i < sub.size(); i++) {
        double best = 1e300;
        for (std::size_t j = 0; j < sub.size(); j++) {
            if (i != j) {
                best = std::min(best, sub.distance_lattice(i, j));
            }
        }
        nn.insert(best);
    }
    ASSERT_EQ(nn, (std::set<double>{2.0}));
    // Along x alone the pitch is 3.
    ASSERT_DOUBLE_EQ(sub.distance_lattice(0, 1), 3.0);
    ASSERT_DOUBLE_EQ(sub.distance_lattice(0, 14), 2.0);
}

TEST(geometry, rejects_bad_dimensions) {
    ASSERT_THROW(build_subarrays(layout(0, 4, 2, 2, 1, 12)), std::invalid_argument);
    ASSERT_THROW(build_subarrays(layout(4, -1, 2, 2, 1, 12)), std::invalid_argument);
    ASSERT_THROW(build_subarrays(layout(4, 4, 0, 2, 1, 12)), std::invalid_argument);
    ASSERT_THROW(build_subarrays(layout(4, 4, 2, 2, 0, 12)), std::invalid_argument);
    ASSERT_THROW(build_subarrays(layout(4, 4, 2, 2, 2, 5)), std::invalid_argument);
    auto small = layout(4, 4, 2, 2, 2, 5);
    small.allow_small_gap = true;
    ASSERT_NO_THROW(build_subarrays(small));
}

TEST(geometry, rejects_duplicate_sites) {
    ASSERT_THROW(ArrayGeometry(575e-9, {{0, 0}, {0, 0}}, {0, 0}), std::invalid_argument);
    ASSERT_THROW(ArrayGeometry(575e-9, {{0, 0}}, {0, 1}), std::invalid_argument);
    ASSERT_THROW(ArrayGeometry(0.0, {{0, 0}}, {0}), std::invalid_argument);
}

TEST(geometry, pair_distance_arithmetic) {
    ArrayGeometry two(575e-9, {{0, 0}, {2, 0}}, {0, 0});
    auto pairs = pair_distances(two);
    ASSERT_EQ(pairs.size(), 1u);
    ASSERT_NEAR(pairs[0].distance, 1.15e-6, 1e-18);

    ArrayGeometry tri(575e-9, {{0, 0}, {3, 4}}, {0, 0});
    ASSERT_DOUBLE_EQ(tri.distance_lattice(0, 1), 5.0);

    auto block = build_subarrays(layout(4, 4, 2, 2, 1, 12));
    ASSERT_EQ(pair_distances(block).size(), 120u);
}

TEST(geometry, distance_map_properties) {
    auto g = build_subarrays(layout(3, 4, 2, 3, 3, 13));
    auto moved = g.translated(17, -5);
    for (std::size_t i = 0; i < g.size(); i++) {
        for (std::size_t j = 0; j < g.size(); j++) {
            ASSERT_EQ(g.distance(i, j), g.distance(j, i));
            ASSERT_EQ(g.distance(i, j), moved.distance(i, j));
            if (i != j) {
                ASSERT_GT(g.distance(i, j), 0);
            }
            if (g.labels()[i] != g.labels()[j]) {
                ASSERT_GE(g.distance_lattice(i, j), 13.0);
            }
        }
    }
}

TEST(geometry, inter_subarray_gap_random_layouts) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; trial++) {
        auto l = layout(1 + rng() % 4, 1 + rng() % 5, 1 + rng() % 3, 1 + rng() % 3, 1 + rng() % 4, 12 + rng() % 6);
        auto g = build_subarrays(l);
        for (std::size_t i = 0; i < g.size(); i++) {
            for (std::size_t j = i + 1; j < g.size(); j++) {
                if (g.labels()[i] != g.labels()[j]) {
                    ASSERT_GE(g.distance_lattice(i, j), (double)l.gap);
                }
            }
        }
    }
}

TEST(geometry, json_round_trip) {
    auto l = layout(5, 14, 3, 2, 2, 12);
    l.lattice_constant = 575e-9;
    auto back = layout_from_json(layout_to_json(l));
    ASSERT_EQ(back.rows, 5);
    ASSERT_EQ(back.cols, 14);
    ASSERT_EQ(back.spacing_x, 3);
    ASSERT_EQ(back.spacing_y, 2);
    ASSERT_EQ(back.n_subarrays, 2);
    ASSERT_EQ(back.gap, 12);
    ASSERT_NEAR(back.lattice_constant, 575e-9, 1e-20);

    auto scalar = layout_from_json(R"({"rows": 2, "cols": 3, "spacing": 4})");
    ASSERT_EQ(scalar.spacing_x, 4);
    ASSERT_EQ(scalar.spacing_y, 4);
    ASSERT_THROW(layout_from_json(R"({"rows": "two"})"), std::invalid_argument);
    ASSERT_THROW(layout_from_json(R"({"spacing": [1, 2, 3]})"), std::invalid_argument);
    ASSERT_THROW(layout_from_json("not json"), std::invalid_argument);
}
