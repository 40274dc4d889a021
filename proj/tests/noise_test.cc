// Copyright 2026 The qcorr Authors
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

#include "qcorr/noise.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

#include "qcorr/error.h"

using namespace qcorr;

TEST(noise, philox_known_answers) {
    ASSERT_EQ(
        philox4x32({0, 0, 0, 0}, {0, 0}), (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    ASSERT_EQ(
        philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
        (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    ASSERT_EQ(
        philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
        (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(noise, stream_matches_random_access) {
    NoiseStream s(42, 7, 1);
    for (uint64_t k = 0; k < 101; k++) {
        ASSERT_EQ(s.step(), k);
        double v = s.next();
        ASSERT_EQ(v, standard_normal(42, 7, 1, k)) << k;
    }
}

TEST(noise, streams_are_distinct) {
    ASSERT_NE(standard_normal(1, 0, 0, 0), standard_normal(2, 0, 0, 0));
    ASSERT_NE(standard_normal(1, 0, 0, 0), standard_normal(1, 1, 0, 0));
    ASSERT_NE(standard_normal(1, 0, 0, 0), standard_normal(1, 0, 1, 0));
    ASSERT_NE(standard_normal(1, 0, 0, 0), standard_normal(1, 0, 0, 1));
    ASSERT_NE(standard_normal(1, 0, 0, 0), standard_normal(1, uint64_t{1} << 32, 0, 0));
}

TEST(noise, gaussian_moments) {
    const int n = 200000;
    double sum = 0, sum2 = 0, sum4 = 0;
    int inside = 0;
    for (int k = 0; k < n; k++) {
        double v = standard_normal(9, k / 1000, 0, k % 1000);
        sum += v;
        sum2 += v * v;
        sum4 += v * v * v * v;
        inside += std::abs(v) < 1.0;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    ASSERT_LT(std::abs(mean), 4.0 / std::sqrt(n));
    ASSERT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
    ASSERT_LT(std::abs(sum4 / n - 3.0), 4.0 * std::sqrt(96.0 / n));
    double p = 0.6826894921370859;
    ASSERT_LT(std::abs(static_cast<double>(inside) / n - p), 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(noise, no_correlation_across_streams_or_lags) {
    const int n = 100000;
    double c_channel = 0, c_traj = 0, c_lag = 0, c_pair = 0;
    for (int k = 0; k < n; k++) {
        double a = standard_normal(3, 5, 0, k);
        c_channel += a * standard_normal(3, 5, 1, k);
        c_traj += a * standard_normal(3, 6, 0, k);
        c_lag += a * standard_normal(3, 5, 0, k + 1);
        // Box-Muller partners share a counter.
        if (k % 2 == 0) {
            c_pair += a * standard_normal(3, 5, 0, k + 1);
        }
    }
    double bound = 4.0 / std::sqrt(n);
    ASSERT_LT(std::abs(c_channel / n), bound);
    ASSERT_LT(std::abs(c_traj / n), bound);
    ASSERT_LT(std::abs(c_lag / n), bound);
    ASSERT_LT(std::abs(c_pair / (n / 2)), 4.0 / std::sqrt(n / 2));
}

TEST(noise, step_range) {
    ASSERT_THROW(standard_normal(0, 0, 0, uint64_t{1} << 33), ArgumentError);
}
