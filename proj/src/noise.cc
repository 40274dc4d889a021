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
#include <numbers>

#include "qcorr/error.h"

namespace qcorr {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t &hi, uint32_t &lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

PhiloxKey key_from_seed(uint64_t seed) {
    return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

// Open interval (0, 1) from the top 53 bits.
inline double to_unit(uint32_t hi, uint32_t lo) {
    uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
    double first;
    double second;
};

NormalPair normal_pair(PhiloxKey key, uint64_t trajectory, uint32_t channel, uint64_t pair_index) {
    if (pair_index >> 32) {
        throw ArgumentError("noise step index exceeds the 2^33 stream length");
    }
    PhiloxCounter ctr{
        static_cast<uint32_t>(pair_index),
        channel,
        static_cast<uint32_t>(trajectory),
        static_cast<uint32_t>(trajectory >> 32),
    };
    PhiloxCounter out = philox4x32(ctr, key);
    double u1 = to_unit(out[0], out[1]);
    double u2 = to_unit(out[2], out[3]);
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; round++) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double standard_normal(uint64_t master_seed, uint64_t trajectory, uint32_t channel, uint64_t step) {
    NormalPair p = normal_pair(key_from_seed(master_seed), trajectory, channel, step >> 1);
    return (step & 1) ? p.second : p.first;
}

NoiseStream::NoiseStream(uint64_t master_seed, uint64_t trajectory, uint32_t channel)
    : key_(key_from_seed(master_seed)), channel_(channel), trajectory_(trajectory) {
}

double NoiseStream::next() {
    double v;
    if (step_ & 1) {
        v = cached_;
    } else {
        NormalPair p = normal_pair(key_, trajectory_, channel_, step_ >> 1);
        v = p.first;
        cached_ = p.second;
    }
    step_++;
    return v;
}

}  // namespace qcorr
