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

#ifndef QCORR_NOISE_H
#define QCORR_NOISE_H

#include <array>
#include <cstdint>

namespace qcorr {

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

/// Philox4x32-10 block function (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Standard normal draw keyed by (master seed, trajectory, channel, step).
///
/// Pure function of its key: two consecutive steps share one Philox block and
/// one Box-Muller pair, so the value never depends on which other draws were
/// made or in what order.
double standard_normal(uint64_t master_seed, uint64_t trajectory, uint32_t channel, uint64_t step);

/// Sequential reader over the keyed draws of one (trajectory, channel),
/// caching the second half of each Box-Muller pair. Yields exactly the values
/// of standard_normal for steps 0, 1, 2, ...
class NoiseStream {
   public:
    NoiseStream(uint64_t master_seed, uint64_t trajectory, uint32_t channel);
    double next();
    uint64_t step() const {
        return step_;
    }

   private:
    PhiloxKey key_;
    uint32_t channel_;
    uint64_t trajectory_;
    uint64_t step_ = 0;
    double cached_ = 0.0;
};

}  // namespace qcorr

#endif
