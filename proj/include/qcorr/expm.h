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

#ifndef QCORR_EXPM_H
#define QCORR_EXPM_H

#include <cmath>

#include <Eigen/Dense>

namespace qcorr {

/// Matrix exponential by scaling and squaring around a degree-13 Pade
/// approximant (Higham 2005). Works for arbitrary (non-normal) real matrices.
template <int N>
Eigen::Matrix<double, N, N> expm(const Eigen::Matrix<double, N, N> &a) {
    using Mat = Eigen::Matrix<double, N, N>;
    static constexpr double b[] = {
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    };
    static constexpr double theta13 = 5.371920351148152;

    double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    Mat s = a * std::ldexp(1.0, -squarings);

    const Mat id = Mat::Identity();
    Mat s2 = s * s;
    Mat s4 = s2 * s2;
    Mat s6 = s4 * s2;
    Mat u = s * (s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * id);
    Mat v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;
    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; k++) {
        r = r * r;
    }
    return r;
}

}  // namespace qcorr

#endif
