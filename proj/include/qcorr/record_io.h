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

#ifndef QCORR_RECORD_IO_H
#define QCORR_RECORD_IO_H

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qcorr/trajectory.h"

namespace qcorr {

/// Binary record file, little-endian throughout:
///
///   "QCORR01"                          7 bytes
///   format_version                     u32
///   dt (us)                            f64
///   n_samples                          u64
///   n_channels                         u32
///   n_traj                             u64
///   per channel: axis x,y,z, tau, eta, phase_k   6 x f64
///   master_seed                        u64
///   payload: per trajectory (index order), per channel, n_samples x f64
inline constexpr char kRecordMagic[] = "QCORR01";
inline constexpr size_t kRecordMagicSize = 7;
inline constexpr uint32_t kRecordFormatVersion = 1;

struct RecordHeader {
    uint32_t format_version = kRecordFormatVersion;
    double dt = 0.0;
    uint64_t n_samples = 0;
    std::vector<MeasurementChannel> channels;
    uint64_t n_traj = 0;
    uint64_t master_seed = 0;

    uint64_t header_bytes() const;
    uint64_t trajectory_bytes() const {
        return channels.size() * n_samples * 8;
    }
};

/// Streams trajectories to a file; the trajectory count is fixed up front.
class RecordWriter {
   public:
    RecordWriter(const std::string &path, const RecordHeader &header);
    /// Appends the next trajectory; its index must equal the number already written.
    void append(const SignalRecord &record);
    /// Flushes and checks that exactly n_traj trajectories were written.
    void close();
    uint64_t written() const {
        return written_;
    }

   private:
    std::string path_;
    RecordHeader header_;
    std::ofstream out_;
    uint64_t written_ = 0;
};

/// Sequential reader. Errors: IoError, MagicMismatch, VersionMismatch, TruncatedFile.
class RecordReader {
   public:
    explicit RecordReader(const std::string &path);
    const RecordHeader &header() const {
        return header_;
    }
    /// Reads trajectory `next_index()`; false once all trajectories are consumed.
    bool read_next(SignalRecord &record);
    uint64_t next_index() const {
        return next_;
    }

   private:
    std::string path_;
    RecordHeader header_;
    std::ifstream in_;
    uint64_t next_ = 0;
};

void write_records(const std::string &path, const RecordSet &records);
RecordSet read_records(const std::string &path);

}  // namespace qcorr

#endif
