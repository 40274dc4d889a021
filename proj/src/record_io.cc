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

#include "qcorr/record_io.h"

#include <bit>
#include <cstring>
#include <filesystem>

#include "qcorr/error.h"

namespace qcorr {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string &buf, T value) {
    static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 4 || sizeof(T) == 8));
    using U = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
    U bits = std::bit_cast<U>(value);
    for (size_t i = 0; i < sizeof(T); i++) {
        buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get(const unsigned char *p) {
    using U = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
    U bits = 0;
    for (size_t i = 0; i < sizeof(T); i++) {
        bits |= static_cast<U>(p[i]) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

std::string encode_header(const RecordHeader &h) {
    std::string buf(kRecordMagic, kRecordMagicSize);
    put<uint32_t>(buf, h.format_version);
    put<double>(buf, h.dt);
    put<uint64_t>(buf, h.n_samples);
    put<uint32_t>(buf, static_cast<uint32_t>(h.channels.size()));
    put<uint64_t>(buf, h.n_traj);
    for (const auto &c : h.channels) {
        put<double>(buf, c.axis.x());
        put<double>(buf, c.axis.y());
        put<double>(buf, c.axis.z());
        put<double>(buf, c.tau);
        put<double>(buf, c.eta);
        put<double>(buf, c.phase_k);
    }
    put<uint64_t>(buf, h.master_seed);
    return buf;
}

void read_exact(std::ifstream &in, unsigned char *dst, size_t n, const std::string &path, const char *what) {
    in.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n) {
        throw TruncatedFile(path + ": file ends inside the " + what);
    }
}

}  // namespace

uint64_t RecordHeader::header_bytes() const {
    return kRecordMagicSize + 4 + 8 + 8 + 4 + 8 + channels.size() * 48 + 8;
}

RecordWriter::RecordWriter(const std::string &path, const RecordHeader &header)
    : path_(path), header_(header), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
        throw IoError("cannot open " + path + " for writing");
    }
    header_.format_version = kRecordFormatVersion;
    std::string buf = encode_header(header_);
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out_) {
        throw IoError("write failed on " + path);
    }
}

void RecordWriter::append(const SignalRecord &record) {
    if (written_ >= header_.n_traj) {
        throw ArgumentError("record file already holds n_traj trajectories");
    }
    if (record.trajectory != written_) {
        throw ArgumentError("trajectories must be written in index order");
    }
    if (record.dt != header_.dt || record.n_samples != header_.n_samples || record.channels != header_.channels ||
        record.samples.size() != header_.channels.size() * header_.n_samples) {
        throw FormatError("trajectory " + std::to_string(record.trajectory) + " does not match the file header");
    }
    std::string buf;
    buf.reserve(record.samples.size() * 8);
    for (double v : record.samples) {
        put<double>(buf, v);
    }
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out_) {
        throw IoError("write failed on " + path_);
    }
    written_++;
}

void RecordWriter::close() {
    out_.flush();
    if (!out_) {
        throw IoError("write failed on " + path_);
    }
    out_.close();
    if (written_ != header_.n_traj) {
        throw FormatError(
            path_ + ": wrote " + std::to_string(written_) + " of " + std::to_string(header_.n_traj) + " trajectories");
    }
}

RecordReader::RecordReader(const std::string &path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
        throw IoError("cannot open " + path);
    }
    unsigned char fixed[kRecordMagicSize + 4 + 8 + 8 + 4 + 8];
    in_.read(reinterpret_cast<char *>(fixed), kRecordMagicSize);
    if (static_cast<size_t>(in_.gcount()) != kRecordMagicSize ||
        std::memcmp(fixed, kRecordMagic, kRecordMagicSize) != 0) {
        throw MagicMismatch(path + ": not a QCORR01 record file");
    }
    read_exact(in_, fixed + kRecordMagicSize, sizeof(fixed) - kRecordMagicSize, path, "header");
    const unsigned char *p = fixed + kRecordMagicSize;
    header_.format_version = get<uint32_t>(p);
    if (header_.format_version != kRecordFormatVersion) {
        throw VersionMismatch(
            path + ": format version " + std::to_string(header_.format_version) + ", expected " +
            std::to_string(kRecordFormatVersion));
    }
    header_.dt = get<double>(p + 4);
    header_.n_samples = get<uint64_t>(p + 12);
    uint32_t n_channels = get<uint32_t>(p + 20);
    header_.n_traj = get<uint64_t>(p + 24);

    std::error_code ec;
    uint64_t file_size = std::filesystem::file_size(path, ec);
    if (ec) {
        throw IoError("cannot stat " + path);
    }
    uint64_t channel_bytes = uint64_t{n_channels} * 48 + 8;
    if (file_size < sizeof(fixed) + channel_bytes) {
        throw TruncatedFile(path + ": file ends inside the header");
    }
    std::vector<unsigned char> rest(channel_bytes);
    read_exact(in_, rest.data(), rest.size(), path, "header");
    for (uint32_t l = 0; l < n_channels; l++) {
        const unsigned char *c = rest.data() + l * 48;
        MeasurementChannel ch;
        ch.axis = {get<double>(c), get<double>(c + 8), get<double>(c + 16)};
        ch.tau = get<double>(c + 24);
        ch.eta = get<double>(c + 32);
        ch.phase_k = get<double>(c + 40);
        header_.channels.push_back(ch);
    }
    header_.master_seed = get<uint64_t>(rest.data() + n_channels * 48);

    // Guard the multiplication against absurd headers before comparing lengths.
    long double payload = static_cast<long double>(header_.n_traj) * n_channels * header_.n_samples * 8.0L;
    long double expected = payload + static_cast<long double>(header_.header_bytes());
    if (expected != static_cast<long double>(file_size)) {
        throw TruncatedFile(
            path + ": header promises " + std::to_string(static_cast<double>(expected)) + " bytes but the file has " +
            std::to_string(file_size));
    }
}

bool RecordReader::read_next(SignalRecord &record) {
    if (next_ >= header_.n_traj) {
        return false;
    }
    std::vector<unsigned char> raw(header_.trajectory_bytes());
    read_exact(in_, raw.data(), raw.size(), path_, "payload");
    record.dt = header_.dt;
    record.n_samples = header_.n_samples;
    record.channels = header_.channels;
    record.trajectory = next_;
    record.master_seed = header_.master_seed;
    record.samples.resize(header_.channels.size() * header_.n_samples);
    for (size_t i = 0; i < record.samples.size(); i++) {
        record.samples[i] = get<double>(raw.data() + 8 * i);
    }
    record.states.clear();
    record.projections = 0;
    next_++;
    return true;
}

void write_records(const std::string &path, const RecordSet &records) {
    records.validate();
    RecordHeader h;
    h.dt = records.dt;
    h.n_samples = records.n_samples;
    h.channels = records.channels;
    h.n_traj = records.records.size();
    h.master_seed = records.master_seed;
    RecordWriter w(path, h);
    for (const auto &r : records.records) {
        w.append(r);
    }
    w.close();
}

RecordSet read_records(const std::string &path) {
    RecordReader reader(path);
    RecordSet set;
    set.dt = reader.header().dt;
    set.n_samples = reader.header().n_samples;
    set.channels = reader.header().channels;
    set.master_seed = reader.header().master_seed;
    set.records.reserve(reader.header().n_traj);
    SignalRecord rec;
    while (reader.read_next(rec)) {
        set.records.push_back(rec);
    }
    return set;
}

}  // namespace qcorr
