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

#include "qcorr/csv.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qcorr/error.h"

namespace qcorr {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::ostream &out, std::vector<std::string> columns) : out_(out), width_(columns.size()) {
    for (size_t i = 0; i < columns.size(); i++) {
        out_ << (i ? "," : "") << columns[i];
    }
    out_ << "\n";
}

CsvWriter &CsvWriter::cell(const std::string &text) {
    if (filled_ >= width_) {
        throw ArgumentError("too many cells in CSV row");
    }
    out_ << (filled_ ? "," : "") << text;
    filled_++;
    return *this;
}

CsvWriter &CsvWriter::cell(double v) {
    return cell(format_double(v));
}

CsvWriter &CsvWriter::cell(uint64_t v) {
    return cell(std::to_string(v));
}

CsvWriter &CsvWriter::blank() {
    return cell(std::string());
}

void CsvWriter::end_row() {
    if (filled_ != width_) {
        throw ArgumentError("CSV row has " + std::to_string(filled_) + " of " + std::to_string(width_) + " cells");
    }
    out_ << "\n";
    filled_ = 0;
}

size_t CsvTable::column(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); i++) {
        if (columns[i] == name) {
            return i;
        }
    }
    throw FormatError("CSV has no column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string &source) {
    CsvTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split(line);
        if (table.columns.empty()) {
            table.columns = std::move(cells);
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw FormatError(source + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(table.columns.size()) + " cells");
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.columns.empty()) {
        throw FormatError(source + ": missing CSV header");
    }
    return table;
}

double parse_double_cell(const std::string &text, const std::string &what) {
    if (text == "nan") {
        return std::nan("");
    }
    if (text == "inf") {
        return INFINITY;
    }
    if (text == "-inf") {
        return -INFINITY;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw FormatError("cannot parse " + what + " '" + text + "' as a number");
    }
    return v;
}

}  // namespace qcorr
