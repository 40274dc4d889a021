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

#ifndef QCORR_CSV_H
#define QCORR_CSV_H

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace qcorr {

/// 17 significant digits, so parsing the text recovers the double exactly.
std::string format_double(double v);

/// Writes a header row on construction, then rows of the same width.
class CsvWriter {
   public:
    CsvWriter(std::ostream &out, std::vector<std::string> columns);
    CsvWriter &cell(const std::string &text);
    CsvWriter &cell(double v);
    CsvWriter &cell(uint64_t v);
    /// An empty cell, for values that do not apply.
    CsvWriter &blank();
    void end_row();

   private:
    std::ostream &out_;
    size_t width_;
    size_t filled_ = 0;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of the named column; FormatError if absent.
    size_t column(std::string_view name) const;
};

/// Plain comma-separated text without quoting; the first line is the header.
CsvTable parse_csv(std::string_view text, const std::string &source);

double parse_double_cell(const std::string &text, const std::string &what);

}  // namespace qcorr

#endif
