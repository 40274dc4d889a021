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

#ifndef QCORR_CLI_H
#define QCORR_CLI_H

#include <ostream>

namespace qcorr {

/// Entry point of the `qcorr` command line tool. Returns the process exit status.
///
/// Subcommands: simulate, analytic, estimate, replica-fig1, replica-fig2, compare.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace qcorr

#endif
