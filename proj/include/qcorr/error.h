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

#ifndef QCORR_ERROR_H
#define QCORR_ERROR_H

#include <stdexcept>
#include <string>

namespace qcorr {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An input object violates a documented invariant (bad axis, tau <= 0, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// A call-site argument is out of range (reversed times, window past record end).
struct ArgumentError : Error {
    using Error::Error;
};

/// A precondition on the model does not hold for the requested operation.
struct PreconditionError : Error {
    using Error::Error;
};

/// The factorization theorem does not apply (non-unital model or phase backaction).
struct FactorizationInapplicable : PreconditionError {
    using PreconditionError::PreconditionError;
};

/// Enumeration would exceed the supported size.
struct SizeError : Error {
    using Error::Error;
};

/// The stochastic integration produced a non-finite state.
struct IntegrationDiverged : Error {
    IntegrationDiverged(const std::string &msg, size_t step) : Error(msg), step(step) {
    }
    size_t step;
};

/// Structurally invalid file contents or mismatched record metadata.
struct FormatError : Error {
    using Error::Error;
};
struct MagicMismatch : FormatError {
    using FormatError::FormatError;
};
struct VersionMismatch : FormatError {
    using FormatError::FormatError;
};
struct TruncatedFile : FormatError {
    using FormatError::FormatError;
};

/// Operating-system level I/O failure (open, read, write).
struct IoError : Error {
    using Error::Error;
};

}  // namespace qcorr

#endif
