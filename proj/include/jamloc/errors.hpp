// SPDX-License-Identifier: Apache-2.0
//
// jamloc: simulation and direction-finding toolkit for GNSS jammer localization
// Copyright (C) 2025 jamloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef JAMLOC_ERRORS_HPP
#define JAMLOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jamloc
{

// Base of all toolkit errors. `kind()` is a stable machine-readable class
// name; the CLI prints it and maps it to a nonzero exit code.
class Error : public std::runtime_error
{
  public:
    Error(std::string kind, const std::string &msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

    const std::string &kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

#define JAMLOC_DEFINE_ERROR(NAME)                                       \
    class NAME : public Error                                           \
    {                                                                   \
      public:                                                           \
        explicit NAME(const std::string &msg) : Error(#NAME, msg) {}    \
    }

JAMLOC_DEFINE_ERROR(ConfigError);             // invalid configuration value or file
JAMLOC_DEFINE_ERROR(BoundsError);             // index / slice out of range
JAMLOC_DEFINE_ERROR(FormatError);             // bad magic, version or truncated container
JAMLOC_DEFINE_ERROR(IoError);                 // filesystem failure
JAMLOC_DEFINE_ERROR(CoverageError);           // query outside available data span
JAMLOC_DEFINE_ERROR(DegenerateGeometryError); // coincident points, zero direction
JAMLOC_DEFINE_ERROR(AliasingError);           // signal bandwidth exceeds sample rate
JAMLOC_DEFINE_ERROR(InsufficientDataError);   // fewer samples than an algorithm needs
JAMLOC_DEFINE_ERROR(NumericalError);          // singular matrix, non-finite value
JAMLOC_DEFINE_ERROR(ShapeError);              // tensor / array dimension mismatch
JAMLOC_DEFINE_ERROR(UndefinedCfoError);       // CFO requested on an all-zero signal

#undef JAMLOC_DEFINE_ERROR

} // namespace jamloc

#endif
