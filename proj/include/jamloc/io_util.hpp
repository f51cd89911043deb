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

#ifndef JAMLOC_IO_UTIL_HPP
#define JAMLOC_IO_UTIL_HPP

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "jamloc/errors.hpp"

namespace jamloc::detail
{

template <typename T> void write_pod(std::ostream &os, const T &v)
{
    os.write(reinterpret_cast<const char *>(&v), sizeof v);
}

template <typename T> T read_pod(std::istream &is, const char *what = "binary field")
{
    T v{};
    is.read(reinterpret_cast<char *>(&v), sizeof v);
    if (!is)
        throw FormatError(std::string("truncated while reading ") + what);
    return v;
}

// Shortest decimal string that round-trips the double exactly.
inline std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace jamloc::detail

#endif
