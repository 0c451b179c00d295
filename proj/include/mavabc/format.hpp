/*
   Copyright 2026 The mavabc Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <charconv>
#include <optional>
#include <string>

namespace mavabc {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double value)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

/// Marker written for statistics that are undefined (e.g. a standard error
/// from a single replicate).
inline constexpr const char* kAbsent = "NA";

inline std::string format_optional(const std::optional<double>& value)
{
    return value ? format_double(*value) : std::string(kAbsent);
}

} // namespace mavabc
