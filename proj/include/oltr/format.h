// Copyright 2026 The oltr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OLTR_FORMAT_H_
#define OLTR_FORMAT_H_

#include <charconv>
#include <cmath>
#include <string>

namespace oltr {

// Shortest decimal text that parses back to the same double. Non-finite
// values become an empty CSV field.
inline std::string format_double(double value) {
  if (!std::isfinite(value)) return "";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "";
  return std::string(buf, end);
}

}  // namespace oltr

#endif  // OLTR_FORMAT_H_
