/*
 * Copyright 2026 The hkge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hkge/error.h"

#include <fmt/format.h>

namespace hkge {

IndefiniteNorm::IndefiniteNorm(std::size_t index, double radicand)
    : Error(fmt::format("indefinite norm at coordinate {}: radicand {} < 0", index, radicand)),
      index_(index) {}

DegenerateVector::DegenerateVector(std::size_t index, double norm)
    : Error(fmt::format("degenerate vector at coordinate {}: norm {} below threshold", index, norm)),
      index_(index) {}

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : DataError(fmt::format("{}:{}: {}", path, line, what)), line_(line) {}

}  // namespace hkge
