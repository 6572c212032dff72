// Copyright 2026 The Leakaudit Authors.
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

#ifndef LEAKAUDIT_CSV_H_
#define LEAKAUDIT_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace leakaudit::csv {

using Row = std::vector<std::string>;

// Parses RFC 4180 text: quoted fields may hold commas, doubled quotes and
// newlines. Blank lines and lines starting with '#' are skipped. Throws
// std::invalid_argument on an unterminated quote.
std::vector<Row> Parse(std::string_view text);

// Quotes a field only when it needs quoting.
std::string Escape(std::string_view field);

std::string FormatRow(const Row& row);

std::string ReadFile(const std::string& path);

}  // namespace leakaudit::csv

#endif  // LEAKAUDIT_CSV_H_
