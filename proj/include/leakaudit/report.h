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

#ifndef LEAKAUDIT_REPORT_H_
#define LEAKAUDIT_REPORT_H_

#include <string>

#include "leakaudit/audit.h"

namespace leakaudit {

inline constexpr char kVersion[] = "0.1.0";

// audit_<feature>_<enhancement>_<regions>_<segmentation>_k<K>_s<N>
std::string ReportStem(const AuditConfig& config);

// Deterministic: no timestamps, keys sorted, doubles in shortest round-trip
// form.
std::string ReportJson(const AuditReport& report);
std::string ReportMarkdown(const AuditReport& report);

// Writes <stem>.json and <stem>.md into `out_dir` and returns the JSON path.
// Throws Error(kIoError).
std::string WriteReport(const AuditReport& report, const std::string& out_dir);

}  // namespace leakaudit

#endif  // LEAKAUDIT_REPORT_H_
