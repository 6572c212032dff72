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

#ifndef LEAKAUDIT_LOG_H_
#define LEAKAUDIT_LOG_H_

#include <sstream>
#include <string>

namespace leakaudit {

enum class LogLevel { kWarning = 0, kInfo = 1, kDebug = 2 };

void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

// Writes one line to standard error when `level` is enabled. Thread-safe.
void LogLine(LogLevel level, const std::string& line);

namespace internal {

class LogMessage {
 public:
  explicit LogMessage(LogLevel level) : level_(level) {}
  ~LogMessage() { LogLine(level_, stream_.str()); }
  std::ostream& stream() { return stream_; }

 private:
  LogLevel level_;
  std::ostringstream stream_;
};

}  // namespace internal
}  // namespace leakaudit

#define LEAKAUDIT_LOG(level)                                        \
  if (::leakaudit::LogLevel::level > ::leakaudit::GetLogLevel()) { \
  } else                                                            \
    ::leakaudit::internal::LogMessage(::leakaudit::LogLevel::level).stream()

#endif  // LEAKAUDIT_LOG_H_
