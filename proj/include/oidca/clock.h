// Copyright 2026 The OIDC-A Reference Authors.
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

#ifndef OIDCA_CLOCK_H_
#define OIDCA_CLOCK_H_

#include <atomic>
#include <chrono>
#include <cstdint>

namespace oidca {

// Seconds since the Unix epoch (JWT NumericDate).
using NumericDate = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual NumericDate now() const = 0;
};

class SystemClock final : public Clock {
 public:
  NumericDate now() const override {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

// Test clock. Safe to advance from one thread while others read.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(NumericDate start = 0) : now_(start) {}

  NumericDate now() const override { return now_.load(); }
  void set(NumericDate t) { now_.store(t); }
  void advance(NumericDate seconds) { now_.fetch_add(seconds); }

 private:
  std::atomic<NumericDate> now_;
};

}  // namespace oidca

#endif  // OIDCA_CLOCK_H_
