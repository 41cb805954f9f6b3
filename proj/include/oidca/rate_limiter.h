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

#ifndef OIDCA_RATE_LIMITER_H_
#define OIDCA_RATE_LIMITER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "oidca/clock.h"

namespace oidca {

struct RateLimit {
  double capacity = 10;
  // `refill_tokens` are added back, pro rata, every `refill_period_seconds`.
  double refill_tokens = 10;
  std::int64_t refill_period_seconds = 10;

  double refill_per_second() const {
    return refill_tokens / static_cast<double>(refill_period_seconds);
  }
  // Throws Error(kInvalidConfig) on non-positive values.
  void check() const;
  static RateLimit from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// Per-caller token buckets over an injected clock. Buckets that have
// refilled completely are dropped once the table grows large, so idle
// callers cost nothing.
class TokenBucketLimiter {
 public:
  TokenBucketLimiter(RateLimit limit, std::shared_ptr<const Clock> clock);

  // Takes one token from the caller's bucket; false when it is empty.
  bool try_acquire(std::string_view caller);
  // Tokens currently available to `caller`, after refill.
  double available(std::string_view caller) const;
  const RateLimit& limit() const { return limit_; }

 private:
  struct Bucket {
    double tokens;
    NumericDate last_refill;
  };

  void refill(Bucket& bucket, NumericDate now) const;
  void sweep(NumericDate now);

  RateLimit limit_;
  std::shared_ptr<const Clock> clock_;
  mutable std::mutex mu_;
  std::map<std::string, Bucket, std::less<>> buckets_;
};

}  // namespace oidca

#endif  // OIDCA_RATE_LIMITER_H_
