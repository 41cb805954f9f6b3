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

#include "oidca/rate_limiter.h"

#include <algorithm>

#include "oidca/error.h"

namespace oidca {
namespace {

constexpr std::size_t kSweepThreshold = 4096;

}  // namespace

void RateLimit::check() const {
  if (!(capacity >= 1) || !(refill_tokens > 0) || refill_period_seconds <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "rate limit needs capacity >= 1 and a positive refill rate");
  }
}

RateLimit RateLimit::from_json(const nlohmann::json& doc) {
  RateLimit out;
  try {
    out.capacity = doc.value("capacity", out.capacity);
    out.refill_tokens = doc.value("refill_tokens", out.refill_tokens);
    out.refill_period_seconds = doc.value("refill_period_seconds", out.refill_period_seconds);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("rate limit: ") + e.what());
  }
  out.check();
  return out;
}

nlohmann::json RateLimit::to_json() const {
  return {{"capacity", capacity},
          {"refill_tokens", refill_tokens},
          {"refill_period_seconds", refill_period_seconds}};
}

TokenBucketLimiter::TokenBucketLimiter(RateLimit limit, std::shared_ptr<const Clock> clock)
    : limit_(limit), clock_(std::move(clock)) {
  limit_.check();
}

void TokenBucketLimiter::refill(Bucket& bucket, NumericDate now) const {
  if (now <= bucket.last_refill) return;  // a clock stepping back adds nothing
  double elapsed = static_cast<double>(now - bucket.last_refill);
  bucket.tokens = std::min(limit_.capacity, bucket.tokens + elapsed * limit_.refill_per_second());
  bucket.last_refill = now;
}

void TokenBucketLimiter::sweep(NumericDate now) {
  for (auto it = buckets_.begin(); it != buckets_.end();) {
    refill(it->second, now);
    it = it->second.tokens >= limit_.capacity ? buckets_.erase(it) : std::next(it);
  }
}

bool TokenBucketLimiter::try_acquire(std::string_view caller) {
  NumericDate now = clock_->now();
  std::lock_guard lock(mu_);
  auto it = buckets_.find(caller);
  if (it == buckets_.end()) {
    if (buckets_.size() >= kSweepThreshold) sweep(now);
    it = buckets_.emplace(std::string(caller), Bucket{limit_.capacity, now}).first;
  }
  Bucket& bucket = it->second;
  refill(bucket, now);
  if (bucket.tokens < 1) return false;
  bucket.tokens -= 1;
  return true;
}

double TokenBucketLimiter::available(std::string_view caller) const {
  NumericDate now = clock_->now();
  std::lock_guard lock(mu_);
  auto it = buckets_.find(caller);
  if (it == buckets_.end()) return limit_.capacity;
  Bucket copy = it->second;
  refill(copy, now);
  return copy.tokens;
}

}  // namespace oidca
