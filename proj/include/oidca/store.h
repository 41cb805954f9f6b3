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

#ifndef OIDCA_STORE_H_
#define OIDCA_STORE_H_

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oidca/clock.h"

namespace oidca {

enum class Namespace { kClients, kKeys, kMeasurements, kNonces, kRevocations };

inline constexpr std::array<Namespace, 5> kAllNamespaces = {
    Namespace::kClients, Namespace::kKeys, Namespace::kMeasurements,
    Namespace::kNonces, Namespace::kRevocations,
};

std::string_view namespace_name(Namespace ns);

struct StoreRecord {
  Namespace ns;
  std::string key;
  nlohmann::json value;
  std::optional<NumericDate> expires_at;
};

// Keyed JSON records in five namespaces. Records whose expires_at is at or
// before the clock's now are treated as absent. Revocation records never
// expire: any expiry passed for them is dropped.
//
// Readers of a namespace run concurrently; writers are serialized per
// namespace. consume_once is an atomic read-modify-write.
class Store {
 public:
  virtual ~Store() = default;

  virtual void put(Namespace ns, std::string key, nlohmann::json value,
                   std::optional<NumericDate> expires_at = std::nullopt) = 0;
  virtual std::optional<nlohmann::json> get(Namespace ns,
                                            std::string_view key) const = 0;
  virtual void erase(Namespace ns, std::string_view key) = 0;
  virtual std::vector<StoreRecord> scan(Namespace ns) const = 0;

  // Nonce namespace only. Returns true exactly once for a live record whose
  // value does not yet carry "consumed": true, and marks it consumed.
  // Unknown or expired keys return false.
  virtual bool consume_once(std::string_view key) = 0;
};

std::unique_ptr<Store> make_memory_store(std::shared_ptr<const Clock> clock);

// Append-log backend. Each namespace has `<dir>/<name>.log` (JSON lines,
// one mutation per line) and `<dir>/<name>.snapshot.json`. Opening replays
// snapshot then log, then compacts. Throws Error(kStorageIo) on I/O errors.
std::unique_ptr<Store> make_file_store(const std::filesystem::path& dir,
                                       std::shared_ptr<const Clock> clock,
                                       std::size_t compact_after = 4096);

}  // namespace oidca

#endif  // OIDCA_STORE_H_
