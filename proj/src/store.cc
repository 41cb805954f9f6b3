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

#include "oidca/store.h"

#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

class MemoryStore : public Store {
 public:
  explicit MemoryStore(std::shared_ptr<const Clock> clock) : clock_(std::move(clock)) {}

  void put(Namespace ns, std::string key, Json value,
           std::optional<NumericDate> expires_at) override {
    if (ns == Namespace::kRevocations) expires_at.reset();
    Shard& shard = shard_for(ns);
    std::unique_lock lock(shard.mu);
    Json op{{"op", "put"}, {"key", key}, {"value", value}};
    if (expires_at) op["expires_at"] = *expires_at;
    persist(ns, shard, op);
    shard.entries[std::move(key)] = Entry{std::move(value), expires_at};
  }

  std::optional<Json> get(Namespace ns, std::string_view key) const override {
    const Shard& shard = shard_for(ns);
    std::shared_lock lock(shard.mu);
    auto it = shard.entries.find(key);
    if (it == shard.entries.end() || expired(it->second)) return std::nullopt;
    return it->second.value;
  }

  void erase(Namespace ns, std::string_view key) override {
    Shard& shard = shard_for(ns);
    std::unique_lock lock(shard.mu);
    auto it = shard.entries.find(key);
    if (it == shard.entries.end()) return;
    persist(ns, shard, Json{{"op", "erase"}, {"key", key}});
    // persist may compact and invalidate iterators.
    shard.entries.erase(std::string(key));
  }

  std::vector<StoreRecord> scan(Namespace ns) const override {
    const Shard& shard = shard_for(ns);
    std::shared_lock lock(shard.mu);
    std::vector<StoreRecord> out;
    for (const auto& [key, entry] : shard.entries) {
      if (!expired(entry)) out.push_back({ns, key, entry.value, entry.expires_at});
    }
    return out;
  }

  bool consume_once(std::string_view key) override {
    Shard& shard = shard_for(Namespace::kNonces);
    std::unique_lock lock(shard.mu);
    auto it = shard.entries.find(key);
    if (it == shard.entries.end() || expired(it->second)) return false;
    const Json& value = it->second.value;
    if (!value.is_object() || value.value("consumed", false)) return false;
    persist(Namespace::kNonces, shard, Json{{"op", "consume"}, {"key", key}});
    if (auto again = shard.entries.find(key); again != shard.entries.end()) {
      again->second.value["consumed"] = true;
    }
    return true;
  }

 protected:
  struct Entry {
    Json value;
    std::optional<NumericDate> expires_at;
  };
  struct Shard {
    mutable std::shared_mutex mu;
    std::map<std::string, Entry, std::less<>> entries;
  };

  // Called with the shard's exclusive lock held, before the in-memory
  // mutation is applied.
  virtual void persist(Namespace, Shard&, const Json&) {}

  bool expired(const Entry& e) const {
    return e.expires_at && *e.expires_at <= clock_->now();
  }

  Shard& shard_for(Namespace ns) { return shards_[static_cast<std::size_t>(ns)]; }
  const Shard& shard_for(Namespace ns) const {
    return shards_[static_cast<std::size_t>(ns)];
  }

  // Applies a logged mutation without persisting it again. Used by replay.
  static void apply(Shard& shard, const Json& op) {
    const std::string& kind = op.at("op").get_ref<const std::string&>();
    std::string key = op.at("key").get<std::string>();
    if (kind == "put") {
      std::optional<NumericDate> exp;
      if (op.contains("expires_at")) exp = op["expires_at"].get<NumericDate>();
      shard.entries[key] = Entry{op.at("value"), exp};
    } else if (kind == "erase") {
      shard.entries.erase(key);
    } else if (kind == "consume") {
      auto it = shard.entries.find(key);
      if (it != shard.entries.end() && it->second.value.is_object()) {
        it->second.value["consumed"] = true;
      }
    }
  }

  std::shared_ptr<const Clock> clock_;
  std::array<Shard, kAllNamespaces.size()> shards_;
};

class FileStore final : public MemoryStore {
 public:
  FileStore(std::filesystem::path dir, std::shared_ptr<const Clock> clock,
            std::size_t compact_after)
      : MemoryStore(std::move(clock)), dir_(std::move(dir)), compact_after_(compact_after) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
      throw Error(ErrorCode::kStorageIo,
                  "cannot create data directory " + dir_.string() + ": " + ec.message());
    }
    for (Namespace ns : kAllNamespaces) {
      Shard& shard = shard_for(ns);
      load(ns, shard);
      compact(ns, shard);
    }
  }

 protected:
  void persist(Namespace ns, Shard& shard, const Json& op) override {
    auto& log = logs_[static_cast<std::size_t>(ns)];
    log.stream << op.dump() << '\n';
    log.stream.flush();
    if (!log.stream) {
      throw Error(ErrorCode::kStorageIo, "write failed: " + log_path(ns).string());
    }
    if (++log.ops >= compact_after_) {
      // Compaction snapshots current state, which does not include `op`
      // yet; apply it first so the snapshot is complete.
      apply(shard, op);
      compact(ns, shard);
    }
  }

 private:
  struct Log {
    std::ofstream stream;
    std::size_t ops = 0;
  };

  std::filesystem::path log_path(Namespace ns) const {
    return dir_ / (std::string(namespace_name(ns)) + ".log");
  }
  std::filesystem::path snapshot_path(Namespace ns) const {
    return dir_ / (std::string(namespace_name(ns)) + ".snapshot.json");
  }

  void load(Namespace ns, Shard& shard) {
    if (std::ifstream snap(snapshot_path(ns)); snap) {
      Json doc = Json::parse(snap, nullptr, false);
      if (!doc.is_object() || !doc.contains("records")) {
        throw Error(ErrorCode::kStorageIo, "corrupt snapshot " + snapshot_path(ns).string());
      }
      for (const auto& rec : doc["records"]) {
        Json op = rec;
        op["op"] = "put";
        apply(shard, op);
      }
    }
    if (std::ifstream log(log_path(ns)); log) {
      std::string line;
      while (std::getline(log, line)) {
        Json op = Json::parse(line, nullptr, false);
        // A torn final line from a crash ends replay.
        if (!op.is_object() || !op.contains("op") || !op.contains("key")) break;
        apply(shard, op);
      }
    }
  }

  void compact(Namespace ns, Shard& shard) {
    Json records = Json::array();
    NumericDate now = clock_->now();
    for (auto it = shard.entries.begin(); it != shard.entries.end();) {
      if (it->second.expires_at && *it->second.expires_at <= now) {
        it = shard.entries.erase(it);
        continue;
      }
      Json rec{{"key", it->first}, {"value", it->second.value}};
      if (it->second.expires_at) rec["expires_at"] = *it->second.expires_at;
      records.push_back(std::move(rec));
      ++it;
    }
    auto tmp = snapshot_path(ns);
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << Json{{"namespace", namespace_name(ns)}, {"records", records}}.dump() << '\n';
      if (!out) throw Error(ErrorCode::kStorageIo, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, snapshot_path(ns), ec);
    if (ec) throw Error(ErrorCode::kStorageIo, "rename failed: " + ec.message());

    auto& log = logs_[static_cast<std::size_t>(ns)];
    log.stream.close();
    log.stream.clear();
    log.stream.open(log_path(ns), std::ios::trunc);
    if (!log.stream) throw Error(ErrorCode::kStorageIo, "cannot open " + log_path(ns).string());
    log.ops = 0;
  }

  std::filesystem::path dir_;
  std::size_t compact_after_;
  std::array<Log, kAllNamespaces.size()> logs_;
};

}  // namespace

std::string_view namespace_name(Namespace ns) {
  switch (ns) {
    case Namespace::kClients: return "clients";
    case Namespace::kKeys: return "keys";
    case Namespace::kMeasurements: return "measurements";
    case Namespace::kNonces: return "nonces";
    case Namespace::kRevocations: return "revocations";
  }
  return "unknown";
}

std::unique_ptr<Store> make_memory_store(std::shared_ptr<const Clock> clock) {
  return std::make_unique<MemoryStore>(std::move(clock));
}

std::unique_ptr<Store> make_file_store(const std::filesystem::path& dir,
                                       std::shared_ptr<const Clock> clock,
                                       std::size_t compact_after) {
  return std::make_unique<FileStore>(dir, std::move(clock), compact_after);
}

}  // namespace oidca
