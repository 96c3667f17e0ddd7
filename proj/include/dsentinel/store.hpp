// Durable snapshot storage: an append-only log plus a derived index. The
// log is the single source of truth — the index accelerates opens and is
// rebuilt from the log whenever it is missing or stale.
#pragma once

#include "dsentinel/snapshot.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace dsentinel::snapshot {

// Raised for directory-level problems: lock held by a live process,
// unreadable log, corrupt record framing.
class StoreError : public std::runtime_error {
public:
  explicit StoreError(const std::string& what) : std::runtime_error(what) {}
};

// One store per directory, one process at a time (advisory LOCK file with
// the holder's pid; locks from dead processes are reclaimed). Writes append
// to snapshots.log as length-prefixed JSON records; reads serve from
// memory, so readers always see a consistent prefix of the log.
class SnapshotStore {
public:
  explicit SnapshotStore(const std::string& dir);
  ~SnapshotStore();

  SnapshotStore(const SnapshotStore&) = delete;
  SnapshotStore& operator=(const SnapshotStore&) = delete;

  // Appends one snapshot and returns its id ("<fqdn>@<fetched_at>").
  std::string append(const Snapshot& s);

  // Most recent snapshot by fetched_at; later log position wins ties.
  std::optional<Snapshot> latest(const std::string& fqdn) const;

  // All snapshots of one name, in log order.
  std::vector<Snapshot> history(const std::string& fqdn) const;

  // Id lookup; the latest record wins when ids collide.
  std::optional<Snapshot> by_id(const std::string& id) const;

  std::vector<std::string> fqdns() const; // sorted, unique
  std::size_t size() const;

  // Every record in log order, one JSON document per line.
  std::string export_json_lines() const;

  // Rewrites the index sidecar now (it is also written on close).
  void flush_index();

  std::string dir() const { return dir_; }

private:
  void load();
  void rebuild_from_log();

  std::string dir_;
  std::string lock_path_;
  mutable std::mutex mu_;
  std::vector<Snapshot> records_;          // log order
  std::map<std::string, std::vector<std::size_t>> by_fqdn_;
  std::uint64_t log_bytes_ = 0;
};

} // namespace dsentinel::snapshot
