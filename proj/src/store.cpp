#include "dsentinel/store.hpp"

#include "dsentinel/util.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace dsentinel::snapshot {

namespace {

using nlohmann::json;

std::string log_path(const std::string& dir) { return dir + "/snapshots.log"; }
std::string index_path(const std::string& dir) { return dir + "/index.json"; }

// Four-byte big-endian record length: framing survives any JSON content.
void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

bool process_alive(long pid) {
  if (pid <= 0) return false;
  return ::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM;
}

} // namespace

SnapshotStore::SnapshotStore(const std::string& dir)
    : dir_(dir), lock_path_(dir + "/LOCK") {
  if (::mkdir(dir_.c_str(), 0755) != 0 && errno != EEXIST)
    throw StoreError("store: cannot create directory " + dir_ + ": " +
                     std::strerror(errno));

  // Advisory single-writer lock. A lock whose owner is gone is reclaimed —
  // crashes must not brick the store.
  for (int attempt = 0; attempt < 2; ++attempt) {
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      std::string pid = std::to_string(::getpid()) + "\n";
      ssize_t n = ::write(fd, pid.data(), pid.size());
      (void)n;
      ::close(fd);
      break;
    }
    std::ifstream existing(lock_path_);
    long holder = 0;
    existing >> holder;
    if (attempt == 0 && !process_alive(holder)) {
      ::unlink(lock_path_.c_str());
      continue;
    }
    throw StoreError("store: " + dir_ + " is locked by pid " +
                     std::to_string(holder));
  }

  load();
}

SnapshotStore::~SnapshotStore() {
  try {
    flush_index();
  } catch (...) {
    // Destructors must not throw; a missing index rebuilds on next open.
  }
  ::unlink(lock_path_.c_str());
}

void SnapshotStore::load() {
  // The log alone is authoritative: every open replays it, so a missing,
  // stale, or hand-mangled index.json can never change what the store
  // serves. The sidecar exists for external tooling and is refreshed on
  // close (its log_bytes field tells such readers when it lags the log).
  rebuild_from_log();
}

void SnapshotStore::rebuild_from_log() {
  records_.clear();
  by_fqdn_.clear();
  log_bytes_ = 0;

  std::ifstream log(log_path(dir_), std::ios::binary);
  if (!log) return; // empty store

  std::string content((std::istreambuf_iterator<char>(log)),
                      std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    if (pos + 4 > content.size())
      throw StoreError("store: truncated record header at byte " +
                       std::to_string(pos));
    std::uint32_t len =
        get_u32(reinterpret_cast<const unsigned char*>(content.data() + pos));
    if (pos + 4 + len > content.size())
      throw StoreError("store: truncated record at byte " +
                       std::to_string(pos));
    Snapshot s;
    try {
      s = Snapshot::from_json(content.substr(pos + 4, len));
    } catch (const InputError& e) {
      throw StoreError("store: corrupt record at byte " + std::to_string(pos) +
                       ": " + e.what());
    }
    by_fqdn_[s.fqdn].push_back(records_.size());
    records_.push_back(std::move(s));
    pos += 4 + len;
  }
  log_bytes_ = content.size();
}

std::string SnapshotStore::append(const Snapshot& s) {
  std::lock_guard<std::mutex> lk(mu_);

  std::string body = s.to_json();
  std::string framed;
  framed.reserve(body.size() + 4);
  put_u32(framed, static_cast<std::uint32_t>(body.size()));
  framed += body;

  std::ofstream log(log_path(dir_), std::ios::binary | std::ios::app);
  if (!log) throw StoreError("store: cannot open log for append");
  log.write(framed.data(), static_cast<std::streamsize>(framed.size()));
  log.flush();
  if (!log) throw StoreError("store: short write to log");

  log_bytes_ += framed.size();
  by_fqdn_[s.fqdn].push_back(records_.size());
  records_.push_back(s);
  return s.id();
}

std::optional<Snapshot> SnapshotStore::latest(const std::string& fqdn) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = by_fqdn_.find(fqdn);
  if (it == by_fqdn_.end()) return std::nullopt;
  const Snapshot* best = nullptr;
  for (std::size_t idx : it->second) {
    const Snapshot& s = records_[idx];
    // >= : later log position wins a fetched_at tie.
    if (!best || s.fetched_at >= best->fetched_at) best = &s;
  }
  return *best;
}

std::vector<Snapshot> SnapshotStore::history(const std::string& fqdn) const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<Snapshot> out;
  auto it = by_fqdn_.find(fqdn);
  if (it == by_fqdn_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t idx : it->second) out.push_back(records_[idx]);
  return out;
}

std::optional<Snapshot> SnapshotStore::by_id(const std::string& id) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto at = id.rfind('@');
  if (at == std::string::npos) return std::nullopt;
  auto it = by_fqdn_.find(id.substr(0, at));
  if (it == by_fqdn_.end()) return std::nullopt;
  const Snapshot* found = nullptr;
  for (std::size_t idx : it->second) {
    if (records_[idx].id() == id) found = &records_[idx];
  }
  if (!found) return std::nullopt;
  return *found;
}

std::vector<std::string> SnapshotStore::fqdns() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<std::string> out;
  out.reserve(by_fqdn_.size());
  for (const auto& [name, _] : by_fqdn_) out.push_back(name);
  return out;
}

std::size_t SnapshotStore::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return records_.size();
}

std::string SnapshotStore::export_json_lines() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::string out;
  for (const auto& s : records_) {
    out += s.to_json();
    out.push_back('\n');
  }
  return out;
}

void SnapshotStore::flush_index() {
  std::lock_guard<std::mutex> lk(mu_);
  json latest_by_fqdn = json::object();
  for (const auto& [name, indices] : by_fqdn_) {
    std::size_t best = indices.front();
    for (std::size_t idx : indices) {
      if (records_[idx].fetched_at >= records_[best].fetched_at) best = idx;
    }
    latest_by_fqdn[name] = best;
  }
  json j;
  j["version"] = 1;
  j["log_bytes"] = log_bytes_;
  j["count"] = records_.size();
  j["latest_record"] = std::move(latest_by_fqdn);

  // Write-then-rename keeps the sidecar atomic; a torn index would
  // otherwise defeat the staleness check.
  std::string tmp = index_path(dir_) + ".tmp";
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("store: cannot write index");
  out << j.dump(2) << "\n";
  out.close();
  if (::rename(tmp.c_str(), index_path(dir_).c_str()) != 0)
    throw StoreError("store: cannot replace index");
}

} // namespace dsentinel::snapshot
