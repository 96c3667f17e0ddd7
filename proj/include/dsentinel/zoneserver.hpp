#pragma once

#include "dsentinel/dnswire.hpp"
#include "dsentinel/net.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dsentinel::mockcloud {

// Authoritative test-harness DNS server on loopback: UDP plus TCP on the
// same ephemeral port. Answers are single-step — a CNAME is returned as-is,
// never chased — so clients exercise their own chain-following logic.
// Record mutation is thread-safe (harness timelines edit zones mid-run).
class ZoneServer {
public:
  ZoneServer() = default;
  ~ZoneServer();

  ZoneServer(const ZoneServer&) = delete;
  ZoneServer& operator=(const ZoneServer&) = delete;

  // Binds both sockets and starts the service threads.
  void start();
  void stop();
  net::Endpoint endpoint() const { return endpoint_; }

  void add_record(dnswire::ResourceRecord rr);
  // Drops records for a name; all of them, or only one rtype.
  void remove_records(const std::string& name,
                      std::optional<dnswire::RType> type = std::nullopt);
  void clear();

  // --- fault injection ----------------------------------------------------
  // Swallow every query (the "resolver died" case).
  void set_drop_all(bool drop) { drop_all_ = drop; }
  // Swallow the next n queries, then recover.
  void drop_next(int n) { drop_next_ = n; }
  // Reply over UDP with just the TC bit so clients must retry over TCP.
  void set_truncate_udp(bool truncate) { truncate_udp_ = truncate; }

  std::size_t query_count() const { return query_count_; }

private:
  void serve_udp();
  void serve_tcp();
  void handle_tcp_conn(net::TcpStream conn);
  dnswire::Message answer(const dnswire::Message& query) const;
  bool should_drop();

  mutable std::mutex mu_;
  std::vector<dnswire::ResourceRecord> records_;

  net::Endpoint endpoint_{};
  std::optional<net::UdpSocket> udp_;
  std::optional<net::TcpListener> tcp_;
  std::thread udp_thread_;
  std::thread tcp_thread_;
  std::atomic<bool> running_{false};
  std::atomic<bool> drop_all_{false};
  std::atomic<int> drop_next_{0};
  std::atomic<bool> truncate_udp_{false};
  std::atomic<std::size_t> query_count_{0};
};

} // namespace dsentinel::mockcloud
