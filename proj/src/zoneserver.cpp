#include "dsentinel/zoneserver.hpp"

#include "dsentinel/util.hpp"

#include <stdexcept>

namespace dsentinel::mockcloud {

using dnswire::Message;
using dnswire::ResourceRecord;
using dnswire::RType;

ZoneServer::~ZoneServer() { stop(); }

void ZoneServer::start() {
  if (running_) return;
  auto udp = net::UdpSocket::bind(net::Endpoint{IpAddr::v4(127, 0, 0, 1), 0});
  if (!udp) throw std::runtime_error("zone server: udp bind failed");
  auto where = udp->local_endpoint();
  auto tcp = net::TcpListener::bind(where);
  if (!tcp) throw std::runtime_error("zone server: tcp bind failed");

  udp_ = std::move(udp);
  tcp_ = std::move(tcp);
  endpoint_ = where;
  running_ = true;
  udp_thread_ = std::thread([this] { serve_udp(); });
  tcp_thread_ = std::thread([this] { serve_tcp(); });
}

void ZoneServer::stop() {
  if (!running_) return;
  running_ = false;
  if (udp_thread_.joinable()) udp_thread_.join();
  if (tcp_thread_.joinable()) tcp_thread_.join();
  udp_.reset();
  tcp_.reset();
}

void ZoneServer::add_record(ResourceRecord rr) {
  auto normalized = util::normalize_fqdn(rr.name);
  if (!normalized) throw InputError("zone record with bad name: " + rr.name);
  rr.name = *normalized;
  if (rr.rtype == static_cast<std::uint16_t>(RType::CNAME) ||
      rr.rtype == static_cast<std::uint16_t>(RType::NS)) {
    auto target = util::normalize_fqdn(rr.target);
    if (!target) throw InputError("zone record with bad target: " + rr.target);
    rr.target = *target;
  }
  std::lock_guard lock(mu_);
  records_.push_back(std::move(rr));
}

void ZoneServer::remove_records(const std::string& name,
                                std::optional<RType> type) {
  auto normalized = util::normalize_fqdn(name);
  if (!normalized) return;
  std::lock_guard lock(mu_);
  std::erase_if(records_, [&](const ResourceRecord& rr) {
    return rr.name == *normalized &&
           (!type || rr.rtype == static_cast<std::uint16_t>(*type));
  });
}

void ZoneServer::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

bool ZoneServer::should_drop() {
  if (drop_all_) return true;
  int n = drop_next_.load();
  while (n > 0) {
    if (drop_next_.compare_exchange_weak(n, n - 1)) return true;
  }
  return false;
}

Message ZoneServer::answer(const Message& query) const {
  Message out;
  out.id = query.id;
  out.is_response = true;
  out.authoritative = true;
  out.recursion_desired = query.recursion_desired;
  out.questions = query.questions;

  if (query.questions.size() != 1) {
    out.rcode = dnswire::RCode::FormErr;
    return out;
  }
  const auto& q = query.questions[0];
  std::string name = util::to_lower(q.name);

  std::lock_guard lock(mu_);
  bool name_exists = false;
  const ResourceRecord* cname = nullptr;
  std::vector<const ResourceRecord*> matches;
  for (const auto& rr : records_) {
    if (rr.name != name) continue;
    name_exists = true;
    if (rr.rtype == static_cast<std::uint16_t>(RType::CNAME)) {
      if (!cname) cname = &rr;
    } else if (rr.rtype == q.qtype) {
      matches.push_back(&rr);
    }
  }

  if (cname && q.qtype != static_cast<std::uint16_t>(RType::CNAME)) {
    // Single step: hand back the alias and let the client continue.
    out.answers.push_back(*cname);
    return out;
  }
  if (cname && q.qtype == static_cast<std::uint16_t>(RType::CNAME)) {
    out.answers.push_back(*cname);
    return out;
  }
  if (!name_exists) {
    out.rcode = dnswire::RCode::NxDomain;
    return out;
  }
  for (const auto* rr : matches) out.answers.push_back(*rr);
  return out; // NOERROR; empty answers = NODATA
}

void ZoneServer::serve_udp() {
  while (running_) {
    net::Endpoint from{};
    auto datagram = udp_->recv_from(&from, 100);
    if (!datagram) continue;
    ++query_count_;
    if (should_drop()) continue;
    auto query = dnswire::decode(*datagram);
    if (!query || query->is_response) continue;
    if (truncate_udp_) {
      Message tc;
      tc.id = query->id;
      tc.is_response = true;
      tc.truncated = true;
      tc.questions = query->questions;
      udp_->send_to(from, dnswire::encode(tc));
      continue;
    }
    udp_->send_to(from, dnswire::encode(answer(*query)));
  }
}

void ZoneServer::handle_tcp_conn(net::TcpStream conn) {
  std::uint8_t lenbuf[2];
  if (!conn.read_exact(lenbuf, 2, 2000)) return;
  std::size_t len = static_cast<std::size_t>(lenbuf[0]) << 8 | lenbuf[1];
  if (len == 0 || len > 65535) return;
  std::vector<std::uint8_t> payload(len);
  if (!conn.read_exact(payload.data(), len, 2000)) return;
  ++query_count_;
  if (should_drop()) return;
  auto query = dnswire::decode(payload);
  if (!query || query->is_response) return;
  auto wire = dnswire::encode(answer(*query));
  std::vector<std::uint8_t> framed;
  framed.push_back(static_cast<std::uint8_t>(wire.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(wire.size() & 0xFF));
  framed.insert(framed.end(), wire.begin(), wire.end());
  conn.write_all(framed, 2000);
}

void ZoneServer::serve_tcp() {
  while (running_) {
    auto conn = tcp_->accept(100);
    if (!conn) continue;
    handle_tcp_conn(std::move(*conn));
  }
}

} // namespace dsentinel::mockcloud
