#include "dsentinel/dnswire.hpp"

#include "dsentinel/util.hpp"

#include <cstring>

namespace dsentinel::dnswire {

ResourceRecord ResourceRecord::a(std::string name, IpAddr addr, std::uint32_t ttl) {
  ResourceRecord rr;
  rr.name = std::move(name);
  rr.rtype = static_cast<std::uint16_t>(addr.is_v6 ? RType::AAAA : RType::A);
  rr.ttl = ttl;
  rr.address = addr;
  return rr;
}

ResourceRecord ResourceRecord::cname(std::string name, std::string target,
                                     std::uint32_t ttl) {
  ResourceRecord rr;
  rr.name = std::move(name);
  rr.rtype = static_cast<std::uint16_t>(RType::CNAME);
  rr.ttl = ttl;
  rr.target = std::move(target);
  return rr;
}

ResourceRecord ResourceRecord::ns(std::string name, std::string target,
                                  std::uint32_t ttl) {
  ResourceRecord rr;
  rr.name = std::move(name);
  rr.rtype = static_cast<std::uint16_t>(RType::NS);
  rr.ttl = ttl;
  rr.target = std::move(target);
  return rr;
}

ResourceRecord ResourceRecord::caa_record(std::string name, CaaData data,
                                          std::uint32_t ttl) {
  ResourceRecord rr;
  rr.name = std::move(name);
  rr.rtype = static_cast<std::uint16_t>(RType::CAA);
  rr.ttl = ttl;
  rr.caa = std::move(data);
  return rr;
}

Message Message::query(std::uint16_t id, const std::string& name, RType type) {
  Message m;
  m.id = id;
  m.recursion_desired = true;
  m.questions.push_back({name, static_cast<std::uint16_t>(type), 1});
  return m;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

bool put_name(std::vector<std::uint8_t>& out, const std::string& name) {
  if (!name.empty()) {
    for (const auto& label : util::labels_of(name)) {
      if (label.empty() || label.size() > 63) return false;
      out.push_back(static_cast<std::uint8_t>(label.size()));
      out.insert(out.end(), label.begin(), label.end());
    }
  }
  out.push_back(0);
  return true;
}

void put_rr(std::vector<std::uint8_t>& out, const ResourceRecord& rr) {
  put_name(out, rr.name);
  put_u16(out, rr.rtype);
  put_u16(out, rr.rclass);
  put_u32(out, rr.ttl);
  std::vector<std::uint8_t> rdata;
  switch (static_cast<RType>(rr.rtype)) {
    case RType::A:
      rdata.assign(rr.address.bytes.begin(), rr.address.bytes.begin() + 4);
      break;
    case RType::AAAA:
      rdata.assign(rr.address.bytes.begin(), rr.address.bytes.end());
      break;
    case RType::CNAME:
    case RType::NS:
      put_name(rdata, rr.target);
      break;
    case RType::CAA:
      rdata.push_back(rr.caa.flags);
      rdata.push_back(static_cast<std::uint8_t>(rr.caa.tag.size()));
      rdata.insert(rdata.end(), rr.caa.tag.begin(), rr.caa.tag.end());
      rdata.insert(rdata.end(), rr.caa.value.begin(), rr.caa.value.end());
      break;
    default:
      rdata = rr.raw;
      break;
  }
  put_u16(out, static_cast<std::uint16_t>(rdata.size()));
  out.insert(out.end(), rdata.begin(), rdata.end());
}

struct Reader {
  std::span<const std::uint8_t> wire;
  std::size_t pos = 0;

  bool u8(std::uint8_t* v) {
    if (pos + 1 > wire.size()) return false;
    *v = wire[pos++];
    return true;
  }
  bool u16(std::uint16_t* v) {
    if (pos + 2 > wire.size()) return false;
    *v = static_cast<std::uint16_t>(wire[pos] << 8 | wire[pos + 1]);
    pos += 2;
    return true;
  }
  bool u32(std::uint32_t* v) {
    if (pos + 4 > wire.size()) return false;
    *v = static_cast<std::uint32_t>(wire[pos]) << 24 |
         static_cast<std::uint32_t>(wire[pos + 1]) << 16 |
         static_cast<std::uint32_t>(wire[pos + 2]) << 8 |
         static_cast<std::uint32_t>(wire[pos + 3]);
    pos += 4;
    return true;
  }

  // Reads a possibly compressed name starting at `at`; returns the position
  // just past the name's in-line representation via `next`.
  bool name_at(std::size_t at, std::string* out, std::size_t* next) {
    std::string name;
    std::size_t p = at;
    bool jumped = false;
    std::size_t after_first_jump = 0;
    int hops = 0;
    while (true) {
      if (p >= wire.size()) return false;
      std::uint8_t len = wire[p];
      if ((len & 0xC0) == 0xC0) {
        if (p + 1 >= wire.size()) return false;
        std::size_t target = (static_cast<std::size_t>(len & 0x3F) << 8) | wire[p + 1];
        if (!jumped) {
          after_first_jump = p + 2;
          jumped = true;
        }
        if (++hops > 32 || target >= wire.size()) return false;
        p = target;
        continue;
      }
      if (len > 63) return false;
      if (len == 0) {
        ++p;
        break;
      }
      if (p + 1 + len > wire.size()) return false;
      if (!name.empty()) name.push_back('.');
      name.append(reinterpret_cast<const char*>(wire.data() + p + 1), len);
      p += 1 + len;
      if (name.size() > 255) return false;
    }
    *out = util::to_lower(name);
    *next = jumped ? after_first_jump : p;
    return true;
  }

  bool name(std::string* out) {
    std::size_t next = 0;
    if (!name_at(pos, out, &next)) return false;
    pos = next;
    return true;
  }
};

bool read_rr(Reader& r, ResourceRecord* rr) {
  if (!r.name(&rr->name)) return false;
  std::uint16_t rdlen = 0;
  if (!r.u16(&rr->rtype) || !r.u16(&rr->rclass) || !r.u32(&rr->ttl) ||
      !r.u16(&rdlen))
    return false;
  if (r.pos + rdlen > r.wire.size()) return false;
  std::size_t rdata_start = r.pos;
  switch (static_cast<RType>(rr->rtype)) {
    case RType::A:
      if (rdlen != 4) return false;
      std::memcpy(rr->address.bytes.data(), r.wire.data() + rdata_start, 4);
      rr->address.is_v6 = false;
      break;
    case RType::AAAA:
      if (rdlen != 16) return false;
      std::memcpy(rr->address.bytes.data(), r.wire.data() + rdata_start, 16);
      rr->address.is_v6 = true;
      break;
    case RType::CNAME:
    case RType::NS: {
      std::size_t next = 0;
      if (!r.name_at(rdata_start, &rr->target, &next)) return false;
      break;
    }
    case RType::CAA: {
      if (rdlen < 2) return false;
      rr->caa.flags = r.wire[rdata_start];
      std::uint8_t taglen = r.wire[rdata_start + 1];
      if (2 + static_cast<std::size_t>(taglen) > rdlen) return false;
      rr->caa.tag.assign(
          reinterpret_cast<const char*>(r.wire.data() + rdata_start + 2), taglen);
      rr->caa.value.assign(
          reinterpret_cast<const char*>(r.wire.data() + rdata_start + 2 + taglen),
          rdlen - 2 - taglen);
      break;
    }
    default:
      rr->raw.assign(r.wire.begin() + static_cast<std::ptrdiff_t>(rdata_start),
                     r.wire.begin() + static_cast<std::ptrdiff_t>(rdata_start + rdlen));
      break;
  }
  r.pos = rdata_start + rdlen;
  return true;
}

} // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  std::vector<std::uint8_t> out;
  put_u16(out, msg.id);
  std::uint16_t flags = 0;
  if (msg.is_response) flags |= 0x8000;
  flags |= static_cast<std::uint16_t>((msg.opcode & 0xF) << 11);
  if (msg.authoritative) flags |= 0x0400;
  if (msg.truncated) flags |= 0x0200;
  if (msg.recursion_desired) flags |= 0x0100;
  if (msg.recursion_available) flags |= 0x0080;
  flags |= static_cast<std::uint16_t>(msg.rcode) & 0xF;
  put_u16(out, flags);
  put_u16(out, static_cast<std::uint16_t>(msg.questions.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.answers.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.authority.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.additional.size()));
  for (const auto& q : msg.questions) {
    put_name(out, q.name);
    put_u16(out, q.qtype);
    put_u16(out, q.qclass);
  }
  for (const auto& rr : msg.answers) put_rr(out, rr);
  for (const auto& rr : msg.authority) put_rr(out, rr);
  for (const auto& rr : msg.additional) put_rr(out, rr);
  return out;
}

std::optional<Message> decode(std::span<const std::uint8_t> wire) {
  Reader r{wire};
  Message msg;
  std::uint16_t flags = 0, qd = 0, an = 0, ns = 0, ar = 0;
  if (!r.u16(&msg.id) || !r.u16(&flags) || !r.u16(&qd) || !r.u16(&an) ||
      !r.u16(&ns) || !r.u16(&ar))
    return std::nullopt;
  msg.is_response = flags & 0x8000;
  msg.opcode = static_cast<std::uint8_t>((flags >> 11) & 0xF);
  msg.authoritative = flags & 0x0400;
  msg.truncated = flags & 0x0200;
  msg.recursion_desired = flags & 0x0100;
  msg.recursion_available = flags & 0x0080;
  msg.rcode = static_cast<RCode>(flags & 0xF);
  for (int i = 0; i < qd; ++i) {
    Question q;
    if (!r.name(&q.name) || !r.u16(&q.qtype) || !r.u16(&q.qclass))
      return std::nullopt;
    msg.questions.push_back(std::move(q));
  }
  auto read_section = [&](int count, std::vector<ResourceRecord>* section) {
    for (int i = 0; i < count; ++i) {
      ResourceRecord rr;
      if (!read_rr(r, &rr)) return false;
      section->push_back(std::move(rr));
    }
    return true;
  };
  if (!read_section(an, &msg.answers) || !read_section(ns, &msg.authority) ||
      !read_section(ar, &msg.additional))
    return std::nullopt;
  return msg;
}

} // namespace dsentinel::dnswire
