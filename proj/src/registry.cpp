#include "siterec/registry.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

#include <json.hpp>

#include "siterec/classifier.hpp"

namespace siterec {

// ---------------------------------------------------------------- Registry

ModelManifest Registry::publish_model(const std::string& region_id,
                                      std::vector<std::uint8_t> blob) {
  bool known = false;
  for (const auto& r : tiling_.regions) known |= (r.region_id == region_id);
  if (!known) throw RegionUnknown("region '" + region_id + "' not in tiling");
  RegionModel model = deserialize_model(blob);  // throws CorruptModel
  if (model.region_id != region_id) {
    throw CorruptModel("blob region_id '" + model.region_id +
                       "' does not match '" + region_id + "'");
  }

  ModelManifest m;
  m.region_id = region_id;
  m.content_hash = sha256_hex(blob.data(), blob.size());
  m.byte_size = blob.size();

  std::lock_guard lock(mu_);
  auto& versions = entries_[region_id];
  m.version = versions.empty() ? 1 : versions.back().manifest.version + 1;
  versions.push_back(
      Entry{m, std::make_shared<const std::vector<std::uint8_t>>(
                   std::move(blob))});
  while (versions.size() > kRetainedVersions) versions.erase(versions.begin());
  return m;
}

ModelManifest Registry::lookup_region(
    double lat, double lon, const std::optional<std::string>& current) const {
  const Region& r = region_for_point(tiling_, GeoPoint{lat, lon}, current);
  std::lock_guard lock(mu_);
  auto it = entries_.find(r.region_id);
  if (it == entries_.end() || it->second.empty()) {
    throw NoModelPublished("region '" + r.region_id + "' has no model");
  }
  return it->second.back().manifest;
}

FetchResult Registry::fetch_model(const std::string& region_id,
                                  std::optional<std::uint32_t> version,
                                  const std::optional<std::string>& if_hash)
    const {
  Entry entry;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(region_id);
    if (it == entries_.end() || it->second.empty()) {
      throw RegionUnknown("no models for region '" + region_id + "'");
    }
    const auto& versions = it->second;
    if (version) {
      const Entry* found = nullptr;
      for (const auto& e : versions) {
        if (e.manifest.version == *version) found = &e;
      }
      if (!found) {
        throw VersionUnknown("region '" + region_id + "' version " +
                             std::to_string(*version));
      }
      entry = *found;
    } else {
      entry = versions.back();
    }
  }
  FetchResult res;
  res.manifest = entry.manifest;
  if (if_hash && *if_hash == entry.manifest.content_hash) {
    res.not_modified = true;
    return res;
  }
  res.blob = entry.blob;
  return res;
}

std::string Registry::index_json() const {
  nlohmann::json j;
  j["regions"] = nlohmann::json::object();
  std::lock_guard lock(mu_);
  for (const auto& [region_id, versions] : entries_) {
    auto arr = nlohmann::json::array();
    for (const auto& e : versions) {
      arr.push_back({{"version", e.manifest.version},
                     {"content_hash", e.manifest.content_hash},
                     {"byte_size", e.manifest.byte_size}});
    }
    j["regions"][region_id] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------ wire format

namespace {

nlohmann::json manifest_to_json(const ModelManifest& m) {
  return {{"region_id", m.region_id},
          {"version", m.version},
          {"content_hash", m.content_hash},
          {"byte_size", m.byte_size}};
}

ModelManifest manifest_from_json(const nlohmann::json& j) {
  ModelManifest m;
  m.region_id = j.at("region_id").get<std::string>();
  m.version = j.at("version").get<std::uint32_t>();
  m.content_hash = j.at("content_hash").get<std::string>();
  m.byte_size = j.at("byte_size").get<std::uint64_t>();
  return m;
}

bool read_exact(int fd, void* buf, std::size_t len) {
  auto* p = static_cast<std::uint8_t*>(buf);
  while (len > 0) {
    const ssize_t n = ::read(fd, p, len);
    if (n <= 0) return false;
    p += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

void write_all(int fd, const void* buf, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(buf);
  while (len > 0) {
    const ssize_t n = ::write(fd, p, len);
    if (n <= 0) throw ProtocolError("short write on socket");
    p += n;
    len -= static_cast<std::size_t>(n);
  }
}

constexpr std::uint64_t kMaxHeader = 1 << 20;
constexpr std::uint64_t kMaxPayload = std::uint64_t(1) << 32;

void send_frame(int fd, const nlohmann::json& header,
                const std::uint8_t* payload, std::size_t payload_len) {
  const std::string h = header.dump();
  std::vector<std::uint8_t> buf;
  buf.reserve(12 + h.size() + payload_len);
  const std::uint32_t hlen = static_cast<std::uint32_t>(h.size());
  for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(hlen >> (8 * i)));
  buf.insert(buf.end(), h.begin(), h.end());
  const std::uint64_t plen = payload_len;
  for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(plen >> (8 * i)));
  if (payload_len > 0) buf.insert(buf.end(), payload, payload + payload_len);
  write_all(fd, buf.data(), buf.size());
}

// false on clean EOF before the first byte of a frame.
bool recv_frame(int fd, nlohmann::json& header,
                std::vector<std::uint8_t>& payload) {
  std::uint8_t hdr4[4];
  if (!read_exact(fd, hdr4, 4)) return false;
  std::uint32_t hlen = 0;
  for (int i = 0; i < 4; ++i) hlen |= std::uint32_t(hdr4[i]) << (8 * i);
  if (hlen > kMaxHeader) throw ProtocolError("oversized frame header");
  std::string h(hlen, '\0');
  if (!read_exact(fd, h.data(), hlen)) throw ProtocolError("truncated header");
  std::uint8_t len8[8];
  if (!read_exact(fd, len8, 8)) throw ProtocolError("truncated frame");
  std::uint64_t plen = 0;
  for (int i = 0; i < 8; ++i) plen |= std::uint64_t(len8[i]) << (8 * i);
  if (plen > kMaxPayload) throw ProtocolError("oversized payload");
  payload.resize(plen);
  if (plen > 0 && !read_exact(fd, payload.data(), plen)) {
    throw ProtocolError("truncated payload");
  }
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad frame header: ") + e.what());
  }
  return true;
}

struct NamedError {
  const char* code;
  std::string message;
};

void send_error(int fd, const char* code, const std::string& message) {
  send_frame(fd, {{"type", "ERROR"}, {"code", code}, {"message", message}},
             nullptr, 0);
}

[[noreturn]] void rethrow_coded(const std::string& code,
                                const std::string& msg) {
  if (code == "OutOfCoverage") throw OutOfCoverage(msg);
  if (code == "NoModelPublished") throw NoModelPublished(msg);
  if (code == "RegionUnknown") throw RegionUnknown(msg);
  if (code == "VersionUnknown") throw VersionUnknown(msg);
  if (code == "CorruptModel") throw CorruptModel(msg);
  throw ProtocolError(code + ": " + msg);
}

}  // namespace

// ------------------------------------------------------------------ server

RegistryServer::RegistryServer(Registry& registry,
                               const std::string& listen_addr,
                               std::uint16_t port)
    : registry_(registry) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ProtocolError("socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, listen_addr.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ProtocolError("bad listen address '" + listen_addr + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
          0 ||
      ::listen(listen_fd_, 64) < 0) {
    ::close(listen_fd_);
    throw ProtocolError("bind/listen failed on " + listen_addr + ":" +
                        std::to_string(port));
  }
  socklen_t alen = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &alen);
  port_ = ntohs(addr.sin_port);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

RegistryServer::~RegistryServer() { stop(); }

void RegistryServer::stop() {
  {
    std::lock_guard lock(workers_mu_);
    if (stopped_) return;
    stopped_ = true;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void RegistryServer::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;  // listener closed
    std::lock_guard lock(workers_mu_);
    if (stopped_) {
      ::close(fd);
      return;
    }
    conn_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void RegistryServer::serve_connection(int fd) {
  nlohmann::json header;
  std::vector<std::uint8_t> payload;
  try {
    while (recv_frame(fd, header, payload)) {
      const std::string type = header.value("type", "");
      try {
        if (type == "PUBLISH") {
          const auto m = registry_.publish_model(
              header.at("region_id").get<std::string>(), std::move(payload));
          nlohmann::json rep = manifest_to_json(m);
          rep["type"] = "MANIFEST";
          send_frame(fd, rep, nullptr, 0);
        } else if (type == "LOOKUP") {
          std::optional<std::string> current;
          if (header.contains("current")) {
            current = header.at("current").get<std::string>();
          }
          const auto m = registry_.lookup_region(
              header.at("lat").get<double>(), header.at("lon").get<double>(),
              current);
          nlohmann::json rep = manifest_to_json(m);
          rep["type"] = "MANIFEST";
          send_frame(fd, rep, nullptr, 0);
        } else if (type == "FETCH") {
          std::optional<std::uint32_t> version;
          if (header.contains("version")) {
            version = header.at("version").get<std::uint32_t>();
          }
          std::optional<std::string> if_hash;
          if (header.contains("if_hash")) {
            if_hash = header.at("if_hash").get<std::string>();
          }
          const auto res = registry_.fetch_model(
              header.at("region_id").get<std::string>(), version, if_hash);
          nlohmann::json rep = manifest_to_json(res.manifest);
          if (res.not_modified) {
            rep["type"] = "NOT_MODIFIED";
            send_frame(fd, rep, nullptr, 0);
          } else {
            rep["type"] = "DATA";
            send_frame(fd, rep, res.blob->data(), res.blob->size());
          }
        } else {
          send_error(fd, "ProtocolError", "unknown request type '" + type +
                                              "'");
        }
      } catch (const OutOfCoverage& e) {
        send_error(fd, "OutOfCoverage", e.what());
      } catch (const NoModelPublished& e) {
        send_error(fd, "NoModelPublished", e.what());
      } catch (const RegionUnknown& e) {
        send_error(fd, "RegionUnknown", e.what());
      } catch (const VersionUnknown& e) {
        send_error(fd, "VersionUnknown", e.what());
      } catch (const CorruptModel& e) {
        send_error(fd, "CorruptModel", e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(fd, "ProtocolError", e.what());
      }
    }
  } catch (const std::exception&) {
    // connection-level failure: drop the connection
  }
  {
    std::lock_guard lock(workers_mu_);
    conn_fds_.erase(std::find(conn_fds_.begin(), conn_fds_.end(), fd));
  }
  ::close(fd);
}

// ------------------------------------------------------------------ client

RegistryClient::RegistryClient(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ProtocolError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw ProtocolError("bad host address '" + host + "'");
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd_);
    throw ProtocolError("connect to " + host + ":" + std::to_string(port) +
                        " failed");
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

RegistryClient::~RegistryClient() {
  if (fd_ >= 0) ::close(fd_);
}

namespace {

nlohmann::json roundtrip(int fd, const nlohmann::json& req,
                         const std::uint8_t* payload, std::size_t payload_len,
                         std::vector<std::uint8_t>& reply_payload) {
  send_frame(fd, req, payload, payload_len);
  nlohmann::json header;
  if (!recv_frame(fd, header, reply_payload)) {
    throw ProtocolError("connection closed by server");
  }
  if (header.value("type", "") == "ERROR") {
    rethrow_coded(header.value("code", "ProtocolError"),
                  header.value("message", ""));
  }
  return header;
}

}  // namespace

ModelManifest RegistryClient::publish(const std::string& region_id,
                                      const std::vector<std::uint8_t>& blob) {
  std::vector<std::uint8_t> reply;
  const auto h = roundtrip(fd_, {{"type", "PUBLISH"}, {"region_id", region_id}},
                           blob.data(), blob.size(), reply);
  return manifest_from_json(h);
}

ModelManifest RegistryClient::lookup(double lat, double lon,
                                     const std::optional<std::string>& current) {
  nlohmann::json req{{"type", "LOOKUP"}, {"lat", lat}, {"lon", lon}};
  if (current) req["current"] = *current;
  std::vector<std::uint8_t> reply;
  const auto h = roundtrip(fd_, req, nullptr, 0, reply);
  return manifest_from_json(h);
}

FetchResult RegistryClient::fetch(const std::string& region_id,
                                  std::optional<std::uint32_t> version,
                                  const std::optional<std::string>& if_hash) {
  nlohmann::json req{{"type", "FETCH"}, {"region_id", region_id}};
  if (version) req["version"] = *version;
  if (if_hash) req["if_hash"] = *if_hash;
  std::vector<std::uint8_t> reply;
  const auto h = roundtrip(fd_, req, nullptr, 0, reply);
  FetchResult res;
  res.manifest = manifest_from_json(h);
  if (h.value("type", "") == "NOT_MODIFIED") {
    res.not_modified = true;
  } else {
    res.blob = std::make_shared<const std::vector<std::uint8_t>>(
        std::move(reply));
  }
  return res;
}

}  // namespace siterec
