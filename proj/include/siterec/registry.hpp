#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "siterec/geo.hpp"

namespace siterec {

struct ModelManifest {
  std::string region_id;
  std::uint32_t version = 0;
  std::string content_hash;  // hex-encoded SHA-256 of the blob
  std::uint64_t byte_size = 0;
};

using Blob = std::shared_ptr<const std::vector<std::uint8_t>>;

struct FetchResult {
  bool not_modified = false;
  ModelManifest manifest;
  Blob blob;  // null when not_modified
};

// Versioned per-region model store. Writes are serialized by a mutex;
// published blobs are immutable, so readers hand out shared_ptrs without
// copying. Keeps the last kRetainedVersions versions per region.
class Registry {
 public:
  static constexpr std::size_t kRetainedVersions = 3;

  explicit Registry(Tiling tiling) : tiling_(std::move(tiling)) {}

  // Blob must deserialize as a RegionModel whose region_id matches.
  ModelManifest publish_model(const std::string& region_id,
                              std::vector<std::uint8_t> blob);

  // Resolves the region for (lat, lon) with hysteresis and returns the
  // latest manifest. Throws OutOfCoverage / NoModelPublished.
  ModelManifest lookup_region(
      double lat, double lon,
      const std::optional<std::string>& current = {}) const;

  // Latest (or requested) blob; NotModified when if_hash matches.
  FetchResult fetch_model(const std::string& region_id,
                          std::optional<std::uint32_t> version = {},
                          const std::optional<std::string>& if_hash = {}) const;

  const Tiling& tiling() const { return tiling_; }

  // All retained manifests as a JSON index for offline inspection.
  std::string index_json() const;

 private:
  struct Entry {
    ModelManifest manifest;
    Blob blob;
  };

  Tiling tiling_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<Entry>> entries_;  // oldest first
};

// Length-prefixed framed request/response protocol over TCP.
// A frame is u32 header_len | JSON header | u64 payload_len | payload,
// all integers little-endian. Request types: PUBLISH, LOOKUP, FETCH.
// Responses: MANIFEST, DATA, NOT_MODIFIED, ERROR.
class RegistryServer {
 public:
  // port 0 binds an ephemeral port; see port() after construction.
  RegistryServer(Registry& registry, const std::string& listen_addr,
                 std::uint16_t port);
  ~RegistryServer();

  RegistryServer(const RegistryServer&) = delete;
  RegistryServer& operator=(const RegistryServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  Registry& registry_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread accept_thread_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::vector<int> conn_fds_;
  bool stopped_ = false;
};

class RegistryClient {
 public:
  RegistryClient(const std::string& host, std::uint16_t port);
  ~RegistryClient();

  RegistryClient(const RegistryClient&) = delete;
  RegistryClient& operator=(const RegistryClient&) = delete;

  ModelManifest publish(const std::string& region_id,
                        const std::vector<std::uint8_t>& blob);
  ModelManifest lookup(double lat, double lon,
                       const std::optional<std::string>& current = {});
  FetchResult fetch(const std::string& region_id,
                    std::optional<std::uint32_t> version = {},
                    const std::optional<std::string>& if_hash = {});

 private:
  int fd_ = -1;
};

}  // namespace siterec
