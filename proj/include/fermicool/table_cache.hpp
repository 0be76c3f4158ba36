#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace fermicool {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

/// Disk memo for dense tables. Files are named <kind>-<hash of key>.bin and
/// carry the full key, which is compared on load. An empty directory turns
/// the cache off.
class TableCache {
 public:
  explicit TableCache(std::string dir) : dir_(std::move(dir)) {}

  bool enabled() const { return !dir_.empty(); }
  std::string path(const std::string& kind, const std::string& key) const;

  std::optional<Eigen::MatrixXd> load(const std::string& kind, const std::string& key) const;
  void store(const std::string& kind, const std::string& key, const Eigen::MatrixXd& table) const;
  Eigen::MatrixXd get(const std::string& kind, const std::string& key,
                      const std::function<Eigen::MatrixXd()>& build) const;

 private:
  std::string dir_;
};

}  // namespace fermicool
