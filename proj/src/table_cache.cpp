#include "fermicool/table_cache.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fermicool/errors.hpp"

namespace fermicool {

namespace {
constexpr char kMagic[8] = {'F', 'C', 'T', 'A', 'B', 'L', 'E', '1'};
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string TableCache::path(const std::string& kind, const std::string& key) const {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return (std::filesystem::path(dir_) / (kind + "-" + hex + ".bin")).string();
}

std::optional<Eigen::MatrixXd> TableCache::load(const std::string& kind, const std::string& key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(path(kind, key), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t key_size = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&key_size), sizeof key_size);
  if (!in || !std::equal(magic, magic + 8, kMagic) || key_size > (1u << 20)) return std::nullopt;
  std::string stored(key_size, '\0');
  in.read(stored.data(), static_cast<std::streamsize>(key_size));
  if (stored != key) return std::nullopt;
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) return std::nullopt;
  Eigen::MatrixXd table(rows, cols);
  in.read(reinterpret_cast<char*>(table.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols));
  if (!in) return std::nullopt;
  return table;
}

void TableCache::store(const std::string& kind, const std::string& key, const Eigen::MatrixXd& table) const {
  if (!enabled()) return;
  std::filesystem::create_directories(dir_);
  const std::string final_path = path(kind, key);
  const std::string tmp = final_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write table cache " + tmp);
    const std::uint64_t key_size = key.size();
    const std::int64_t rows = table.rows(), cols = table.cols();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&key_size), sizeof key_size);
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(table.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols));
  }
  std::filesystem::rename(tmp, final_path);
}

Eigen::MatrixXd TableCache::get(const std::string& kind, const std::string& key,
                                const std::function<Eigen::MatrixXd()>& build) const {
  if (auto hit = load(kind, key)) return *hit;
  Eigen::MatrixXd table = build();
  store(kind, key, table);
  return table;
}

}  // namespace fermicool
