#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace qrw {

/// Flat `key = value` configuration. Lines starting with '#' are comments;
/// later assignments to the same key win.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text);
  /// Throws IoError if the file cannot be read, FormatError on a line
  /// without '='.
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  /// Applies a `key=value` override; throws InputError if '=' is missing.
  void apply_override(std::string_view assignment);
  /// Copies every entry of `other` over this one.
  void merge(const KeyValueConfig& other);

  bool contains(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Serializes sorted by key, one `key = value` per line.
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace qrw
