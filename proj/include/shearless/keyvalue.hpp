#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace shearless::io {

/// Minimal "key = value" text format used for headers and manifests. Blank
/// lines and lines starting with '#' are ignored; keys are unique.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(const std::string& text, const std::string& source = "<text>");
  static KeyValueDoc read(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  std::vector<double> nums(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> values_;
};

}  // namespace shearless::io
