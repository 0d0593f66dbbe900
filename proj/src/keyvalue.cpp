#include "shearless/keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "shearless/errors.hpp"

namespace shearless::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueDoc KeyValueDoc::parse(const std::string& text, const std::string& source) {
  KeyValueDoc doc;
  doc.source_ = source;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw FormatError(source + ":" + std::to_string(line_no) + ": empty key");
    if (doc.values_.count(key))
      throw FormatError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    doc.values_[key] = Entry{trim(t.substr(eq + 1)), line_no};
  }
  return doc;
}

KeyValueDoc KeyValueDoc::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueDoc::fail(const std::string& key, const std::string& what) const {
  auto it = values_.find(key);
  const std::string where = it == values_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
  throw FormatError(where + ": field '" + key + "' " + what);
}

const std::string& KeyValueDoc::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(key, "is missing");
  return it->second.value;
}

double KeyValueDoc::num(const std::string& key) const {
  const auto v = nums(key);
  if (v.size() != 1) fail(key, "must hold exactly one number");
  return v[0];
}

long KeyValueDoc::integer(const std::string& key) const {
  const double v = num(key);
  const long r = static_cast<long>(v);
  if (static_cast<double>(r) != v) fail(key, "must be an integer");
  return r;
}

std::vector<double> KeyValueDoc::nums(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(key)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(w, &used));
      if (used != w.size()) fail(key, "has a malformed number '" + w + "'");
    } catch (const std::invalid_argument&) {
      fail(key, "has a malformed number '" + w + "'");
    } catch (const std::out_of_range&) {
      fail(key, "has an out-of-range number '" + w + "'");
    }
  }
  return out;
}

std::vector<std::string> KeyValueDoc::words(const std::string& key) const {
  std::istringstream in(str(key));
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace shearless::io
