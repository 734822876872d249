#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

namespace eot_cli {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string json_number(double x) {
  if (!std::isfinite(x)) return "\"" + fmt(x) + "\"";
  return fmt(x);
}

namespace {

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

JsonObject& JsonObject::number(const std::string& key, double x) { return raw(key, json_number(x)); }

JsonObject& JsonObject::integer(const std::string& key, long long x) {
  return raw(key, std::to_string(x));
}

JsonObject& JsonObject::boolean(const std::string& key, bool b) { return raw(key, b ? "true" : "false"); }

JsonObject& JsonObject::string(const std::string& key, const std::string& s) { return raw(key, quote(s)); }

std::string json_array(const double* xs, std::size_t n) {
  std::string out = "[";
  for (std::size_t k = 0; k < n; ++k) {
    if (k) out += ", ";
    out += json_number(xs[k]);
  }
  return out + "]";
}

JsonObject& JsonObject::numbers(const std::string& key, const double* xs, std::size_t n) {
  return raw(key, json_array(xs, n));
}

JsonObject& JsonObject::object(const std::string& key, const JsonObject& o) { return raw(key, o.dump()); }

JsonObject& JsonObject::objects(const std::string& key, const std::vector<JsonObject>& os) {
  std::string out = "[";
  for (std::size_t k = 0; k < os.size(); ++k) {
    if (k) out += ",\n    ";
    out += os[k].dump();
  }
  return raw(key, out + "]");
}

JsonObject& JsonObject::raw(const std::string& key, std::string json) {
  fields_.emplace_back(key, std::move(json));
  return *this;
}

std::string JsonObject::dump(int indent) const {
  const std::string sep = indent > 0 ? ",\n" + std::string(indent, ' ') : ", ";
  std::string out = indent > 0 ? "{\n" + std::string(indent, ' ') : "{";
  for (std::size_t k = 0; k < fields_.size(); ++k) {
    if (k) out += sep;
    out += quote(fields_[k].first) + ": " + fields_[k].second;
  }
  out += indent > 0 ? "\n}\n" : "}";
  return out;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace eot_cli
