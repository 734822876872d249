#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace eot_cli {

/// %.17g, with inf / -inf / nan spelled out.
std::string fmt(double x);

/// Insertion-ordered JSON object; floats keep 17 significant digits, which
/// a generic serializer would shorten.
class JsonObject {
 public:
  JsonObject& number(const std::string& key, double x);
  JsonObject& integer(const std::string& key, long long x);
  JsonObject& boolean(const std::string& key, bool b);
  JsonObject& string(const std::string& key, const std::string& s);
  JsonObject& numbers(const std::string& key, const double* xs, std::size_t n);
  JsonObject& object(const std::string& key, const JsonObject& o);
  JsonObject& objects(const std::string& key, const std::vector<JsonObject>& os);
  JsonObject& raw(const std::string& key, std::string json);

  std::string dump(int indent = 0) const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

std::string json_number(double x);
std::string json_array(const double* xs, std::size_t n);

/// Writes `text` to dir/name; throws std::runtime_error on failure.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace eot_cli
