#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "config.hpp"

namespace bsop::cli {

// Scientific notation with 17 significant digits.
std::string num(double v);

// Comma-separated file whose first line is "# config_hash=<hash>".
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& hash, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& fields);

 private:
  std::FILE* f_ = nullptr;
  std::size_t columns_ = 0;
};

// Ordered list of asserted checks, each tagged with the property it tests.
class Checks {
 public:
  void add(const std::string& name, const std::string& anchor, bool pass, double value, double limit,
           const std::string& relation);
  void add_flag(const std::string& name, const std::string& anchor, bool pass);
  void add_error(const std::string& name, const std::string& anchor, const std::string& kind,
                 const std::string& message);
  void info(const std::string& name, const Json& value);

  bool all_pass() const { return failures_ == 0; }
  int failures() const { return failures_; }
  const Json& json() const { return list_; }
  const Json& diagnostics() const { return info_; }

 private:
  Json list_ = Json::array();
  Json info_ = Json::object();
  int failures_ = 0;
};

void write_json(const std::string& path, const Json& j);

}  // namespace bsop::cli
