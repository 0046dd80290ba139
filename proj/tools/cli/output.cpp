#include "output.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bsop::cli {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& hash, const std::vector<std::string>& columns)
    : columns_(columns.size()) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_) throw std::runtime_error("cannot write '" + path + "'");
  std::fprintf(f_, "# config_hash=%s\n", hash.c_str());
  for (std::size_t i = 0; i < columns.size(); ++i) std::fprintf(f_, i ? ",%s" : "%s", columns[i].c_str());
  std::fputc('\n', f_);
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(num(v));
  row(fields);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) std::fprintf(f_, i ? ",%s" : "%s", fields[i].c_str());
  std::fputc('\n', f_);
}

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void Checks::add(const std::string& name, const std::string& anchor, bool pass, double value, double limit,
                 const std::string& relation) {
  list_.push_back({{"name", name},
                   {"anchor", anchor},
                   {"pass", pass},
                   {"value", number(value)},
                   {"relation", relation},
                   {"limit", number(limit)}});
  if (!pass) ++failures_;
}

void Checks::add_flag(const std::string& name, const std::string& anchor, bool pass) {
  list_.push_back({{"name", name}, {"anchor", anchor}, {"pass", pass}});
  if (!pass) ++failures_;
}

void Checks::add_error(const std::string& name, const std::string& anchor, const std::string& kind,
                       const std::string& message) {
  list_.push_back({{"name", name}, {"anchor", anchor}, {"pass", false}, {"error", kind}, {"message", message}});
  ++failures_;
}

void Checks::info(const std::string& name, const Json& value) { info_[name] = value; }

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace bsop::cli
