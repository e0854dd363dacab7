#include "sigmaflow/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sigmaflow/error.hpp"

namespace sigmaflow::io {

namespace {

std::string where(std::string_view context, std::string_view key) {
  std::string s(context);
  if (!s.empty()) s += '.';
  s += key;
  return s;
}

const json& member(const json& obj, std::string_view key, std::string_view context) {
  require_object(obj, context);
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ConfigError("missing key '" + where(context, key) + "'");
  return *it;
}

double as_number(const json& v, std::string_view context, std::string_view key) {
  if (!v.is_number()) throw ConfigError("key '" + where(context, key) + "' must be a number");
  return v.get<double>();
}

}  // namespace

void require_object(const json& obj, std::string_view context) {
  if (!obj.is_object())
    throw ConfigError("'" + std::string(context.empty() ? "<root>" : context) +
                      "' must be a JSON object");
}

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view context) {
  require_object(obj, context);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + where(context, it.key()) + "'");
  }
}

double get_number(const json& obj, std::string_view key, std::string_view context) {
  return as_number(member(obj, key, context), context, key);
}

double get_number_or(const json& obj, std::string_view key, double fallback,
                     std::string_view context) {
  require_object(obj, context);
  if (!obj.contains(std::string(key))) return fallback;
  return get_number(obj, key, context);
}

long get_integer(const json& obj, std::string_view key, std::string_view context) {
  const json& v = member(obj, key, context);
  if (!v.is_number_integer())
    throw ConfigError("key '" + where(context, key) + "' must be an integer");
  return v.get<long>();
}

long get_integer_or(const json& obj, std::string_view key, long fallback,
                    std::string_view context) {
  require_object(obj, context);
  if (!obj.contains(std::string(key))) return fallback;
  return get_integer(obj, key, context);
}

bool get_bool_or(const json& obj, std::string_view key, bool fallback, std::string_view context) {
  require_object(obj, context);
  if (!obj.contains(std::string(key))) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_boolean()) throw ConfigError("key '" + where(context, key) + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, std::string_view key, std::string_view context) {
  const json& v = member(obj, key, context);
  if (!v.is_string()) throw ConfigError("key '" + where(context, key) + "' must be a string");
  return v.get<std::string>();
}

std::string get_string_or(const json& obj, std::string_view key, std::string fallback,
                          std::string_view context) {
  require_object(obj, context);
  if (!obj.contains(std::string(key))) return fallback;
  return get_string(obj, key, context);
}

std::vector<double> get_vector(const json& obj, std::string_view key, std::string_view context) {
  const json& v = member(obj, key, context);
  if (!v.is_array()) throw ConfigError("key '" + where(context, key) + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) out.push_back(as_number(x, context, key));
  return out;
}

Eigen::MatrixXd get_matrix(const json& obj, std::string_view key, std::string_view context) {
  const json& v = member(obj, key, context);
  if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty())
    throw ConfigError("key '" + where(context, key) + "' must be a number or square array");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ConfigError("key '" + where(context, key) + "' must be a square array");
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = as_number(row[static_cast<std::size_t>(j)], context, key);
  }
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

void CsvWriter::add_numeric_row(const std::vector<double>& cells) {
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (double x : cells) row.push_back(format_double(x));
  rows_.push_back(std::move(row));
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  auto emit = [&os](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return os.str();
}

void CsvWriter::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << str();
}

}  // namespace sigmaflow::io
