#pragma once

// JSON and CSV plumbing shared by the config loaders and the CLI.

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace sigmaflow::io {

using nlohmann::json;

// Throws ConfigError naming the first key of `obj` not in `allowed`.
void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view context);
void require_object(const json& obj, std::string_view context);

double get_number(const json& obj, std::string_view key, std::string_view context);
double get_number_or(const json& obj, std::string_view key, double fallback,
                     std::string_view context);
long get_integer(const json& obj, std::string_view key, std::string_view context);
long get_integer_or(const json& obj, std::string_view key, long fallback,
                    std::string_view context);
bool get_bool_or(const json& obj, std::string_view key, bool fallback, std::string_view context);
std::string get_string(const json& obj, std::string_view key, std::string_view context);
std::string get_string_or(const json& obj, std::string_view key, std::string fallback,
                          std::string_view context);
std::vector<double> get_vector(const json& obj, std::string_view key, std::string_view context);
// Square matrix as nested arrays, or a scalar for 1x1.
Eigen::MatrixXd get_matrix(const json& obj, std::string_view key, std::string_view context);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

// %.17g formatting so round trips are exact.
std::string format_double(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  void add_numeric_row(const std::vector<double>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace sigmaflow::io
