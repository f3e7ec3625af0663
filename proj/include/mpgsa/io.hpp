#pragma once

// File formats:
//
//   MPGS1 binary   "MPGS1", u32 record count, then per record an 8-byte
//                  NUL-padded role tag, u64 rows, u64 cols and rows*cols
//                  little-endian float64 values in column-major order.
//   matrix CSV     one row per line, 17 significant digits.
//   config         "type key = value" lines, type in {int, double, bool,
//                  string}; '#' starts a comment.
//   tables         CSV or JSON (array of objects) with a fixed column order.

#include "mpgsa/instances.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mpgsa {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double value);

// --- MPGS1 -----------------------------------------------------------------

inline constexpr char kMagic[5] = {'M', 'P', 'G', 'S', '1'};

struct Record {
  std::string role;  // at most 8 bytes
  Matrix data;
};

void write_records(const std::string& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::string& path);
const Record* find_record(const std::vector<Record>& records,
                          const std::string& role);

/// An SGEP instance plus optional reference data, stored under the roles
/// A, B, PARAMS ([lambda, K or 0, p, global_opt or NaN, seed]), XBAR, X0.
struct InstanceFile {
  SgepInstance instance;
  std::optional<double> global_opt;
  std::uint64_t seed = 0;
  std::optional<Matrix> xbar;
  std::optional<Matrix> x0;
};

void write_instance(const std::string& path, const InstanceFile& file);
InstanceFile read_instance(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// --- config ----------------------------------------------------------------

using ConfigValue = std::variant<long long, double, bool, std::string>;

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  /// Accepts int entries as well.
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::string> get_string(const std::string& key) const;
  const std::map<std::string, ConfigValue>& entries() const { return values_; }

 private:
  std::map<std::string, ConfigValue> values_;
};

// --- tables ----------------------------------------------------------------

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class TableFormat { Csv, Json };
TableFormat parse_table_format(const std::string& name);

std::string render_table(const Table& table, TableFormat format);
void write_text(const std::string& path, const std::string& text);

/// Per-iteration log without wall-clock columns.
Table iterate_table(const std::vector<IterateRecord>& log);

}  // namespace mpgsa
