#include "mpgsa/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpgsa {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError(path + ": truncated file");
  }
  return to_little(v);
}

}  // namespace

void write_records(const std::string& path,
                   const std::vector<Record>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(records.size()));
  for (const Record& rec : records) {
    if (rec.role.size() > 8) throw FormatError("role tag too long: " + rec.role);
    char tag[8] = {};
    std::memcpy(tag, rec.role.data(), rec.role.size());
    os.write(tag, 8);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(rec.data.rows()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(rec.data.cols()));
    const double* d = rec.data.data();
    for (Index i = 0; i < rec.data.size(); ++i) put<double>(os, d[i]);
  }
  if (!os) throw FormatError("write failed: " + path);
}

std::vector<Record> read_records(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError(path + ": bad magic");
  }
  const auto count = get<std::uint32_t>(is, path);
  std::vector<Record> out;
  for (std::uint32_t r = 0; r < count; ++r) {
    char tag[8];
    if (!is.read(tag, 8)) throw FormatError(path + ": truncated file");
    Record rec;
    rec.role.assign(tag, strnlen(tag, 8));
    const auto rows = get<std::uint64_t>(is, path);
    const auto cols = get<std::uint64_t>(is, path);
    if (rows > (1u << 20) || cols > (1u << 20)) {
      throw FormatError(path + ": implausible dimensions");
    }
    rec.data.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    double* d = rec.data.data();
    for (Index i = 0; i < rec.data.size(); ++i) d[i] = get<double>(is, path);
    out.push_back(std::move(rec));
  }
  return out;
}

const Record* find_record(const std::vector<Record>& records,
                          const std::string& role) {
  for (const Record& r : records)
    if (r.role == role) return &r;
  return nullptr;
}

void write_instance(const std::string& path, const InstanceFile& file) {
  const SgepInstance& in = file.instance;
  Matrix params(5, 1);
  params << in.lambda, in.K ? double(*in.K) : 0.0, double(in.p),
      file.global_opt ? *file.global_opt
                      : std::numeric_limits<double>::quiet_NaN(),
      double(file.seed);
  std::vector<Record> recs = {{"A", in.A}, {"B", in.B}, {"PARAMS", params}};
  if (file.xbar) recs.push_back({"XBAR", *file.xbar});
  if (file.x0) recs.push_back({"X0", *file.x0});
  write_records(path, recs);
}

InstanceFile read_instance(const std::string& path) {
  const auto recs = read_records(path);
  const Record* a = find_record(recs, "A");
  const Record* b = find_record(recs, "B");
  const Record* params = find_record(recs, "PARAMS");
  if (!a || !b || !params) {
    throw FormatError(path + ": missing A, B or PARAMS record");
  }
  if (params->data.size() < 5) throw FormatError(path + ": short PARAMS");
  const double* p = params->data.data();
  InstanceFile out;
  out.instance.A = a->data;
  out.instance.B = b->data;
  out.instance.lambda = p[0];
  if (p[1] > 0) out.instance.K = static_cast<Index>(p[1]);
  out.instance.p = static_cast<Index>(p[2]);
  if (!std::isnan(p[3])) out.global_opt = p[3];
  out.seed = static_cast<std::uint64_t>(p[4]);
  if (const Record* r = find_record(recs, "XBAR")) out.xbar = r->data;
  if (const Record* r = find_record(recs, "X0")) out.x0 = r->data;
  return out;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ostringstream os;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
  write_text(path, os.str());
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

// --- config ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + "missing '='");
    std::istringstream lhs(line.substr(0, eq));
    std::string type, key, extra;
    lhs >> type >> key;
    if (type.empty() || key.empty() || (lhs >> extra)) {
      throw FormatError(where + "expected 'type key = value'");
    }
    const std::string value = trim(line.substr(eq + 1));
    try {
      std::size_t used = 0;
      if (type == "int") {
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        cfg.values_[key] = v;
      } else if (type == "double") {
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        cfg.values_[key] = v;
      } else if (type == "bool") {
        if (value == "true") cfg.values_[key] = true;
        else if (value == "false") cfg.values_[key] = false;
        else throw std::invalid_argument("bool");
      } else if (type == "string") {
        cfg.values_[key] = value;
      } else {
        throw FormatError(where + "unknown type '" + type + "'");
      }
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError(where + "bad " + type + " value '" + value + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

bool KeyValueConfig::contains(const std::string& key) const {
  return values_.count(key) > 0;
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* v = std::get_if<long long>(&it->second)) return *v;
  throw FormatError("config key '" + key + "' is not an int");
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* v = std::get_if<double>(&it->second)) return *v;
  if (auto* v = std::get_if<long long>(&it->second)) return double(*v);
  throw FormatError("config key '" + key + "' is not a double");
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* v = std::get_if<bool>(&it->second)) return *v;
  throw FormatError("config key '" + key + "' is not a bool");
}

std::optional<std::string> KeyValueConfig::get_string(
    const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw FormatError("config key '" + key + "' is not a string");
}

// --- tables ----------------------------------------------------------------

TableFormat parse_table_format(const std::string& name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw FormatError("unknown format '" + name + "'");
}

namespace {

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "1" : "0";
        } else {
          return std::to_string(v);
        }
      },
      c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
        }
        return v;
      },
      c);
}

}  // namespace

std::string render_table(const Table& table, TableFormat format) {
  if (format == TableFormat::Csv) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j) out += ',';
      out += table.columns[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out += ',';
        out += csv_cell(row[j]);
      }
      out += '\n';
    }
    return out;
  }
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size() && j < table.columns.size(); ++j)
      obj[table.columns[j]] = json_cell(row[j]);
    arr.push_back(std::move(obj));
  }
  // nlohmann prints doubles with round-trip precision.
  return arr.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw FormatError("write failed: " + path);
}

Table iterate_table(const std::vector<IterateRecord>& log) {
  Table t;
  t.columns = {"k",      "F",          "F_next",      "t",
               "alpha",  "v_norm",     "v_norm_max_piece",
               "decrease_bound",        "backtracks",  "active_pieces",
               "selected_piece",        "inner_iterations",
               "inner_converged"};
  for (const IterateRecord& r : log) {
    t.rows.push_back({(long long)r.k, r.F, r.F_next, r.t, r.alpha, r.v_norm,
                      r.v_norm_max_piece, r.decrease_bound,
                      (long long)r.backtracks, (long long)r.active_pieces,
                      (long long)r.selected_piece,
                      (long long)r.inner_iterations, r.inner_converged});
  }
  return t;
}

}  // namespace mpgsa
