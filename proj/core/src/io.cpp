#include "magnetic_gaps/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return trim(hash == std::string::npos ? line : line.substr(0, hash));
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PeriodicScalarField parse_field(std::istream& in) {
  std::string line;
  int lineno = 0;
  int max_mode = -1;
  PeriodicScalarField::Modes modes;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::ParseError, "field line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip_comment(line);
    if (s.empty()) continue;
    std::istringstream ls(s);
    if (max_mode < 0) {
      std::string tag;
      if (!(ls >> tag >> max_mode) || tag != "M" || max_mode < 0) fail("expected 'M <max_mode>'");
      continue;
    }
    int m = 0, n = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> m >> n >> re >> im)) fail("expected 'm n re im'");
    std::string extra;
    if (ls >> extra) fail("trailing text");
    if (m < 0 || (m == 0 && n < 0)) fail("modes are stored with m > 0 or (m = 0, n >= 0)");
    if (modes.count({m, n})) fail("duplicate mode");
    if (m == 0 && n == 0 && im != 0.0) fail("constant mode must be real");
    modes[{m, n}] = {re, im};
  }
  if (max_mode < 0) throw Error(ErrorKind::ParseError, "field file has no 'M' line");
  try {
    return PeriodicScalarField(max_mode, std::move(modes));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

PeriodicScalarField read_field(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_field(in);
}

void write_field(std::ostream& out, const PeriodicScalarField& field) {
  out << "M " << field.max_mode() << "\n";
  for (const auto& [mn, c] : field.modes()) {
    const auto [m, n] = mn;
    if (m > 0 || (m == 0 && n >= 0)) {
      out << m << " " << n << " " << format_double(c.real()) << " " << format_double(c.imag()) << "\n";
    }
  }
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip_comment(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = "config line " + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::ParseError, where + ": empty key");
    if (!kv.emplace(key, value).second) throw Error(ErrorKind::ParseError, where + ": duplicate key " + key);
  }
  return kv;
}

KeyValues read_key_values(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_key_values(in);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw Error(ErrorKind::InvalidConfig, key + ": not a number: " + value);
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw Error(ErrorKind::InvalidConfig, key + ": not an integer: " + value);
  return v;
}

TransferParams transfer_params_from(const KeyValues& kv) {
  TransferParams p;
  const std::pair<const char*, double*> fields[] = {
      {"rho", &p.rho},       {"alpha1", &p.alpha1}, {"alpha2", &p.alpha2},     {"beta1", &p.beta1},
      {"beta2", &p.beta2},   {"gamma1", &p.gamma1}, {"gamma2", &p.gamma2},     {"eps1", &p.eps1},
      {"eps2", &p.eps2},     {"lambda01", &p.lambda01}, {"lambda02", &p.lambda02}};
  for (const auto& [name, slot] : fields) {
    auto it = kv.find(name);
    if (it == kv.end()) throw Error(ErrorKind::InvalidConfig, std::string("missing key ") + name);
    *slot = parse_double(name, it->second);
  }
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const auto& f : fields) known = known || key == f.first;
    if (!known) throw Error(ErrorKind::InvalidConfig, "unknown key " + key);
  }
  try {
    validate(p);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  return p;
}

void write_transfer_params(std::ostream& out, const TransferParams& p) {
  out << "rho = " << format_double(p.rho) << "\n"
      << "alpha1 = " << format_double(p.alpha1) << "\n"
      << "alpha2 = " << format_double(p.alpha2) << "\n"
      << "beta1 = " << format_double(p.beta1) << "\n"
      << "beta2 = " << format_double(p.beta2) << "\n"
      << "gamma1 = " << format_double(p.gamma1) << "\n"
      << "gamma2 = " << format_double(p.gamma2) << "\n"
      << "eps1 = " << format_double(p.eps1) << "\n"
      << "eps2 = " << format_double(p.eps2) << "\n"
      << "lambda01 = " << format_double(p.lambda01) << "\n"
      << "lambda02 = " << format_double(p.lambda02) << "\n";
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw Error(ErrorKind::ParseError, "csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                               std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorKind::ParseError, "csv is empty");
  return t;
}

CsvTable read_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_csv(in);
}

void write_bands_csv(std::ostream& out, const std::vector<std::pair<double, double>>& bands) {
  out << "lo,hi\n";
  for (const auto& [lo, hi] : bands) out << format_double(lo) << "," << format_double(hi) << "\n";
}

std::vector<std::pair<double, double>> bands_from_csv(const CsvTable& table) {
  const int lo = table.column("lo"), hi = table.column("hi");
  if (lo < 0 || hi < 0) throw Error(ErrorKind::ParseError, "bands csv needs lo,hi columns");
  std::vector<std::pair<double, double>> out;
  for (const auto& row : table.rows) {
    try {
      out.emplace_back(std::stod(row[lo]), std::stod(row[hi]));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bands csv has a non-numeric cell");
    }
  }
  return out;
}

}  // namespace magnetic_gaps
