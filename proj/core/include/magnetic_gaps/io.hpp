#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "magnetic_gaps/fields.hpp"
#include "magnetic_gaps/intervals.hpp"

namespace magnetic_gaps {

// 17 significant digits, the round-trip format of every numeric output.
std::string format_double(double v);

// "M <max_mode>" followed by "m n re im" lines (m > 0, or m = 0 and n >= 0).
PeriodicScalarField parse_field(std::istream& in);
PeriodicScalarField read_field(const std::string& path);
void write_field(std::ostream& out, const PeriodicScalarField& field);

// Flat "key = value" text; '#' starts a comment. Duplicate keys are a ParseError.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::string& path);

double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);

// Every TransferParams field must be present; unknown keys are rejected.
TransferParams transfer_params_from(const KeyValues& kv);
void write_transfer_params(std::ostream& out, const TransferParams& p);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

// lo,hi rows.
void write_bands_csv(std::ostream& out, const std::vector<std::pair<double, double>>& bands);
std::vector<std::pair<double, double>> bands_from_csv(const CsvTable& table);

}  // namespace magnetic_gaps
