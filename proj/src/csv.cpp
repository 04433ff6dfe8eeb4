#include "gridshare/csv.hpp"

#include <charconv>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "gridshare/random.hpp"

namespace gridshare::csv {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[128];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  if (ec != std::errc{}) throw std::runtime_error("format_fixed failed");
  std::string s(buf, ptr);
  // "-0.000" -> "0.000"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view field =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                           : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
      field.remove_suffix(1);
    }
    fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

void write_provenance(std::ostream& out, const Provenance& provenance) {
  out << "# generator: gridshare\n";
  if (!provenance.config_hash.empty()) {
    out << "# config_hash: " << provenance.config_hash << '\n';
  }
  if (provenance.has_seed) {
    out << "# seed: " << provenance.seed << '\n';
    out << "# rng: " << kRngAlgorithm << '\n';
  }
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace gridshare::csv
