#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gridshare::csv {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Fixed-point with `digits` decimals, correctly rounded.
std::string format_fixed(double value, int digits);

/// Splits a CSV line on commas and trims spaces and a trailing '\r'.
/// Quoted fields are not supported; none of our formats need them.
std::vector<std::string> split_line(std::string_view line);

/// Provenance written as leading '#' comment lines of every output table.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void write_provenance(std::ostream& out, const Provenance& provenance);

/// Writes one CSV row; fields are emitted verbatim.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace gridshare::csv
