#include <doctest.h>

#include <set>
#include <sstream>

#include "gridshare/csv.hpp"
#include "gridshare/errors.hpp"
#include "gridshare/random.hpp"
#include "gridshare/time.hpp"

using namespace gridshare;

TEST_CASE("timestamps parse and format in UTC") {
  const auto t = parse_timestamp("2007-03-01T09:00Z");
  CHECK(format_timestamp(t) == "2007-03-01T09:00Z");
  CHECK(parse_timestamp("2007-03-01 09:00") == t);
  CHECK(parse_timestamp("2007-03-01T09:00:00Z") == t);
  CHECK(is_whole_hour(t));
  CHECK_FALSE(is_whole_hour(parse_timestamp("2007-03-01T09:30Z")));
  CHECK_THROWS_AS(parse_timestamp("2007-13-01T09:00Z"), DataError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), DataError);
}

TEST_CASE("hour-season classes") {
  const auto spring = HourSeasonKey::from_time(parse_timestamp("2010-04-15T00:00Z"));
  CHECK(spring.season == 1);
  CHECK(spring.hour == 1);
  CHECK(HourSeasonKey::from_time(parse_timestamp("2010-07-01T23:00Z")) == HourSeasonKey{24, 2});
  CHECK(HourSeasonKey::from_time(parse_timestamp("2010-10-01T12:00Z")).season == 3);
  CHECK(HourSeasonKey::from_time(parse_timestamp("2010-01-01T12:00Z")).season == 4);
  CHECK(HourSeasonKey::from_time(parse_timestamp("2010-12-31T12:00Z")).season == 4);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < static_cast<std::size_t>(kHourSeasonBins); ++k) {
    const auto key = HourSeasonKey::from_index(k);
    CHECK(key.valid());
    CHECK(key.index() == k);
    seen.insert(key.index());
  }
  CHECK(seen.size() == 96);
}

TEST_CASE("number formatting") {
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(-0.0) == "0");
  CHECK(csv::format_double(150) == "150");
  CHECK(csv::format_fixed(5.144, 4) == "5.1440");
  CHECK(csv::format_fixed(-0.00001, 3) == "0.000");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(csv::format_double(x)) == x);
}

TEST_CASE("csv line splitting trims blanks and carriage returns") {
  const auto f = csv::split_line(" a , b,,c \r");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[1] == "b");
  CHECK(f[2].empty());
  CHECK(f[3] == "c");
}

TEST_CASE("provenance header") {
  std::ostringstream out;
  csv::write_provenance(out, {"abc", 42, true});
  CHECK(out.str() == "# generator: gridshare\n# config_hash: abc\n# seed: 42\n# rng: mt19937_64\n");
}

TEST_CASE("rng is deterministic and streams differ") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 1) != derive_seed(8, 1));
  Rng u(3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("gamma and beta variates have the right means") {
  Rng r(11);
  const int n = 200000;
  double g = 0.0, gs = 0.0, b = 0.0;
  for (int i = 0; i < n; ++i) {
    g += r.gamma(2.5);
    gs += r.gamma(0.4);
    b += r.beta(2.0, 5.0);
  }
  CHECK(g / n == doctest::Approx(2.5).epsilon(0.01));
  CHECK(gs / n == doctest::Approx(0.4).epsilon(0.02));
  CHECK(b / n == doctest::Approx(2.0 / 7.0).epsilon(0.01));
}
