#include "gridshare/windmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "gridshare/random.hpp"

namespace gridshare::windmodel {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Largest shape accepted before a Weibull fit is declared degenerate.
constexpr double kMaxWeibullShape = 1e3;

}  // namespace

// ---------------------------------------------------------------- Weibull

void WeibullParams::validate() const {
  if (!positive_finite(scale_c) || !positive_finite(shape_k)) {
    throw std::invalid_argument("Weibull scale and shape must be positive and finite");
  }
}

double WeibullParams::pdf(double u) const {
  if (u < 0.0) return 0.0;
  if (u == 0.0) {
    if (shape_k < 1.0) return std::numeric_limits<double>::infinity();
    return shape_k == 1.0 ? 1.0 / scale_c : 0.0;
  }
  const double z = u / scale_c;
  return shape_k / scale_c * std::pow(z, shape_k - 1.0) * std::exp(-std::pow(z, shape_k));
}

double WeibullParams::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  return -std::expm1(-std::pow(u / scale_c, shape_k));
}

double WeibullParams::mean() const { return scale_c * std::tgamma(1.0 + 1.0 / shape_k); }

WeibullFit fit_weibull(std::span<const double> speeds) {
  std::vector<double> positive;
  positive.reserve(speeds.size());
  std::size_t zeros = 0;
  for (double u : speeds) {
    if (!std::isfinite(u) || u < 0.0) {
      throw std::invalid_argument("wind speeds must be finite and non-negative");
    }
    if (u == 0.0) {
      ++zeros;
    } else {
      positive.push_back(u);
    }
  }
  if (speeds.size() < kMinFitSamples) {
    throw FitError("Weibull fit needs at least 30 samples", speeds.size(), zeros);
  }
  if (positive.empty()) {
    throw FitError("Weibull fit on all-zero samples", speeds.size(), zeros);
  }

  // Work with y = u / max(u) in (0, 1] to keep y^k finite.
  const double u_max = *std::max_element(positive.begin(), positive.end());
  std::vector<double> log_y(positive.size());
  double mean_log = 0.0;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    log_y[i] = std::log(positive[i] / u_max);
    mean_log += log_y[i];
  }
  mean_log /= static_cast<double>(positive.size());
  if (-mean_log < 1e-12) {
    throw FitError("Weibull fit degenerate: zero-variance samples, shape diverges",
                   speeds.size(), zeros);
  }

  // Profile score g(k) = sum y^k ln y / sum y^k - 1/k - mean(ln y); strictly
  // increasing in k, so the root is bracketed and unique.
  auto score = [&](double k, double* slope) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double ly : log_y) {
      const double w = std::exp(k * ly);
      s0 += w;
      s1 += w * ly;
      s2 += w * ly * ly;
    }
    const double m1 = s1 / s0;
    if (slope != nullptr) *slope = (s2 / s0 - m1 * m1) + 1.0 / (k * k);
    return m1 - 1.0 / k - mean_log;
  };

  double lo = 1e-3;
  double hi = 1.0;
  while (score(hi, nullptr) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxWeibullShape) {
      throw FitError("Weibull fit degenerate: shape diverges", speeds.size(), zeros);
    }
  }
  double k = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double slope = 0.0;
    const double g = score(k, &slope);
    if (g < 0.0) lo = k; else hi = k;
    double next = k - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - k) <= 1e-12 * std::max(1.0, k) || hi - lo <= 1e-14 * hi;
    k = next;
    if (done) break;
  }

  double mean_pow = 0.0;
  for (double ly : log_y) mean_pow += std::exp(k * ly);
  mean_pow /= static_cast<double>(log_y.size());
  const double c = u_max * std::pow(mean_pow, 1.0 / k);
  return WeibullFit{{c, k}, positive.size(), zeros};
}

// ---------------------------------------------------------------- series

void WindSeries::validate() const {
  if (!positive_finite(height_m)) throw std::invalid_argument("series height must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.speed_ms) || s.speed_ms < 0.0) {
      throw DataError("negative or non-finite wind speed at " + format_timestamp(s.time));
    }
    if (!is_whole_hour(s.time)) {
      throw DataError("wind timestamp not on the hour: " + format_timestamp(s.time));
    }
    if (i > 0 && !(samples[i - 1].time < s.time)) {
      throw DataError("wind timestamps not strictly increasing at " + format_timestamp(s.time));
    }
  }
}

std::vector<double> WindSeries::speeds() const {
  std::vector<double> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(),
                 [](const WindSample& s) { return s.speed_ms; });
  return out;
}

std::vector<Timestamp> WindSeries::times() const {
  std::vector<Timestamp> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(),
                 [](const WindSample& s) { return s.time; });
  return out;
}

WindSeries sample_wind(const WeibullParams& params, std::size_t n, std::uint64_t seed,
                       const SeriesInfo& info) {
  params.validate();
  if (n == 0) throw std::invalid_argument("sample_wind needs n >= 1");
  Rng rng(seed);
  WindSeries series{info.location_id, info.height_m, {}};
  series.samples.reserve(n);
  const double inv_k = 1.0 / params.shape_k;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();  // [0, 1), so 1 - u is in (0, 1]
    const double speed = params.scale_c * std::pow(-std::log1p(-u), inv_k);
    series.samples.push_back({info.start + kHour * static_cast<long>(i), speed});
  }
  return series;
}

double correlation_weight(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("correlation must be in [0, 1]");
  return std::acos(1.0 - 2.0 * r) / std::numbers::pi;
}

WindSeries correlate(const WindSeries& reference, const WindSeries& independent, double r) {
  const double weight = correlation_weight(r);
  if (reference.size() != independent.size()) {
    throw DataError("correlate: series lengths differ (" + std::to_string(reference.size()) +
                    " vs " + std::to_string(independent.size()) + ")");
  }
  WindSeries out{independent.location_id, independent.height_m, {}};
  out.samples.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& a = reference.samples[i];
    const auto& b = independent.samples[i];
    if (a.time != b.time) {
      throw DataError("correlate: timestamps not aligned at index " + std::to_string(i));
    }
    out.samples.push_back({b.time, weight * a.speed_ms + (1.0 - weight) * b.speed_ms});
  }
  return out;
}

double shear_factor(double z_a, double z_h, double z_o) {
  if (!positive_finite(z_o) || !positive_finite(z_a) || !positive_finite(z_h)) {
    throw std::invalid_argument("shear heights and roughness must be positive");
  }
  if (!(z_a > z_o) || !(z_h > z_o)) {
    throw std::invalid_argument("shear heights must exceed the roughness length");
  }
  return std::log(z_h / z_o) / std::log(z_a / z_o);
}

WindSeries extrapolate_hub(const WindSeries& series, double z_a, double z_h, double z_o) {
  const double factor = shear_factor(z_a, z_h, z_o);
  WindSeries out = series;
  out.height_m = z_h;
  if (z_h == z_a) return out;
  for (auto& s : out.samples) s.speed_ms *= factor;
  return out;
}

// ---------------------------------------------------------------- power curve

PowerCurve PowerCurve::enercon_e82_sigmoid() { return PowerCurve{}; }

PowerCurve PowerCurve::generic_cubic() {
  PowerCurve curve;
  curve.shape = CurveShape::cubic;
  return curve;
}

void PowerCurve::validate() const {
  if (!positive_finite(rated_mw)) throw std::invalid_argument("rated_mw must be positive");
  if (!(cut_in > 0.0 && cut_in < rated_speed && rated_speed < cut_out) ||
      !std::isfinite(cut_out)) {
    throw std::invalid_argument("power curve needs 0 < cut_in < rated_speed < cut_out");
  }
  if (shape == CurveShape::sigmoid && (!positive_finite(sigmoid_a) || !std::isfinite(sigmoid_b))) {
    throw std::invalid_argument("sigmoid slope must be positive");
  }
}

double PowerCurve::normalized(double speed_ms) const {
  if (!(speed_ms >= cut_in) || speed_ms >= cut_out) return 0.0;
  double p = 0.0;
  switch (shape) {
    case CurveShape::sigmoid:
      p = 1.0 / (1.0 + std::exp(-sigmoid_a * (speed_ms - sigmoid_b)));
      break;
    case CurveShape::cubic:
      if (speed_ms >= rated_speed) return 1.0;
      p = (speed_ms * speed_ms * speed_ms - cut_in * cut_in * cut_in) /
          (rated_speed * rated_speed * rated_speed - cut_in * cut_in * cut_in);
      break;
  }
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> wind_to_power(std::span<const double> speeds, const PowerCurve& curve) {
  curve.validate();
  std::vector<double> out(speeds.size());
  std::transform(speeds.begin(), speeds.end(), out.begin(),
                 [&](double u) { return curve.normalized(u); });
  return out;
}

std::vector<double> wind_to_power(const WindSeries& series, const PowerCurve& curve) {
  return wind_to_power(series.speeds(), curve);
}

// ---------------------------------------------------------------- Beta

void BetaParams::validate() const {
  if (!positive_finite(alpha) || !positive_finite(beta)) {
    throw std::invalid_argument("Beta parameters must be positive and finite");
  }
}

double BetaParams::pdf(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  return boost::math::ibeta_derivative(alpha, beta, x);
}

double BetaParams::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(alpha, beta, x);
}

BetaParams fit_beta(std::span<const double> normalized_power) {
  const std::size_t n = normalized_power.size();
  std::size_t clamped = 0;
  double s1 = 0.0, s2 = 0.0, mean = 0.0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = normalized_power[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("normalized power must lie in [0, 1]");
    }
    x[i] = std::clamp(v, kBetaClamp, 1.0 - kBetaClamp);
    if (x[i] != v) ++clamped;
    mean += x[i];
  }
  if (n < kMinFitSamples) throw FitError("Beta fit needs at least 30 samples", n, clamped);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) {
    var += (v - mean) * (v - mean);
    s1 += std::log(v);
    s2 += std::log1p(-v);
  }
  var /= static_cast<double>(n);
  s1 /= static_cast<double>(n);
  s2 /= static_cast<double>(n);
  if (var <= 1e-14 * std::max(mean * (1.0 - mean), 1e-300)) {
    throw FitError("Beta fit degenerate: zero-variance samples after clamping", n, clamped);
  }

  // Method-of-moments start, then Newton on the (concave) mean log-likelihood.
  double common = mean * (1.0 - mean) / var - 1.0;
  double a = common > 0.0 ? mean * common : 1.0;
  double b = common > 0.0 ? (1.0 - mean) * common : 1.0;
  auto loglik = [&](double al, double be) {
    return (al - 1.0) * s1 + (be - 1.0) * s2 - boost::math::lgamma(al) - boost::math::lgamma(be) +
           boost::math::lgamma(al + be);
  };
  double current = loglik(a, b);
  for (int iter = 0; iter < 500; ++iter) {
    const double psi_ab = boost::math::digamma(a + b);
    const double ga = s1 - boost::math::digamma(a) + psi_ab;
    const double gb = s2 - boost::math::digamma(b) + psi_ab;
    const double t_ab = boost::math::trigamma(a + b);
    const double haa = t_ab - boost::math::trigamma(a);
    const double hbb = t_ab - boost::math::trigamma(b);
    const double hab = t_ab;
    const double det = haa * hbb - hab * hab;
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    if (!std::isfinite(da) || !std::isfinite(db)) break;
    double step = 1.0;
    double na = a + da, nb = b + db, next = 0.0;
    for (int half = 0; half < 60; ++half) {
      na = a + step * da;
      nb = b + step * db;
      if (na > 0.0 && nb > 0.0) {
        next = loglik(na, nb);
        if (next >= current - 1e-15 * std::abs(current)) break;
      }
      step *= 0.5;
    }
    if (!(na > 0.0 && nb > 0.0)) break;
    const bool done = std::abs(na - a) <= 1e-10 * std::max(1.0, a) &&
                      std::abs(nb - b) <= 1e-10 * std::max(1.0, b);
    a = na;
    b = nb;
    current = next;
    if (done) break;
  }
  if (!positive_finite(a) || !positive_finite(b)) {
    throw FitError("Beta fit did not converge", n, clamped);
  }
  return BetaParams{a, b};
}

std::vector<double> sample_beta(const BetaParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.beta(params.alpha, params.beta);
  return out;
}

// ---------------------------------------------------------------- joint histogram

JointPowerDistribution::JointPowerDistribution(HourSeasonKey key, std::size_t bin_count)
    : key_(key), bins_(bin_count), cells_(bin_count * bin_count) {
  if (bin_count < 2) throw std::invalid_argument("histogram needs at least 2 bins per axis");
  if (!key.valid()) throw std::invalid_argument("invalid hour-season key");
}

JointPowerDistribution JointPowerDistribution::uniform(std::size_t bin_count, HourSeasonKey key) {
  JointPowerDistribution dist(key, bin_count);
  const double w = dist.bin_width();
  const double p = 1.0 / static_cast<double>(bin_count * bin_count);
  for (std::size_t i = 0; i < bin_count; ++i) {
    for (std::size_t j = 0; j < bin_count; ++j) {
      dist.cell(i, j) = {p, (static_cast<double>(i) + 0.5) * w, (static_cast<double>(j) + 0.5) * w};
    }
  }
  return dist;
}

CellBox JointPowerDistribution::support(std::size_t i1, std::size_t i2) const {
  const double w = bin_width();
  const auto& c = cell(i1, i2);
  const double lo1 = static_cast<double>(i1) * w;
  const double lo2 = static_cast<double>(i2) * w;
  const double h1 = std::max(0.0, std::min(c.mean_x1 - lo1, lo1 + w - c.mean_x1));
  const double h2 = std::max(0.0, std::min(c.mean_x2 - lo2, lo2 + w - c.mean_x2));
  return {c.mean_x1 - h1, c.mean_x1 + h1, c.mean_x2 - h2, c.mean_x2 + h2};
}

double JointPowerDistribution::total_probability() const {
  double total = 0.0;
  for (const auto& c : cells_) total += c.probability;
  return total;
}

std::vector<double> JointPowerDistribution::marginal_x1() const {
  std::vector<double> m(bins_, 0.0);
  for (std::size_t i = 0; i < bins_; ++i) {
    for (std::size_t j = 0; j < bins_; ++j) m[i] += cell(i, j).probability;
  }
  return m;
}

std::vector<double> JointPowerDistribution::marginal_x2() const {
  std::vector<double> m(bins_, 0.0);
  for (std::size_t i = 0; i < bins_; ++i) {
    for (std::size_t j = 0; j < bins_; ++j) m[j] += cell(i, j).probability;
  }
  return m;
}

JointPowerDistribution joint_histogram(std::span<const double> p1, std::span<const double> p2,
                                       HourSeasonKey key, std::size_t bins) {
  if (p1.size() != p2.size()) {
    throw DataError("joint_histogram: series lengths differ (" + std::to_string(p1.size()) +
                    " vs " + std::to_string(p2.size()) + ")");
  }
  if (p1.empty()) throw DataError("joint_histogram: empty input");
  JointPowerDistribution dist(key, bins);
  const auto bin_of = [bins](double x) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw std::invalid_argument("normalized power must lie in [0, 1]");
    }
    return std::min(static_cast<std::size_t>(x * static_cast<double>(bins)), bins - 1);
  };
  std::vector<std::size_t> counts(bins * bins, 0);
  std::vector<double> sum1(bins * bins, 0.0), sum2(bins * bins, 0.0);
  for (std::size_t t = 0; t < p1.size(); ++t) {
    const std::size_t idx = bin_of(p1[t]) * bins + bin_of(p2[t]);
    ++counts[idx];
    sum1[idx] += p1[t];
    sum2[idx] += p2[t];
  }
  const double n = static_cast<double>(p1.size());
  for (std::size_t idx = 0; idx < counts.size(); ++idx) {
    if (counts[idx] == 0) continue;
    const double c = static_cast<double>(counts[idx]);
    auto& cell = dist.cell(idx / bins, idx % bins);
    cell.probability = c / n;
    cell.mean_x1 = sum1[idx] / c;
    cell.mean_x2 = sum2[idx] / c;
  }
  dist.set_sample_count(p1.size());
  return dist;
}

}  // namespace gridshare::windmodel
