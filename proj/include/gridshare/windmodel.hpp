#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridshare/errors.hpp"
#include "gridshare/time.hpp"

namespace gridshare::windmodel {

/// Raised when a distribution fit has no meaningful optimum.
class FitError : public NumericError {
 public:
  FitError(const std::string& what, std::size_t samples, std::size_t excluded)
      : NumericError(what + " (samples=" + std::to_string(samples) +
                     ", excluded=" + std::to_string(excluded) + ")"),
        samples_(samples),
        excluded_(excluded) {}

  std::size_t samples() const { return samples_; }
  std::size_t excluded() const { return excluded_; }

 private:
  std::size_t samples_;
  std::size_t excluded_;
};

/// Fits need at least this many samples.
inline constexpr std::size_t kMinFitSamples = 30;

struct WeibullParams {
  double scale_c = 9.0;  ///< m/s
  double shape_k = 1.8;

  void validate() const;
  double pdf(double u) const;
  double cdf(double u) const;
  double mean() const;
};

struct WeibullFit {
  WeibullParams params;
  std::size_t used = 0;            ///< strictly positive samples in the likelihood
  std::size_t excluded_zeros = 0;  ///< calm readings left out

  double excluded_fraction() const {
    const auto total = used + excluded_zeros;
    return total == 0 ? 0.0 : static_cast<double>(excluded_zeros) / static_cast<double>(total);
  }
};

struct WindSample {
  Timestamp time;
  double speed_ms = 0.0;
};

/// Wind speeds at one location and height. Timestamps are whole UTC hours,
/// strictly increasing; gaps of more than one hour are allowed for ingested
/// data.
struct WindSeries {
  std::string location_id;
  double height_m = 10.0;
  std::vector<WindSample> samples;

  void validate() const;
  std::size_t size() const { return samples.size(); }
  std::vector<double> speeds() const;
  std::vector<Timestamp> times() const;
};

/// Where and when a synthetic series lives.
struct SeriesInfo {
  std::string location_id = "synthetic";
  double height_m = 85.0;
  Timestamp start = parse_timestamp("2015-01-01T00:00Z");
};

enum class CurveShape {
  sigmoid,  ///< logistic fit 1 / (1 + exp(-a (u - b)))
  cubic,    ///< generic (u^3 - cut_in^3) / (rated^3 - cut_in^3), 1 above rated
};

/// Turbine power curve normalized to rated output.
struct PowerCurve {
  double rated_mw = 2.05;
  double cut_in = 3.0;
  double cut_out = 28.0;
  double rated_speed = 13.0;
  double sigmoid_a = 0.3921;   ///< s/m
  double sigmoid_b = 16.4287;  ///< m/s
  CurveShape shape = CurveShape::sigmoid;

  /// Logistic fit to the Enercon E82 (2.05 MW) curve.
  static PowerCurve enercon_e82_sigmoid();
  /// Generic cubic curve with the E82 cut-in, rated and cut-out speeds.
  static PowerCurve generic_cubic();

  void validate() const;
  /// Normalized output in [0, 1]; zero below cut-in and at or above cut-out.
  double normalized(double speed_ms) const;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
  double pdf(double x) const;
  double cdf(double x) const;
  double mean() const { return alpha / (alpha + beta); }
};

/// Samples are clamped to [kBetaClamp, 1 - kBetaClamp] before fitting.
inline constexpr double kBetaClamp = 1e-6;

/// Mass of one histogram cell and the mean of the samples that fell in it.
struct JointCell {
  double probability = 0.0;
  double mean_x1 = 0.0;
  double mean_x2 = 0.0;
};

/// Axis-aligned box [x1_lo, x1_hi] x [x2_lo, x2_hi].
struct CellBox {
  double x1_lo, x1_hi, x2_lo, x2_hi;
};

/// B x B relative-frequency histogram of normalized power pairs for one
/// hour-season class.
///
/// As a density, each cell's mass is spread uniformly over the largest box
/// centred on the cell's sample mean that still fits inside the cell. Means
/// are therefore reproduced exactly, and atoms (e.g. every sample at x = 0 or
/// x = 1) collapse to point masses.
class JointPowerDistribution {
 public:
  JointPowerDistribution(HourSeasonKey key, std::size_t bin_count);

  /// Exactly uniform density on the unit square.
  static JointPowerDistribution uniform(std::size_t bin_count, HourSeasonKey key = {});

  HourSeasonKey key() const { return key_; }
  std::size_t bin_count() const { return bins_; }
  double bin_width() const { return 1.0 / static_cast<double>(bins_); }
  std::size_t sample_count() const { return samples_; }

  const JointCell& cell(std::size_t i1, std::size_t i2) const { return cells_[i1 * bins_ + i2]; }
  JointCell& cell(std::size_t i1, std::size_t i2) { return cells_[i1 * bins_ + i2]; }
  const std::vector<JointCell>& cells() const { return cells_; }

  CellBox support(std::size_t i1, std::size_t i2) const;

  double total_probability() const;
  std::vector<double> marginal_x1() const;
  std::vector<double> marginal_x2() const;

  void set_sample_count(std::size_t n) { samples_ = n; }

 private:
  HourSeasonKey key_;
  std::size_t bins_;
  std::size_t samples_ = 0;
  std::vector<JointCell> cells_;
};

/// Maximum-likelihood Weibull fit. Exact zeros are excluded from the
/// likelihood and reported in the result. Throws FitError on fewer than 30
/// samples, all-zero input, or zero-variance input (shape diverges).
WeibullFit fit_weibull(std::span<const double> speeds);

/// n hourly samples by inverse-CDF, u = c (-ln(1 - U))^(1/k).
WindSeries sample_wind(const WeibullParams& params, std::size_t n, std::uint64_t seed,
                       const SeriesInfo& info = {});

/// Correlation blend weight c_r = acos(1 - 2r) / pi.
double correlation_weight(double r);

/// c_r * reference + (1 - c_r) * independent, sample by sample. The result
/// keeps the independent series' location and height.
WindSeries correlate(const WindSeries& reference, const WindSeries& independent, double r);

/// Logarithmic shear from anemometer height z_a to hub height z_h with
/// roughness length z_o.
WindSeries extrapolate_hub(const WindSeries& series, double z_a, double z_h, double z_o);

/// Scale factor log(z_h / z_o) / log(z_a / z_o) applied by extrapolate_hub.
double shear_factor(double z_a, double z_h, double z_o);

std::vector<double> wind_to_power(const WindSeries& series, const PowerCurve& curve);
std::vector<double> wind_to_power(std::span<const double> speeds, const PowerCurve& curve);

/// Maximum-likelihood Beta fit after clamping to [1e-6, 1 - 1e-6].
BetaParams fit_beta(std::span<const double> normalized_power);

std::vector<double> sample_beta(const BetaParams& params, std::size_t n, std::uint64_t seed);

JointPowerDistribution joint_histogram(std::span<const double> p1, std::span<const double> p2,
                                       HourSeasonKey key, std::size_t bins);

}  // namespace gridshare::windmodel
