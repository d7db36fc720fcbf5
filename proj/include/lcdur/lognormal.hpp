#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcdur/extract.hpp"
#include "lcdur/types.hpp"

namespace lcdur {

/// Log-normal duration model for one (vehicle class, direction) group:
/// ln(duration in seconds) ~ Normal(mu, sigma^2).
struct LogNormalModel {
  VehicleClass vehicle_class = VehicleClass::Car;
  LaneChangeDirection direction = LaneChangeDirection::Left;
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n = 0;
  double log_likelihood = 0.0;

  double median() const;
  double mean() const;

  bool operator==(const LogNormalModel&) const = default;
};

/// Maximum-likelihood fit: mu is the mean of ln(d), sigma the population
/// (1/n) standard deviation of ln(d). Note the descriptive statistics use the
/// n-1 denominator instead.
///
/// Throws NonPositiveDuration for any d <= 0 (or non-finite d) and
/// DegenerateSample for n < 2 or a zero spread.
LogNormalModel fit_lognormal(std::span<const double> durations,
                             VehicleClass vehicle_class = VehicleClass::Car,
                             LaneChangeDirection direction = LaneChangeDirection::Left);

/// Throws DomainError for x <= 0.
double lognormal_pdf(const LogNormalModel& m, double x);
double lognormal_cdf(const LogNormalModel& m, double x);
/// Throws DomainError unless 0 < q < 1.
double lognormal_quantile(const LogNormalModel& m, double q);

/// Inverse-transform draws; identical output for identical seeds on every
/// platform.
std::vector<double> lognormal_sample(const LogNormalModel& m, std::size_t n, std::uint64_t seed);

struct GoodnessOfFit {
  double ks_distance = 0.0;
  double at_value = 0.0;  // where the largest gap occurs
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `durations` and the model CDF. Descriptive only: the parameters usually
/// come from the same data, so no p-value is attached. Throws EmptySample.
GoodnessOfFit goodness_of_fit(const LogNormalModel& m, std::span<const double> durations);

/// The four (class x direction) models, in the order car-left, car-right,
/// truck-left, truck-right. Throws MissingGroup if any group cannot be fitted.
std::vector<LogNormalModel> fit_model_set(std::span<const LaneChangeEvent> events);

/// `models.json`: an array of {vehicle_class, direction, mu, sigma, n,
/// log_likelihood}. Doubles are written in shortest round-trip form.
std::string models_json(const std::vector<LogNormalModel>& models);
std::vector<LogNormalModel> parse_models_json(const std::string& json);

}  // namespace lcdur
