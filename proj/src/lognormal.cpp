#include "lcdur/lognormal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>

#include "json.hpp"
#include "lcdur/error.hpp"
#include "random.hpp"

namespace lcdur {

double LogNormalModel::median() const { return std::exp(mu); }
double LogNormalModel::mean() const { return std::exp(mu + 0.5 * sigma * sigma); }

LogNormalModel fit_lognormal(std::span<const double> durations, VehicleClass vehicle_class,
                             LaneChangeDirection direction) {
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::NonPositiveDuration, "fit: durations must be positive and finite");
    }
  }
  if (durations.size() < 2) {
    throw Error(ErrorCode::DegenerateSample, "fit: need at least two durations");
  }
  const auto n = static_cast<double>(durations.size());
  std::vector<double> logs(durations.size());
  std::transform(durations.begin(), durations.end(), logs.begin(),
                 [](double d) { return std::log(d); });
  double sum = 0.0, sum_logs = 0.0;
  for (double l : logs) sum += l;
  const double mu = sum / n;
  double ss = 0.0;
  for (double l : logs) {
    ss += (l - mu) * (l - mu);
    sum_logs += l;
  }
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::DegenerateSample, "fit: all durations are equal");
  }
  LogNormalModel m;
  m.vehicle_class = vehicle_class;
  m.direction = direction;
  m.mu = mu;
  m.sigma = sigma;
  m.n = durations.size();
  // Sum of ln f(d) with the MLE plugged in.
  m.log_likelihood = -sum_logs - n * std::log(sigma) - 0.5 * n * std::log(2.0 * std::numbers::pi) -
                     0.5 * n;
  return m;
}

double lognormal_pdf(const LogNormalModel& m, double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "pdf: x must be positive");
  const double z = (std::log(x) - m.mu) / m.sigma;
  return std::exp(-0.5 * z * z) / (x * m.sigma * std::sqrt(2.0 * std::numbers::pi));
}

double lognormal_cdf(const LogNormalModel& m, double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "cdf: x must be positive");
  return 0.5 * std::erfc(-(std::log(x) - m.mu) / (m.sigma * std::numbers::sqrt2));
}

double lognormal_quantile(const LogNormalModel& m, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::DomainError, "quantile: q must lie in (0,1)");
  const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
  return std::exp(m.mu + m.sigma * z);
}

std::vector<double> lognormal_sample(const LogNormalModel& m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = lognormal_quantile(m, rng::uniform01(gen));
  return out;
}

GoodnessOfFit goodness_of_fit(const LogNormalModel& m, std::span<const double> durations) {
  if (durations.empty()) throw Error(ErrorCode::EmptySample, "goodness_of_fit: empty sample");
  std::vector<double> v(durations.begin(), durations.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  GoodnessOfFit g;
  g.n = v.size();
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    // ECDF jumps from i/n to (j+1)/n at v[i].
    const double f = lognormal_cdf(m, v[i]);
    const double gap = std::max(static_cast<double>(j + 1) / n - f, f - static_cast<double>(i) / n);
    if (gap > g.ks_distance) {
      g.ks_distance = gap;
      g.at_value = v[i];
    }
    i = j + 1;
  }
  return g;
}

std::vector<LogNormalModel> fit_model_set(std::span<const LaneChangeEvent> events) {
  std::vector<LogNormalModel> out;
  for (auto cls : {VehicleClass::Car, VehicleClass::Truck}) {
    for (auto dir : {LaneChangeDirection::Left, LaneChangeDirection::Right}) {
      std::vector<double> d;
      for (const auto& e : events) {
        if (e.vehicle_class == cls && e.direction == dir) d.push_back(e.duration_s);
      }
      const std::string group = std::string(to_string(cls)) + "/" + std::string(to_string(dir));
      try {
        out.push_back(fit_lognormal(d, cls, dir));
      } catch (const Error& ex) {
        throw Error(ErrorCode::MissingGroup,
                    "cannot fit the " + group + " model (" + std::to_string(d.size()) +
                        " events): " + ex.what());
      }
    }
  }
  return out;
}

std::string models_json(const std::vector<LogNormalModel>& models) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : models) {
    nlohmann::ordered_json j;
    j["vehicle_class"] = std::string(to_string(m.vehicle_class));
    j["direction"] = std::string(to_string(m.direction));
    j["mu"] = m.mu;
    j["sigma"] = m.sigma;
    j["n"] = m.n;
    j["log_likelihood"] = m.log_likelihood;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<LogNormalModel> parse_models_json(const std::string& json) {
  std::vector<LogNormalModel> out;
  try {
    for (const auto& j : nlohmann::json::parse(json)) {
      LogNormalModel m;
      const auto cls = parse_vehicle_class(j.at("vehicle_class").get<std::string>());
      const auto dir = parse_direction(j.at("direction").get<std::string>());
      if (!cls || !dir) throw Error(ErrorCode::MalformedRow, "models.json: bad class or direction");
      m.vehicle_class = *cls;
      m.direction = *dir;
      m.mu = j.at("mu").get<double>();
      m.sigma = j.at("sigma").get<double>();
      m.n = j.at("n").get<std::size_t>();
      m.log_likelihood = j.at("log_likelihood").get<double>();
      if (!(m.sigma > 0.0)) throw Error(ErrorCode::MalformedRow, "models.json: sigma must be positive");
      out.push_back(m);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedRow, std::string("models.json: ") + ex.what());
  }
  return out;
}

}  // namespace lcdur
