#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cbp {

/// Linear-interpolation quantile (type 7) of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);
double quantile(std::vector<double> sample, double q);

/// sup |F_n - F| for a continuous reference CDF.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// sup |F_a - F_b| between two empirical CDFs; ties and atoms are handled exactly.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> sample);

}  // namespace cbp
