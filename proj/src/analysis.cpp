#include "collrabi/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "collrabi/errors.hpp"

namespace collrabi {

double TimeTrace::bin_width() const {
  if (times.size() < 2) return 0.0;
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

void validate(const TimeTrace& trace) {
  const std::size_t n = trace.times.size();
  if (trace.counts.size() != n || trace.sigma.size() != n) {
    throw AnalysisError("trace columns have different lengths");
  }
  if (n < 2) return;
  const double h = trace.bin_width();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(trace.times[i] > trace.times[i - 1])) {
      throw AnalysisError("trace times must be strictly increasing (row " + std::to_string(i) + ")");
    }
    const double expected = trace.times.front() + static_cast<double>(i) * h;
    if (std::abs(trace.times[i] - expected) > 1e-9) {
      throw AnalysisError("trace times are not on a uniform grid (row " + std::to_string(i) + ")");
    }
    if (!(trace.sigma[i] >= 0.0)) {
      throw AnalysisError("trace sigma must be >= 0 (row " + std::to_string(i) + ")");
    }
  }
}

double poisson_sigma(double count) { return std::sqrt(std::max(count, 1.0)); }

TimeTrace make_trace(std::vector<double> times, std::vector<double> counts) {
  TimeTrace trace{std::move(times), std::move(counts), {}};
  trace.sigma.reserve(trace.counts.size());
  for (double c : trace.counts) trace.sigma.push_back(poisson_sigma(c));
  return trace;
}

std::vector<double> moving_average(std::span<const double> values, int half_width) {
  const auto n = static_cast<long>(values.size());
  std::vector<double> out(values.size());
  if (half_width <= 0) {
    std::copy(values.begin(), values.end(), out.begin());
    return out;
  }
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - half_width);
    const long hi = std::min(n - 1, i + half_width);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

PeakSet find_peaks(const TimeTrace& trace, int smooth_halfwidth, double min_prominence) {
  if (smooth_halfwidth < 0) throw AnalysisError("smoothing half-width must be >= 0");
  const std::size_t n = trace.size();
  if (n < static_cast<std::size_t>(2 * smooth_halfwidth + 3)) {
    throw AnalysisError("trace of " + std::to_string(n) + " bins is too short for smoothing half-width " +
                        std::to_string(smooth_halfwidth));
  }
  const std::vector<double> s = moving_average(trace.counts, smooth_halfwidth);

  PeakSet peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(s[i] > s[i - 1])) {
      ++i;
      continue;
    }
    // Walk over a plateau of equal values.
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    if (j + 1 < n && s[j + 1] < s[i]) {
      const std::size_t peak = (i + j) / 2;
      const double h = s[peak];
      double left_min = h;
      for (std::size_t k = i; k-- > 0;) {
        if (s[k] > h) break;
        left_min = std::min(left_min, s[k]);
      }
      double right_min = h;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (s[k] > h) break;
        right_min = std::min(right_min, s[k]);
      }
      const double prominence = h - std::max(left_min, right_min);
      if (prominence >= min_prominence && prominence > 0.0) {
        peaks.indices.push_back(peak);
        peaks.times.push_back(trace.times[peak]);
        peaks.prominences.push_back(prominence);
      }
    }
    i = j + 1;
  }
  return peaks;
}

QuadraticPeakFit quadratic_fit(std::span<const double> peak_times) {
  const auto n = static_cast<Eigen::Index>(peak_times.size());
  if (n < 3) {
    throw AnalysisError("quadratic peak fit needs at least 3 peaks, got " + std::to_string(n));
  }
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double x = static_cast<double>(k + 1);
    design(k, 0) = 1.0;
    design(k, 1) = x;
    design(k, 2) = x * x;
    y(k) = peak_times[static_cast<std::size_t>(k)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw NumericalError("quadratic peak fit: degenerate design matrix");
  const Eigen::VectorXd coef = qr.solve(y);
  QuadraticPeakFit fit{coef(0), coef(1), coef(2), {}, 0.0};
  const Eigen::VectorXd r = y - design * coef;
  fit.residuals.assign(r.data(), r.data() + r.size());
  fit.residual_sum_sq = r.squaredNorm();
  return fit;
}

QuadraticPeakFit quadratic_peak_fit(const PeakSet& peaks) { return quadratic_fit(peaks.times); }

std::vector<double> peak_spacings(const PeakSet& peaks) {
  if (peaks.size() < 2) {
    throw AnalysisError("peak spacings need at least 2 peaks, got " + std::to_string(peaks.size()));
  }
  std::vector<double> out;
  out.reserve(peaks.size() - 1);
  for (std::size_t k = 1; k < peaks.size(); ++k) out.push_back(peaks.times[k] - peaks.times[k - 1]);
  return out;
}

std::vector<double> refined_peak_times(const TimeTrace& trace, const PeakSet& peaks) {
  const double h = trace.bin_width();
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t idx : peaks.indices) {
    double t = trace.times[idx];
    if (idx > 0 && idx + 1 < trace.size()) {
      const double ym = trace.counts[idx - 1];
      const double y0 = trace.counts[idx];
      const double yp = trace.counts[idx + 1];
      const double curvature = ym - 2.0 * y0 + yp;
      if (curvature < 0.0) t += 0.5 * h * (ym - yp) / curvature;
    }
    out.push_back(t);
  }
  return out;
}

double estimate_period(const TimeTrace& trace, double min_prominence) {
  const PeakSet peaks = find_peaks(trace, 0, min_prominence);
  if (peaks.size() < 2) throw AnalysisError("period estimate needs at least 2 peaks");
  const std::vector<double> t = refined_peak_times(trace, peaks);
  return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

}  // namespace collrabi
