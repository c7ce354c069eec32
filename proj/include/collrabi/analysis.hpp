#pragma once

#include <span>
#include <vector>

namespace collrabi {

// Binned count series on a uniform, strictly increasing grid (us).
struct TimeTrace {
  std::vector<double> times;
  std::vector<double> counts;
  std::vector<double> sigma;

  std::size_t size() const { return times.size(); }
  double bin_width() const;
};

// Throws AnalysisError unless lengths agree, times are uniform within 1e-9 us
// and strictly increasing, and sigma >= 0.
void validate(const TimeTrace& trace);

// Poisson uncertainty sqrt(max(count, 1)).
double poisson_sigma(double count);
TimeTrace make_trace(std::vector<double> times, std::vector<double> counts);

struct PeakSet {
  std::vector<std::size_t> indices;
  std::vector<double> times;
  std::vector<double> prominences;

  std::size_t size() const { return indices.size(); }
};

inline constexpr int kCountsSmoothing = 2;

// Centered moving average; the window shrinks at the edges.
std::vector<double> moving_average(std::span<const double> values, int half_width);

// Smooths with the given half-width, then keeps local maxima whose
// topographic prominence (height above the higher of the two base minima)
// is at least min_prominence. Plateaus count once, at their middle.
PeakSet find_peaks(const TimeTrace& trace, int smooth_halfwidth, double min_prominence);

// Least-squares y = y0 + b x + c x^2 with x the 1-based peak order and y
// the peak time.
struct QuadraticPeakFit {
  double y0 = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::vector<double> residuals;
  double residual_sum_sq = 0.0;
};

QuadraticPeakFit quadratic_peak_fit(const PeakSet& peaks);
QuadraticPeakFit quadratic_fit(std::span<const double> peak_times);

std::vector<double> peak_spacings(const PeakSet& peaks);

// Peak times refined by a three-point parabola through each sampled maximum.
std::vector<double> refined_peak_times(const TimeTrace& trace, const PeakSet& peaks);

// Mean spacing of the refined peak times of a noiseless trace.
double estimate_period(const TimeTrace& trace, double min_prominence);

}  // namespace collrabi
