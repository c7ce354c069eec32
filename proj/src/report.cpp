#include "collrabi/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "collrabi/config.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

namespace {

bool is_angular(const std::string& name) { return name.starts_with("omega_n"); }

std::string unit_of(const std::string& name) {
  if (name.starts_with("A") || name == "B") return "counts";
  if (name == "beta" || name == "C") return "1/us";
  if (name == "t0") return "us";
  if (is_angular(name)) return "rad/us";
  if (name == "alpha") return "us^2/rad^2";
  return "";
}

std::string fixed(double v, int digits) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

void write_series(std::ostream& out, const std::string& key, std::span<const double> values) {
  out << key << " =";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i == 0 ? " " : ",") << format_double(values[i]);
  out << '\n';
}

void write_quadratic(std::ostream& out, const std::string& prefix, const QuadraticPeakFit& q) {
  out << prefix << "y0 = " << format_double(q.y0) << '\n';
  out << prefix << "b = " << format_double(q.b) << '\n';
  out << prefix << "c = " << format_double(q.c) << '\n';
  out << prefix << "residual_sum_sq = " << format_double(q.residual_sum_sq) << '\n';
  write_series(out, prefix + "residuals", q.residuals);
}

// 1, 2 or 5 times a power of ten, giving about `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

int decimals_for(double step) { return std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9))); }

}  // namespace

void write_fit_report(std::ostream& out, const FitResult& fit) {
  out << "model = " << (fit.kind == FitKind::single ? "single" : "double") << '\n';
  out << "converged = " << (fit.converged ? "true" : "false") << '\n';
  out << "n_iter = " << fit.n_iter << '\n';
  out << "cost = " << format_double(fit.cost) << '\n';
  out << "dof = " << fit.dof << '\n';
  out << "reduced_chi2 = " << format_double(fit.reduced_chi2) << '\n';
  for (const auto& name : fit.names) {
    const double v = fit.estimates.at(name);
    const double e = fit.std_errors.at(name);
    out << name << " = " << format_double(v) << '\n';
    out << name << "_std_error = " << format_double(e) << '\n';
    if (is_angular(name)) {
      out << name << "_mhz = " << format_double(units::angular_to_mhz(v)) << '\n';
      out << name << "_std_error_mhz = " << format_double(units::angular_to_mhz(e)) << '\n';
    }
  }
  if (const auto it = fit.estimates.find("alpha"); it != fit.estimates.end() && it->second > 0.0) {
    out << "sigma_delta_mhz = " << format_double(units::angular_to_mhz(units::sigma_from_alpha(it->second)))
        << '\n';
  }
  out << "# BEGIN RESULTS\n";
  out << "name,estimate,std_error,unit,estimate_mhz,std_error_mhz\n";
  for (const auto& name : fit.names) {
    const double v = fit.estimates.at(name);
    const double e = fit.std_errors.at(name);
    out << name << ',' << format_double(v) << ',' << format_double(e) << ',' << unit_of(name) << ',';
    if (is_angular(name)) {
      out << format_double(units::angular_to_mhz(v)) << ',' << format_double(units::angular_to_mhz(e));
    } else {
      out << ',';
    }
    out << '\n';
  }
  out << "# END RESULTS\n";
}

void write_peaks_report(std::ostream& out, const PeakSet& peaks, const QuadraticPeakFit& quad,
                        std::span<const double> spacings) {
  out << "n_peaks = " << peaks.size() << '\n';
  write_quadratic(out, "", quad);
  write_series(out, "spacings_us", spacings);
  out << "# BEGIN PEAKS\n";
  out << "order,index,time_us,prominence\n";
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    out << (k + 1) << ',' << peaks.indices[k] << ',' << format_double(peaks.times[k]) << ','
        << format_double(peaks.prominences[k]) << '\n';
  }
  out << "# END PEAKS\n";
}

void write_compare_report(std::ostream& out, const ModelComparison& cmp) {
  write_series(out, "trajectory_peaks_us", cmp.trajectory_peaks);
  write_series(out, "model_peaks_us", cmp.model_peaks);
  write_quadratic(out, "trajectory_", cmp.trajectory_quadratic);
  write_quadratic(out, "model_", cmp.model_quadratic);
  out << "trajectory_frequency = " << format_double(cmp.trajectory_frequency) << '\n';
  out << "trajectory_frequency_mhz = " << format_double(units::angular_to_mhz(cmp.trajectory_frequency))
      << '\n';
  out << "model_frequency = " << format_double(cmp.model_frequency) << '\n';
  out << "model_frequency_mhz = " << format_double(units::angular_to_mhz(cmp.model_frequency)) << '\n';
  out << "relative_discrepancy = " << format_double(cmp.relative_discrepancy) << '\n';
}

void write_plot_data(std::ostream& out, std::span<const double> times, std::span<const double> values) {
  out << "time_us signal\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i]) << ' ' << format_double(values[i]) << '\n';
  }
}

void write_plot_svg(std::ostream& out, std::span<const double> times, std::span<const double> values,
                    const std::string& title) {
  constexpr double W = 720, H = 440, left = 80, right = 20, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  double x0 = times.empty() ? 0.0 : times.front();
  double x1 = times.empty() ? 1.0 : times.back();
  double y0 = 0.0, y1 = 1.0;
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    y0 = *lo;
    y1 = *hi;
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(x1 - x0, 6);
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-12 * xs; x += xs) {
    out << "<line x1=\"" << fixed(sx(x), 2) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(sx(x), 2)
        << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(sx(x), 2) << "\" y=\"" << top + ph + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << fixed(x, decimals_for(xs)) << "</text>\n";
  }
  const double ys = nice_step(y1 - y0, 5);
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-12 * ys; y += ys) {
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(sy(y), 2) << "\" x2=\"" << left << "\" y2=\""
        << fixed(sy(y), 2) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy(y) + 4, 2)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << fixed(std::abs(y) < 1e-12 * ys ? 0.0 : y, decimals_for(ys)) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">time_us</text>\n";
  out << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 20 "
      << top + ph / 2 << ")\">signal</text>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << (i == 0 ? "" : " ") << fixed(sx(times[i]), 2) << ',' << fixed(sy(values[i]), 2);
  }
  out << "\"/>\n</svg>\n";
}

}  // namespace collrabi
