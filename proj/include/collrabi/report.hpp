#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "collrabi/analysis.hpp"
#include "collrabi/dynamics.hpp"
#include "collrabi/fitting.hpp"

namespace collrabi {

// Flat `key = value` lines followed by a machine block
//   # BEGIN RESULTS
//   name,estimate,std_error,unit,estimate_mhz,std_error_mhz
//   ...
//   # END RESULTS
// Angular parameters are echoed in cyclic MHz; other rows leave the MHz
// columns empty.
void write_fit_report(std::ostream& out, const FitResult& fit);

void write_peaks_report(std::ostream& out, const PeakSet& peaks, const QuadraticPeakFit& quad,
                        std::span<const double> spacings);

void write_compare_report(std::ostream& out, const ModelComparison& cmp);

// Two columns `time_us signal`, space separated.
void write_plot_data(std::ostream& out, std::span<const double> times, std::span<const double> values);

// Standalone SVG line plot with axes labelled time_us and signal.
void write_plot_svg(std::ostream& out, std::span<const double> times, std::span<const double> values,
                    const std::string& title);

}  // namespace collrabi
