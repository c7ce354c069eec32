#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "collrabi/analysis.hpp"

namespace collrabi {

// CSV with header `time_us,counts,sigma`, one row per bin, LF line endings.
// The sigma column may be omitted on input; it then defaults to
// sqrt(max(counts, 1)). Malformed input throws ParseError with the line number.
TimeTrace read_trace_csv(std::istream& in);
TimeTrace read_trace_file(const std::string& path);

void write_trace_csv(std::ostream& out, const TimeTrace& trace);
void write_trace_file(const std::string& path, const TimeTrace& trace);

}  // namespace collrabi
