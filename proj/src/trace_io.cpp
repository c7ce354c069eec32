#include "collrabi/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <string_view>
#include <vector>

#include "collrabi/config.hpp"
#include "collrabi/errors.hpp"

namespace collrabi {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
  }
  return fields;
}

double field_value(std::string_view field, const char* column, std::size_t line) {
  try {
    const double v = parse_double(field, column);
    if (!std::isfinite(v)) throw ConfigError("non-finite value");
    return v;
  } catch (const ConfigError&) {
    throw ParseError("invalid " + std::string(column) + " value '" + std::string(field) + "'", line);
  }
}

}  // namespace

TimeTrace read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  bool has_sigma = false;
  bool header_seen = false;
  TimeTrace trace;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 3 && fields[0] == "time_us" && fields[1] == "counts" && fields[2] == "sigma") {
        has_sigma = true;
      } else if (fields.size() == 2 && fields[0] == "time_us" && fields[1] == "counts") {
        has_sigma = false;
      } else {
        throw ParseError("expected header 'time_us,counts,sigma' or 'time_us,counts'", number);
      }
      continue;
    }
    const std::size_t expected = has_sigma ? 3 : 2;
    if (fields.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, found " +
                           std::to_string(fields.size()),
                       number);
    }
    const double t = field_value(fields[0], "time_us", number);
    const double c = field_value(fields[1], "counts", number);
    if (c < 0.0) throw ParseError("negative counts", number);
    double s = poisson_sigma(c);
    if (has_sigma) {
      s = field_value(fields[2], "sigma", number);
      if (s < 0.0) throw ParseError("negative sigma", number);
    }
    if (!trace.times.empty()) {
      if (!(t > trace.times.back())) throw ParseError("time_us not strictly increasing", number);
      if (trace.times.size() >= 2) {
        const double h = trace.times[1] - trace.times[0];
        if (std::abs((t - trace.times.back()) - h) > 1e-9) {
          throw ParseError("time_us grid is not uniform", number);
        }
      }
    }
    trace.times.push_back(t);
    trace.counts.push_back(c);
    trace.sigma.push_back(s);
  }
  if (!header_seen) throw ParseError("empty trace file", number == 0 ? 1 : number);
  if (trace.times.empty()) throw ParseError("no data rows", number);
  return trace;
}

TimeTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const TimeTrace& trace) {
  out << "time_us,counts,sigma\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double s = i < trace.sigma.size() ? trace.sigma[i] : poisson_sigma(trace.counts[i]);
    out << format_double(trace.times[i]) << ',' << format_double(trace.counts[i]) << ','
        << format_double(s) << '\n';
  }
}

void write_trace_file(const std::string& path, const TimeTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_trace_csv(out, trace);
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace collrabi
