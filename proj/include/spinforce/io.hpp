#ifndef SPINFORCE_IO_HPP
#define SPINFORCE_IO_HPP

// CSV exchange formats: two-column (t, z) time series with a JSON sidecar,
// and field maps.

#include "magnetostatics.hpp"
#include "mechanics.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace spinforce {

/// Shortest decimal that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".meta.json");
}

/// Writes "t,z" rows and a sidecar with the sample rate, seed and any extra
/// metadata.
inline void export_timeseries(const TimeSeries& ts, const std::filesystem::path& path,
                              const nlohmann::json& metadata = nlohmann::json::object()) {
  std::ofstream out(path);
  if (!out)
    throw error("cannot open " + path.string() + " for writing");
  out << "t,z\n";
  for (std::size_t i = 0; i < ts.samples.size(); ++i)
    out << format_double(ts.time(i)) << ',' << format_double(ts.samples[i]) << '\n';
  nlohmann::json meta = metadata;
  meta["sample_rate"] = ts.sample_rate;
  meta["seed"] = ts.seed;
  meta["samples"] = ts.samples.size();
  std::ofstream side(sidecar_path(path));
  side << meta.dump(2) << '\n';
}

struct TimeSeriesFormat {
  double sample_rate = 0.0; // Hz; 0 = sidecar if present, else inferred from t
  bool has_header = true;
  int time_column = 0;
  int value_column = 1;
  char delimiter = ',';
};

namespace detail {

inline double parse_field(const std::string& s, std::size_t line, const std::string& path) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r'))
    ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE)
    throw ParseError(path + ": row " + std::to_string(line) + ": cannot parse '" + s + "'");
  if (!std::isfinite(v))
    throw ParseError(path + ": row " + std::to_string(line) + ": non-finite value '" + s + "'");
  return v;
}

} // namespace detail

inline TimeSeries import_timeseries(const std::filesystem::path& path,
                                   const TimeSeriesFormat& fmt = {}) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path.string());
  std::vector<double> t, z;
  std::string line;
  std::size_t lineno = 0;
  const int ncols = std::max(fmt.time_column, fmt.value_column) + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && fmt.has_header)
      continue;
    if (line.empty() || line == "\r")
      continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, fmt.delimiter))
      cols.push_back(cell);
    if (static_cast<int>(cols.size()) < ncols)
      throw ParseError(path.string() + ": row " + std::to_string(lineno) + ": expected " +
                       std::to_string(ncols) + " columns");
    t.push_back(detail::parse_field(cols[fmt.time_column], lineno, path.string()));
    z.push_back(detail::parse_field(cols[fmt.value_column], lineno, path.string()));
  }
  if (z.size() < 2)
    throw TooShort(path.string() + ": fewer than two samples");

  TimeSeries ts;
  ts.sample_rate = fmt.sample_rate;
  if (!(ts.sample_rate > 0.0) && std::filesystem::exists(sidecar_path(path))) {
    std::ifstream side(sidecar_path(path));
    const auto meta = nlohmann::json::parse(side, nullptr, false);
    if (!meta.is_discarded() && meta.contains("sample_rate")) {
      ts.sample_rate = meta["sample_rate"].get<double>();
      ts.seed = meta.value("seed", std::uint64_t{0});
    }
  }
  if (!(ts.sample_rate > 0.0)) {
    const double span = t.back() - t.front();
    if (!(span > 0.0))
      throw NonuniformSampling(path.string() + ": time column is not increasing");
    ts.sample_rate = double(t.size() - 1) / span;
  }
  const double dt = 1.0 / ts.sample_rate;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - (t.front() + double(i) * dt)) > 1e-6 * dt)
      throw NonuniformSampling(path.string() + ": sample " + std::to_string(i) +
                               " is off the uniform grid");
  ts.samples = std::move(z);
  return ts;
}

inline void export_field_map(const std::vector<FieldSample>& samples,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw error("cannot open " + path.string() + " for writing");
  out << "x,y,z,Bx,By,Bz,dBzdz\n";
  for (const auto& s : samples)
    out << format_double(s.position.x()) << ',' << format_double(s.position.y()) << ','
        << format_double(s.position.z()) << ',' << format_double(s.B.x()) << ','
        << format_double(s.B.y()) << ',' << format_double(s.B.z()) << ','
        << format_double(s.gradB(2, 2)) << '\n';
}

} // namespace spinforce

#endif // SPINFORCE_IO_HPP
