#include "cdm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cdm {

namespace {

std::string format_row(const StepRecord& r, bool timing) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%zu,%.6f,%d", r.step, r.control, r.load,
                r.flux, r.dof_count, timing ? r.wall_time_s : 0.0, r.refinement_events);
  return buf;
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

void write_series(std::ostream& out, const std::vector<StepRecord>& records, bool timing) {
  out << kSeriesHeader << '\n';
  for (const StepRecord& r : records) out << format_row(r, timing) << '\n';
}

void write_series(const std::filesystem::path& file, const std::vector<StepRecord>& records,
                  bool timing) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  write_series(out, records, timing);
}

std::vector<StepRecord> read_series(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != kSeriesHeader) {
    throw std::runtime_error(file.string() + ": unexpected header");
  }
  std::vector<StepRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    StepRecord r;
    if (!(row >> r.step >> r.control >> r.load >> r.flux >> r.dof_count >> r.wall_time_s >>
          r.refinement_events)) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    out.push_back(r);
  }
  return out;
}

StepRecord interpolate_series(const std::vector<StepRecord>& s, double x) {
  if (s.empty()) throw std::runtime_error("empty series");
  if (x <= s.front().control) return s.front();
  if (x >= s.back().control) return s.back();
  const auto it = std::lower_bound(s.begin(), s.end(), x, [](const StepRecord& r, double v) {
    return r.control < v;
  });
  const StepRecord& hi = *it;
  const StepRecord& lo = *(it - 1);
  const double span = hi.control - lo.control;
  const double t = span > 0.0 ? (x - lo.control) / span : 0.0;
  StepRecord r = lo;
  r.control = x;
  r.load = lerp(lo.load, hi.load, t);
  r.flux = lerp(lo.flux, hi.flux, t);
  // Discrete quantities are taken from the committed step at or before x.
  r.dof_count = t < 1.0 ? lo.dof_count : hi.dof_count;
  r.wall_time_s = lerp(lo.wall_time_s, hi.wall_time_s, t);
  return r;
}

CompareReport compare_series(const std::vector<StepRecord>& a, const std::vector<StepRecord>& b,
                             const CompareTolerances& tol) {
  if (a.empty() || b.empty()) throw std::runtime_error("cannot compare an empty series");
  const double lo = std::max(a.front().control, b.front().control);
  const double hi = std::min(a.back().control, b.back().control);
  if (lo > hi) throw std::runtime_error("control ranges are disjoint");

  CompareReport rep;
  bool same_grid = a.size() == b.size();
  for (std::size_t i = 0; same_grid && i < a.size(); ++i) {
    same_grid = a[i].control == b[i].control;
  }
  rep.resampled = !same_grid;

  double peak_load = 0.0;
  double peak_flux = 0.0;
  for (const StepRecord& r : a) {
    peak_load = std::max(peak_load, std::abs(r.load));
    peak_flux = std::max(peak_flux, std::abs(r.flux));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const StepRecord& ra = a[i];
    if (ra.control < lo || ra.control > hi) continue;
    const StepRecord rb = same_grid ? b[i] : interpolate_series(b, ra.control);
    ++rep.points;
    const double dl = std::abs(ra.load - rb.load);
    const double df = std::abs(ra.flux - rb.flux);
    rep.load_deviation = std::max(rep.load_deviation, peak_load > 0.0 ? dl / peak_load : dl);
    rep.flux_deviation = std::max(rep.flux_deviation, peak_flux > 0.0 ? df / peak_flux : df);
    if (ra.dof_count > 0) {
      rep.dof_ratio = std::max(rep.dof_ratio, static_cast<double>(rb.dof_count) /
                                                  static_cast<double>(ra.dof_count));
    }
  }
  const double wa = interpolate_series(a, hi).wall_time_s;
  const double wb = interpolate_series(b, hi).wall_time_s;
  rep.wall_ratio = wa > 0.0 ? wb / wa : 0.0;
  rep.pass = rep.load_deviation <= tol.load && rep.flux_deviation <= tol.flux;
  return rep;
}

BatchAggregate aggregate_runs(const std::vector<std::vector<StepRecord>>& runs,
                              const std::vector<double>& grid, std::size_t failed) {
  BatchAggregate agg;
  agg.realizations = runs.size();
  agg.failed = failed;
  const double n = static_cast<double>(runs.size());
  for (const double x : grid) {
    BandPoint p;
    p.control = x;
    std::vector<StepRecord> at;
    at.reserve(runs.size());
    for (const auto& r : runs) at.push_back(interpolate_series(r, x));
    for (const StepRecord& r : at) {
      p.load_mean += r.load / n;
      p.flux_mean += r.flux / n;
      p.dof_mean += static_cast<double>(r.dof_count) / n;
      p.wall_mean += r.wall_time_s / n;
    }
    if (runs.size() > 1) {
      double sl = 0.0;
      double sf = 0.0;
      for (const StepRecord& r : at) {
        sl += (r.load - p.load_mean) * (r.load - p.load_mean);
        sf += (r.flux - p.flux_mean) * (r.flux - p.flux_mean);
      }
      p.load_std = std::sqrt(sl / (n - 1.0));
      p.flux_std = std::sqrt(sf / (n - 1.0));
    }
    agg.band.push_back(p);
  }
  return agg;
}

void write_band(const std::filesystem::path& file, const BatchAggregate& agg) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "control_value,load_mean,load_std,flux_mean,flux_std,dof_mean,wall_time_mean\n";
  char buf[320];
  for (const BandPoint& p : agg.band) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.6f,%.6f\n", p.control,
                  p.load_mean, p.load_std, p.flux_mean, p.flux_std, p.dof_mean, p.wall_mean);
    out << buf;
  }
}

}  // namespace cdm
