#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/csv.hpp"

namespace stoclab {

enum class TolerancePolicy { analytic, mc3sigma };

inline TolerancePolicy tolerance_policy_from_string(const std::string& s) {
  if (s == "analytic") return TolerancePolicy::analytic;
  if (s == "mc3sigma") return TolerancePolicy::mc3sigma;
  fail(errc::config_parse_error, "unknown tolerance policy '" + s + "'");
}

struct ComparableSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> std_error;  // zeros when the source is deterministic
};

/// Pulls (t, value[, stderr]) out of a CSV table. The value column is chosen
/// by name, falling back to name_n (the occupation-number variants) and then
/// to the first non-time column.
inline ComparableSeries extract_series(const CsvTable& table, const std::string& value_column,
                                       const std::string& label) {
  ComparableSeries s;
  s.label = label;
  int tcol = table.column_index("t");
  require(tcol >= 0, errc::config_parse_error, label + ": no 't' column");
  int vcol = -1;
  if (!value_column.empty()) {
    vcol = table.column_index(value_column);
    if (vcol < 0) vcol = table.column_index(value_column + "_n");
    require(vcol >= 0, errc::config_parse_error,
            label + ": no column '" + value_column + "'");
  } else {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (static_cast<int>(i) != tcol) {
        vcol = static_cast<int>(i);
        break;
      }
    require(vcol >= 0, errc::config_parse_error, label + ": no value column");
  }
  int ecol = table.column_index("stderr");
  if (ecol < 0) ecol = table.column_index("stderr_" + table.columns[static_cast<std::size_t>(vcol)]);
  s.t = table.column(tcol);
  s.value = table.column(vcol);
  s.std_error = ecol >= 0 ? table.column(ecol) : std::vector<double>(s.t.size(), 0.0);
  return s;
}

struct ComparePoint {
  double t = 0.0;
  double abs_dev = 0.0;
  double z = 0.0;
};

struct CompareReport {
  bool pass = false;
  bool interpolated = false;
  TolerancePolicy policy = TolerancePolicy::analytic;
  double abs_tol = 0.0;
  double max_abs_dev = 0.0;
  double max_z = 0.0;
  std::vector<ComparePoint> points;  // worst pair per shared time

  std::string text() const {
    std::ostringstream os;
    os << "policy=" << (policy == TolerancePolicy::analytic ? "analytic" : "mc3sigma");
    if (interpolated) os << " (interpolated onto the coarser grid)";
    os << "\n";
    for (const auto& p : points)
      os << "t=" << format_double(p.t) << "  |dev|=" << format_double(p.abs_dev)
         << "  z=" << format_double(p.z) << "\n";
    os << "max|dev|=" << format_double(max_abs_dev) << "  max z=" << format_double(max_z) << "\n";
    os << (pass ? "PASS" : "FAIL") << "\n";
    return os.str();
  }
};

namespace detail {

inline std::vector<double> interp_onto(const std::vector<double>& t_src,
                                       const std::vector<double>& v_src,
                                       const std::vector<double>& t_dst) {
  std::vector<double> out(t_dst.size());
  for (std::size_t i = 0; i < t_dst.size(); ++i) {
    const double t = t_dst[i];
    auto it = std::lower_bound(t_src.begin(), t_src.end(), t);
    if (it == t_src.begin()) {
      out[i] = v_src.front();
    } else if (it == t_src.end()) {
      out[i] = v_src.back();
    } else {
      const std::size_t j = static_cast<std::size_t>(it - t_src.begin());
      const double w = (t - t_src[j - 1]) / (t_src[j] - t_src[j - 1]);
      out[i] = (1.0 - w) * v_src[j - 1] + w * v_src[j];
    }
  }
  return out;
}

inline bool grids_match(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
  return true;
}

}  // namespace detail

/// Pairwise deviation metrics over all input series; symmetric in the inputs.
/// analytic: max |dev| must stay below abs_tol. mc3sigma: the z score
/// |dev| / sqrt(se1^2 + se2^2) must stay below 3 wherever a standard error is
/// available (points with no spread fall back to the analytic rule).
inline CompareReport compare_series(std::vector<ComparableSeries> series, TolerancePolicy policy,
                                    double abs_tol = 1e-9, bool allow_interpolation = false) {
  require(series.size() >= 2, errc::config_parse_error, "compare needs at least two series");
  CompareReport report;
  report.policy = policy;
  report.abs_tol = abs_tol;
  // align grids onto the coarsest one
  std::size_t coarsest = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i].t.size() < series[coarsest].t.size()) coarsest = i;
  const std::vector<double> t_ref = series[coarsest].t;
  for (auto& s : series) {
    if (detail::grids_match(s.t, t_ref)) continue;
    require(allow_interpolation, errc::grid_mismatch,
            s.label + ": time grid differs (pass --interpolate to resample)");
    s.value = detail::interp_onto(s.t, s.value, t_ref);
    s.std_error = detail::interp_onto(s.t, s.std_error, t_ref);
    s.t = t_ref;
    report.interpolated = true;
  }
  report.points.resize(t_ref.size());
  bool pass = true;
  for (std::size_t i = 0; i < t_ref.size(); ++i) {
    ComparePoint pt;
    pt.t = t_ref[i];
    for (std::size_t p = 0; p < series.size(); ++p)
      for (std::size_t q = p + 1; q < series.size(); ++q) {
        const double dev = std::abs(series[p].value[i] - series[q].value[i]);
        const double se = std::hypot(series[p].std_error[i], series[q].std_error[i]);
        pt.abs_dev = std::max(pt.abs_dev, dev);
        if (se > 0.0) pt.z = std::max(pt.z, dev / se);
        const bool ok = policy == TolerancePolicy::analytic || se == 0.0 ? dev <= abs_tol
                                                                         : dev <= 3.0 * se;
        pass = pass && ok;
      }
    report.max_abs_dev = std::max(report.max_abs_dev, pt.abs_dev);
    report.max_z = std::max(report.max_z, pt.z);
    report.points[i] = pt;
  }
  report.pass = pass;
  return report;
}

}  // namespace stoclab
