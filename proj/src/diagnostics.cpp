#include "qostiefel/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace qostiefel {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

double orthogonality_error(const BlockVector& U) {
  const DenseMatrix G = gram(U, U);
  double s = 0.0;
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t j = 0; j < G.cols(); ++j) {
      const double d = (i == j ? 1.0 : 0.0) - G(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

double grassmann_distance(const BlockVector& U, const BlockVector& V) {
  if (U.ambient_dim() != V.ambient_dim() || U.block_size() != V.block_size())
    throw ShapeError("grassmann_distance: block shapes differ");
  const SvdResult sv = thin_svd(gram(U, V));
  double sum = 0.0;
  for (double s : sv.sigma) sum += s;
  const double u2 = U.frobenius_norm() * U.frobenius_norm();
  const double v2 = V.frobenius_norm() * V.frobenius_norm();
  return std::sqrt(std::max(u2 + v2 - 2.0 * sum, 0.0));
}

std::vector<double> relative_iterate_error(const std::vector<BlockVector>& snapshots,
                                           const BlockVector& U_end) {
  if (snapshots.empty()) throw ContractError("relative_iterate_error: no snapshots");
  const double denom = U_end.frobenius_norm();
  if (denom == 0.0) throw ContractError("relative_iterate_error: reference block is zero");
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const BlockVector& S : snapshots) out.push_back(frobenius_distance(S, U_end) / denom);
  return out;
}

DecayFit fit_decay_ratio(const std::vector<double>& series, double floor_value) {
  if (floor_value < 0.0) throw ContractError("fit_decay_ratio: floor must be nonnegative");

  // Contiguous prefix above the floor; stops at the machine-precision plateau.
  std::size_t end = 0;
  while (end < series.size() && series[end] > floor_value) ++end;
  if (end < 3)
    throw FitError("fit_decay_ratio: only " + std::to_string(end) +
                   " leading entries above the floor; need at least 3");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < end; ++i) {
    const double x = static_cast<double>(i);
    const double y = std::log(series[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(end);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / m;

  DecayFit fit;
  fit.ratio = std::exp(slope);
  fit.window_begin = 0;
  fit.window_end = end;
  double worst = 0.0;
  for (std::size_t i = 0; i < end; ++i) {
    const double model = std::exp(intercept + slope * static_cast<double>(i));
    worst = std::max(worst, std::abs(series[i] / model - 1.0));
  }
  fit.residual = worst;
  return fit;
}

void write_trace(const std::vector<IterationRecord>& trace, const std::string& path,
                 TraceFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("write_trace: cannot open '" + path + "' for writing");

  if (format == TraceFormat::csv) {
    out << "n,energy,grad_norm,orth_err_pre,orth_err_post,step,inner_count,wall_time_s\n";
    for (const IterationRecord& r : trace) {
      out << r.n << ',' << format_double(r.energy) << ',' << format_double(r.grad_norm) << ','
          << format_double(r.orth_err_pre) << ',' << format_double(r.orth_err_post) << ','
          << format_double(r.step) << ',' << r.inner_count << ','
          << format_double(r.wall_time_s) << '\n';
    }
  } else {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const IterationRecord& r : trace) {
      nlohmann::ordered_json obj;
      obj["n"] = r.n;
      obj["energy"] = r.energy;
      obj["grad_norm"] = r.grad_norm;
      obj["orth_err_pre"] = r.orth_err_pre;
      obj["orth_err_post"] = r.orth_err_post;
      obj["step"] = r.step;
      obj["inner_count"] = r.inner_count;
      obj["wall_time_s"] = r.wall_time_s;
      records.push_back(std::move(obj));
    }
    out << records.dump(2) << "\n";
  }
  if (!out) throw IoError("write_trace: write failed for '" + path + "'");
}

}  // namespace qostiefel
