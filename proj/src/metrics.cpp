#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "enzyrx/errors.hpp"
#include "enzyrx/harness.hpp"

namespace enzyrx {

namespace {

bool same_time(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) < 1e-9;
}

// Shortest round-trip representation, empty for NaN.
std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  double back = 0.0;
  for (int p = 6; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << v;
    std::istringstream(t.str()) >> back;
    if (back == v) return t.str();
  }
  return s.str();
}

nlohmann::json json_num(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::optional<MetricRow> MetricTable::find(const MetricQuery& q) const {
  for (const auto& r : rows_)
    if (r.metric == q.metric && r.symbol == q.symbol && r.estimator == q.estimator &&
        r.receiver == q.receiver && same_time(r.decision_time, q.decision_time))
      return r;
  return std::nullopt;
}

const MetricRow& MetricTable::get(const MetricQuery& q) const {
  for (const auto& r : rows_)
    if (r.metric == q.metric && r.symbol == q.symbol && r.estimator == q.estimator &&
        r.receiver == q.receiver && same_time(r.decision_time, q.decision_time))
      return r;
  throw InvalidReference("no metric '" + q.metric + "' for symbol " + std::to_string(q.symbol) +
                         " estimator '" + q.estimator + "'");
}

void MetricTable::write_csv(std::ostream& out) const {
  out << "experiment,symbol,estimator,receiver,decision_time,metric,value,ci_half_width,ci_lo,"
         "ci_hi,n\n";
  for (const auto& r : rows_) {
    out << r.experiment << ',' << (r.symbol < 0 ? std::string() : std::to_string(r.symbol))
        << ',' << r.estimator << ',' << r.receiver << ',' << num(r.decision_time) << ','
        << r.metric << ',' << num(r.value) << ',' << num(r.ci_half_width) << ','
        << num(r.ci_lo) << ',' << num(r.ci_hi) << ',' << r.n << '\n';
  }
}

nlohmann::json MetricTable::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json j{{"experiment", r.experiment}, {"metric", r.metric}, {"value", json_num(r.value)},
                     {"n", r.n}};
    if (r.symbol >= 0) j["symbol"] = r.symbol;
    if (!r.estimator.empty()) j["estimator"] = r.estimator;
    if (!r.receiver.empty()) j["receiver"] = r.receiver;
    if (!std::isnan(r.decision_time)) j["decision_time"] = r.decision_time;
    if (!std::isnan(r.ci_half_width)) j["ci_half_width"] = r.ci_half_width;
    if (!std::isnan(r.ci_lo)) j["ci"] = {r.ci_lo, r.ci_hi};
    arr.push_back(std::move(j));
  }
  return arr;
}

Interval wilson_interval(double p, std::size_t n, double z) {
  if (n == 0) throw InvalidReference("wilson_interval: zero trials");
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MeanEstimate mean_ci(std::span<const double> xs) {
  MeanEstimate m;
  m.n = xs.size();
  if (xs.empty()) {
    m.mean = kNaN;
    return m;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    m.half_width = 1.959963984540054 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return m;
}

std::vector<double> rmse(std::span<const LlrTrace> a, std::span<const LlrTrace> b) {
  if (a.size() != b.size()) throw InvalidReference("rmse: mismatched trial counts");
  if (a.empty()) throw InvalidReference("rmse: no trials");
  const std::size_t n = a.front().times.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].times.size() != n || b[r].times.size() != n || a[r].values.size() != n ||
        b[r].values.size() != n)
      throw InvalidReference("rmse: traces are not on one grid");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(a[r].times[i] - b[r].times[i]) > 1e-9)
        throw InvalidReference("rmse: traces are not on one grid");
      const double d = a[r].values[i] - b[r].values[i];
      out[i] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(a.size()));
  return out;
}

BerEstimate ber(std::span<const int> decided_when0, std::span<const int> decided_when1) {
  if (decided_when0.empty() || decided_when1.empty())
    throw InvalidReference("ber: each symbol needs at least one trial");
  BerEstimate b;
  b.trials0 = decided_when0.size();
  b.trials1 = decided_when1.size();
  b.errors0 = static_cast<std::size_t>(std::count(decided_when0.begin(), decided_when0.end(), 1));
  b.errors1 = static_cast<std::size_t>(std::count(decided_when1.begin(), decided_when1.end(), 0));
  b.rate = 0.5 * (static_cast<double>(b.errors0) / static_cast<double>(b.trials0) +
                  static_cast<double>(b.errors1) / static_cast<double>(b.trials1));
  b.ci = wilson_interval(b.rate, b.trials0 + b.trials1);
  return b;
}

void TraceTable::add(std::string name, std::vector<double> values) {
  if (!data.empty() && values.size() != data.front().size())
    throw InvalidReference("trace column '" + name + "' has the wrong length");
  columns.push_back(std::move(name));
  data.push_back(std::move(values));
}

void TraceTable::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  const std::size_t rows = data.empty() ? 0 : data.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) out << (c ? "," : "") << num(data[c][r]);
    out << '\n';
  }
}

}  // namespace enzyrx
