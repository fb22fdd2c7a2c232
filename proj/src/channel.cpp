#include "cgldpc/channel.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cgldpc/tracker.hpp"

namespace cgldpc {

double GaussianSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = rng_.uniform_pos();  // (0,1]: keeps log finite
  const double u2 = rng_.uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::vector<double> modulate_bpsk(std::span<const std::uint8_t> bits) {
  std::vector<double> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = (bits[i] & 1) ? 1.0 : -1.0;
  return out;
}

std::vector<double> add_awgn(std::span<const double> signal, double precision,
                             std::uint64_t seed) {
  if (!(precision > 0.0)) throw std::invalid_argument("noise precision must be positive");
  const double sigma = 1.0 / std::sqrt(precision);
  GaussianSampler gs(seed);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = signal[i] + sigma * gs.next();
  return out;
}

namespace {
void check_len(std::size_t len) {
  if (len == 0) throw std::invalid_argument("trace length must be positive");
}
void check_precision(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("trace precision values must be positive");
}
}  // namespace

NoiseTrace constant_trace(double precision, std::size_t len) {
  check_len(len);
  check_precision(precision);
  return {std::vector<double>(len, precision), "constant"};
}

NoiseTrace step_trace(double before, double after, std::size_t change_at, std::size_t len) {
  check_len(len);
  check_precision(before);
  check_precision(after);
  if (change_at > len) throw std::invalid_argument("step position beyond trace length");
  NoiseTrace t{std::vector<double>(len), "step"};
  for (std::size_t i = 0; i < len; ++i) t.precision[i] = i < change_at ? before : after;
  return t;
}

NoiseTrace ramp_trace(double start, double end, std::size_t len) {
  check_len(len);
  check_precision(start);
  check_precision(end);
  NoiseTrace t{std::vector<double>(len), "ramp"};
  for (std::size_t i = 0; i < len; ++i) {
    const double f = len == 1 ? 0.0 : double(i) / double(len - 1);
    t.precision[i] = start + (end - start) * f;
  }
  return t;
}

NoiseTrace sinusoid_trace(double mean, double amplitude, double period, std::size_t len) {
  check_len(len);
  if (!(period > 0.0)) throw std::invalid_argument("sinusoid period must be positive");
  if (!(mean - std::fabs(amplitude) > 0.0))
    throw std::invalid_argument("sinusoid dips to a non-positive precision");
  NoiseTrace t{std::vector<double>(len), "sinusoid"};
  for (std::size_t i = 0; i < len; ++i)
    t.precision[i] = mean + amplitude * std::sin(2.0 * std::numbers::pi * double(i) / period);
  return t;
}

NoiseTrace load_trace_csv(std::istream& in, double rate, std::optional<std::size_t> upsample_to) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace CSV is empty");
  // strip potential BOM / whitespace / trailing CR
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  bool is_db;
  if (line == "precision")
    is_db = false;
  else if (line == "snr_db")
    is_db = true;
  else
    throw std::runtime_error("trace CSV header must be 'precision' or 'snr_db', got '" + line +
                             "'");

  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      double v = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      vals.push_back(is_db ? snr_db_to_precision(v, rate) : v);
    } catch (const std::exception&) {
      throw std::runtime_error("trace CSV line " + std::to_string(lineno) +
                               ": expected a number, got '" + line + "'");
    }
  }
  if (vals.empty()) throw std::runtime_error("trace CSV has a header but no rows");
  for (double v : vals) check_precision(v);

  if (upsample_to && *upsample_to != vals.size()) {
    const std::size_t target = *upsample_to;
    check_len(target);
    if (target < vals.size())
      throw std::invalid_argument("trace upsampling cannot shrink the trace");
    std::vector<double> up(target);
    const std::size_t m = vals.size();
    for (std::size_t t = 0; t < target; ++t) {
      const double pos = double(t) * double(m) / double(target);
      const std::size_t lo = std::size_t(pos);
      if (lo + 1 >= m)
        up[t] = vals[m - 1];  // hold the last value
      else
        up[t] = vals[lo] + (vals[lo + 1] - vals[lo]) * (pos - double(lo));
    }
    vals = std::move(up);
  }
  return {std::move(vals), "csv"};
}

NoiseTrace load_trace_csv_file(const std::string& path, double rate,
                               std::optional<std::size_t> upsample_to) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace CSV: " + path);
  NoiseTrace t = load_trace_csv(in, rate, upsample_to);
  t.source = "csv:" + path;
  return t;
}

NoiseTrace parse_trace_spec(const std::string& spec, std::size_t len) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty trace spec");
  auto num = [&](std::size_t i) {
    if (i >= parts.size())
      throw std::invalid_argument("trace spec '" + spec + "' is missing parameters");
    return std::stod(parts[i]);
  };
  const std::string& kind = parts[0];
  if (kind == "constant") return constant_trace(num(1), len);
  if (kind == "step") return step_trace(num(1), num(2), std::size_t(num(3)), len);
  if (kind == "ramp") return ramp_trace(num(1), num(2), len);
  if (kind == "sinusoid") return sinusoid_trace(num(1), num(2), num(3), len);
  throw std::invalid_argument("unknown trace kind '" + kind + "'");
}

}  // namespace cgldpc
