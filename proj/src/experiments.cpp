#include "cgldpc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>
#include <utility>

#include "cgldpc/kernels.hpp"

namespace cgldpc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DecoderSetup make_setup(ParityCheckMatrix h) {
  ClusterGraph g = build_ltrip(h);
  MessageSchedule ms = layered_schedule(g, select_large_clusters(g.clusters));
  BitAttachment at = attach_bits(g, ms);
  SystematicEncoder enc(h);
  double rate = h.rate();
  return DecoderSetup{std::move(h), std::move(g), std::move(ms), std::move(at), std::move(enc),
                      rate};
}

Mode parse_mode(const std::string& s) {
  if (s == "estimate") return Mode::Estimate;
  if (s == "perfect") return Mode::Perfect;
  if (s == "fixed") return Mode::Fixed;
  if (s == "fixed-offset") return Mode::FixedOffset;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected estimate|perfect|fixed|fixed-offset)");
}

std::string format_mode(Mode m) {
  switch (m) {
    case Mode::Estimate: return "estimate";
    case Mode::Perfect: return "perfect";
    case Mode::Fixed: return "fixed";
    case Mode::FixedOffset: return "fixed-offset";
  }
  throw std::logic_error("unreachable mode");
}

Packet make_packet(const DecoderSetup& s, double precision, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Packet p;
  p.message.resize(std::size_t(s.encoder.message_len()));
  for (auto& b : p.message) b = rng.bit();
  p.codeword = s.encoder.encode(p.message);
  const std::uint64_t noise_seed = rng.next();
  p.received = add_awgn(modulate_bpsk(p.codeword.bits), precision, noise_seed);
  return p;
}

int count_message_errors(const DecoderSetup& s, const Codeword& truth, const Codeword& decoded) {
  int e = 0;
  for (int pos : s.encoder.message_positions())
    e += truth.bits[std::size_t(pos)] != decoded.bits[std::size_t(pos)];
  return e;
}

std::vector<double> smoothed_ber(std::span<const int> errors_per_packet, int k, double a,
                                 long window) {
  if (!(a > 0.0)) throw std::invalid_argument("smoothing constant must be positive");
  if (k < 1) throw std::invalid_argument("packet bit count must be positive");
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  const long n = long(errors_per_packet.size());
  std::vector<double> rates(static_cast<std::size_t>(n));
  for (long p = 0; p < n; ++p)
    rates[std::size_t(p)] = (a + errors_per_packet[std::size_t(p)]) / (double(k) + a);
  if (window == 1) return rates;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long p = 0; p < n; ++p) {
    const long lo = std::max(0L, p - (window - 1) / 2);
    const long hi = std::min(n - 1, p + window / 2);
    double sum = 0.0;
    for (long q = lo; q <= hi; ++q) sum += rates[std::size_t(q)];
    out[std::size_t(p)] = sum / double(hi - lo + 1);
  }
  return out;
}

RateSummary summarize_rates(std::span<const int> errors_per_packet, int k, double a) {
  const std::vector<double> rates = smoothed_ber(errors_per_packet, k, a, 1);
  const std::size_t n = rates.size();
  if (n == 0) return {};
  double sum = 0.0;
  for (double r : rates) sum += r;
  const double mean = sum / double(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / double(n - 1));
  return {mean, 1.96 * sd / std::sqrt(double(n))};
}

namespace {

struct Batch {
  std::vector<Packet> packets;
  std::vector<double> precision;  // true per-packet precision
};

Batch make_batch(const DecoderSetup& s, std::span<const double> precision,
                 std::uint64_t base_seed, std::uint64_t first_index) {
  Batch b;
  b.precision.assign(precision.begin(), precision.end());
  b.packets.reserve(precision.size());
  for (std::size_t p = 0; p < precision.size(); ++p)
    b.packets.push_back(make_packet(s, precision[p], packet_seed(base_seed, first_index + p)));
  return b;
}

struct ModeParams {
  std::optional<long> window;
  double prior_mean = 1.0;
  double prior_nu = 2.0;
  double fixed_precision = 0.0;
  double offset_db = 0.0;
  DecodeConfig decode;
  int threads = 1;
};

// Sequential modes chain a tracker across the batch; the batch modes decode
// each packet independently (optionally across threads, results stored by
// index so the output never depends on the thread count).
ModeRun run_mode(const DecoderSetup& s, const Batch& b, Mode mode, const ModeParams& mp) {
  const std::size_t n = b.packets.size();
  ModeRun run;
  run.mode = mode;
  run.errors.resize(n);
  run.iters.resize(n);
  run.converged.resize(n);
  run.est_mean.resize(n);
  run.est_sd.resize(n);

  if (mode == Mode::Estimate || mode == Mode::FixedOffset) {
    TrackerState tr = make_tracker(GammaBelief::from_mean_nu(mp.prior_mean, mp.prior_nu),
                                   mp.window, s.h.cols);
    const double derate = std::pow(10.0, mp.offset_db / 10.0);
    for (std::size_t p = 0; p < n; ++p) {
      GammaBelief prior = tr.prior;
      if (mode == Mode::FixedOffset)
        prior = GammaBelief::from_omega_nu(prior.omega() * derate, prior.nu());
      DecodeResult res = decode(s.h, s.graph, s.schedule, s.attachment, prior,
                                b.packets[p].received, mp.decode);
      tr = advance(std::move(tr), res.posterior_gamma);
      run.errors[p] = count_message_errors(s, b.packets[p].codeword, res.bits);
      run.iters[p] = res.iterations;
      run.converged[p] = res.converged;
      run.est_mean[p] = tr.history.back().posterior_mean;
      run.est_sd[p] = tr.history.back().posterior_sd;
    }
    return run;
  }

  if (mode == Mode::Fixed && !(mp.fixed_precision > 0.0))
    throw std::invalid_argument("fixed-mode precision must be positive");
  run.fixed_precision_used = mode == Mode::Fixed ? mp.fixed_precision : 0.0;

  auto decode_one = [&](std::size_t p) {
    const double prec = mode == Mode::Perfect ? b.precision[p] : mp.fixed_precision;
    DecodeConfig dc = mp.decode;
    dc.fixed_gamma = point_gamma_moments(prec);
    DecodeResult res = decode(s.h, s.graph, s.schedule, s.attachment,
                              GammaBelief::from_mean_nu(prec, mp.prior_nu),
                              b.packets[p].received, dc);
    run.errors[p] = count_message_errors(s, b.packets[p].codeword, res.bits);
    run.iters[p] = res.iterations;
    run.converged[p] = res.converged;
    run.est_mean[p] = prec;
    run.est_sd[p] = 0.0;
  };

  const int nthreads = std::max(1, mp.threads);
  if (nthreads == 1 || n < 2) {
    for (std::size_t p = 0; p < n; ++p) decode_one(p);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunks = std::min<std::size_t>(std::size_t(nthreads), n);
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c)
      pool.emplace_back([&, c] {
        for (std::size_t p = c; p < n; p += chunks) decode_one(p);
      });
    for (auto& t : pool) t.join();
  }
  return run;
}

double mean_of_int(std::span<const int> v) {
  double sum = 0.0;
  for (int x : v) sum += x;
  return v.empty() ? 0.0 : sum / double(v.size());
}

std::string join_modes(const std::vector<Mode>& modes) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ",";
    out += format_mode(modes[i]);
  }
  return out;
}

std::string window_str(const std::optional<long>& w) {
  return w ? std::to_string(*w) : std::string("inf");
}

void append_common_meta(std::string& out, const DecoderSetup& s, std::uint64_t seed,
                        const DecodeConfig& dc, double a) {
  out += "# code: n=" + std::to_string(s.h.cols) + " m=" + std::to_string(s.h.rows) +
         " k=" + std::to_string(s.encoder.message_len()) + " rate=" + format_double(s.rate) +
         "\n";
  out += "# seed=" + std::to_string(seed) + "\n";
  out += "# decode: max_iter=" + std::to_string(dc.max_iter) +
         " calibration_tol=" + format_double(dc.calibration_tol) +
         " deactivation_threshold=" + format_double(dc.deactivation_threshold) +
         " deactivate=" + (dc.deactivate_clusters ? std::string("1") : std::string("0")) + "\n";
  out += "# smoothing: a=" + format_double(a) + " k=" + std::to_string(s.encoder.message_len()) +
         " rate_p=(a+errors_p)/(k+a)\n";
  out += "# ci95: 1.96*sd/sqrt(packets) over per-packet smoothed rates (normal approximation)\n";
  out += "# kernels=" + std::string(kernels::active_name()) + "\n";
}

std::vector<double> linspace(double start, double stop, int points) {
  if (points < 1) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(points));
  if (points == 1) {
    v[0] = start;
    return v;
  }
  const double step = (stop - start) / double(points - 1);
  for (int i = 0; i < points; ++i) v[std::size_t(i)] = start + step * i;
  return v;
}

}  // namespace

SweepResult run_ber_sweep(const DecoderSetup& s, const SweepConfig& cfg) {
  if (cfg.packets < 1) throw std::invalid_argument("packets per point must be >= 1");
  if (cfg.modes.empty()) throw std::invalid_argument("at least one mode is required");

  SweepResult r;
  r.cfg = cfg;
  r.snr_grid_db = linspace(cfg.snr_start_db, cfg.snr_stop_db, cfg.points);

  ModeParams mp;
  mp.window = cfg.window_packets;
  mp.prior_mean = cfg.prior_mean;
  mp.prior_nu = cfg.prior_nu;
  mp.fixed_precision = cfg.fixed_precision;
  mp.offset_db = cfg.offset_db;
  mp.decode = cfg.decode;
  mp.threads = cfg.threads;

  for (std::size_t i = 0; i < r.snr_grid_db.size(); ++i) {
    const double snr_db = r.snr_grid_db[i];
    const double precision = snr_db_to_precision(snr_db, s.rate);
    const std::vector<double> trace(std::size_t(cfg.packets), precision);
    const Batch batch =
        make_batch(s, trace, cfg.seed, std::uint64_t(i) * std::uint64_t(cfg.packets));
    for (Mode mode : cfg.modes) {
      ModeRun run = run_mode(s, batch, mode, mp);
      const RateSummary rs =
          summarize_rates(run.errors, s.encoder.message_len(), cfg.smoothing_a);
      r.points.push_back(SweepPoint{snr_db, mode, rs.ber, rs.ci95, mean_of_int(run.iters),
                                    cfg.packets});
      r.runs.push_back(std::move(run));
    }
  }
  return r;
}

std::string sweep_csv(const DecoderSetup& s, const SweepResult& r) {
  const SweepConfig& c = r.cfg;
  std::string out = "# ber-sweep results\n";
  append_common_meta(out, s, c.seed, c.decode, c.smoothing_a);
  out += "# grid: snr_start_db=" + format_double(c.snr_start_db) +
         " snr_stop_db=" + format_double(c.snr_stop_db) + " points=" + std::to_string(c.points) +
         " packets_per_point=" + std::to_string(c.packets) + "\n";
  out += "# modes=" + join_modes(c.modes) + "\n";
  out += "# estimate: window_packets=" + window_str(c.window_packets) +
         " prior_mean=" + format_double(c.prior_mean) + " prior_nu=" + format_double(c.prior_nu) +
         "\n";
  out += "# fixed_precision=" + format_double(c.fixed_precision) +
         " offset_db=" + format_double(c.offset_db) + "\n";
  out += "snr_db,mode,ber,ci95,mean_iters,packets\n";
  for (const SweepPoint& p : r.points)
    out += format_double(p.snr_db) + "," + format_mode(p.mode) + "," + format_double(p.ber) +
           "," + format_double(p.ci95) + "," + format_double(p.mean_iters) + "," +
           std::to_string(p.packets) + "\n";
  return out;
}

TrackResult run_tracking(const DecoderSetup& s, const TrackConfig& cfg, const NoiseTrace& trace) {
  const long available = long(trace.precision.size());
  const long packets = cfg.packets == 0 ? available : cfg.packets;
  if (packets < 1) throw std::invalid_argument("tracking needs at least one packet");
  if (available < packets)
    throw std::runtime_error("noise trace is shorter than the requested run (" +
                             std::to_string(available) + " < " + std::to_string(packets) + ")");
  if (cfg.modes.empty()) throw std::invalid_argument("at least one mode is required");

  TrackResult r;
  r.cfg = cfg;
  r.trace.source = trace.source;
  r.trace.precision.assign(trace.precision.begin(), trace.precision.begin() + packets);

  const Batch batch = make_batch(s, r.trace.precision, cfg.seed, 0);

  ModeParams mp;
  mp.window = cfg.window_packets;
  mp.prior_mean = cfg.prior_mean;
  mp.prior_nu = cfg.prior_nu;
  mp.offset_db = cfg.offset_db;
  mp.decode = cfg.decode;
  mp.threads = cfg.threads;

  const bool wants_fixed =
      std::find(cfg.modes.begin(), cfg.modes.end(), Mode::Fixed) != cfg.modes.end();
  if (cfg.fixed_precision) {
    r.fixed_precision_used = *cfg.fixed_precision;
  } else if (wants_fixed) {
    // long-run average baseline: final posterior mean of an uncapped pass
    ModeParams pre = mp;
    pre.window = std::nullopt;
    const ModeRun prepass = run_mode(s, batch, Mode::Estimate, pre);
    r.fixed_precision_used = prepass.est_mean.back();
  }
  mp.fixed_precision = r.fixed_precision_used;

  for (Mode mode : cfg.modes) {
    ModeRun run = run_mode(s, batch, mode, mp);
    const RateSummary rs = summarize_rates(run.errors, s.encoder.message_len(), cfg.smoothing_a);
    r.summaries.push_back(TrackModeSummary{mode, rs.ber, rs.ci95, mean_of_int(run.iters)});
    r.ma_series.push_back(
        smoothed_ber(run.errors, s.encoder.message_len(), cfg.smoothing_a, cfg.ma_window));
    r.runs.push_back(std::move(run));
  }
  return r;
}

std::string track_csv(const DecoderSetup& s, const TrackResult& r) {
  const TrackConfig& c = r.cfg;
  std::string out = "# tracking results\n";
  append_common_meta(out, s, c.seed, c.decode, c.smoothing_a);
  out += "# trace: source=" + r.trace.source +
         " packets=" + std::to_string(r.trace.precision.size()) + "\n";
  out += "# modes=" + join_modes(c.modes) + "\n";
  out += "# estimate: window_packets=" + window_str(c.window_packets) +
         " prior_mean=" + format_double(c.prior_mean) + " prior_nu=" + format_double(c.prior_nu) +
         "\n";
  out += "# fixed_precision_used=" + format_double(r.fixed_precision_used) +
         " offset_db=" + format_double(c.offset_db) + "\n";
  out += "# ma_window=" + std::to_string(c.ma_window) + "\n";
  for (const TrackModeSummary& ms : r.summaries)
    out += "# summary: mode=" + format_mode(ms.mode) + " ber=" + format_double(ms.ber) +
           " ci95=" + format_double(ms.ci95) + " mean_iters=" + format_double(ms.mean_iters) +
           "\n";
  out += "packet,mode,true_precision,est_mean,est_sd,errors,iters\n";
  for (std::size_t m = 0; m < r.runs.size(); ++m) {
    const ModeRun& run = r.runs[m];
    for (std::size_t p = 0; p < run.errors.size(); ++p)
      out += std::to_string(p) + "," + format_mode(run.mode) + "," +
             format_double(r.trace.precision[p]) + "," + format_double(run.est_mean[p]) + "," +
             format_double(run.est_sd[p]) + "," + std::to_string(run.errors[p]) + "," +
             std::to_string(run.iters[p]) + "\n";
  }
  return out;
}

std::string track_ma_csv(const TrackResult& r) {
  std::string out = "# smoothed error-rate series, window=" + std::to_string(r.cfg.ma_window) +
                    "\n";
  out += "packet,mode,ma_ber\n";
  for (std::size_t m = 0; m < r.runs.size(); ++m)
    for (std::size_t p = 0; p < r.ma_series[m].size(); ++p)
      out += std::to_string(p) + "," + format_mode(r.runs[m].mode) + "," +
             format_double(r.ma_series[m][p]) + "\n";
  return out;
}

MismatchResult run_mismatch(const DecoderSetup& s, const MismatchConfig& cfg) {
  if (!(cfg.actual_precision > 0.0))
    throw std::invalid_argument("actual precision must be positive");
  if (cfg.packets < 1) throw std::invalid_argument("packets must be >= 1");

  MismatchResult r;
  r.cfg = cfg;
  r.actual_snr_db = precision_to_snr_db(cfg.actual_precision, s.rate);

  const std::vector<double> trace(std::size_t(cfg.packets), cfg.actual_precision);
  const Batch batch = make_batch(s, trace, cfg.seed, 0);

  ModeParams mp;
  mp.decode = cfg.decode;
  mp.threads = cfg.threads;

  for (double offset : linspace(cfg.grid_start_db, cfg.grid_stop_db, cfg.grid_points)) {
    const double model_snr_db = r.actual_snr_db + offset;
    mp.fixed_precision = snr_db_to_precision(model_snr_db, s.rate);
    ModeRun run = run_mode(s, batch, Mode::Fixed, mp);
    const RateSummary rs = summarize_rates(run.errors, s.encoder.message_len(), cfg.smoothing_a);
    r.points.push_back(MismatchPoint{model_snr_db, rs.ber, rs.ci95, mean_of_int(run.iters)});
    r.runs.push_back(std::move(run));
  }
  return r;
}

std::string mismatch_csv(const DecoderSetup& s, const MismatchResult& r) {
  const MismatchConfig& c = r.cfg;
  std::string out = "# model-mismatch results\n";
  append_common_meta(out, s, c.seed, c.decode, c.smoothing_a);
  out += "# actual: precision=" + format_double(c.actual_precision) +
         " snr_db=" + format_double(r.actual_snr_db) + "\n";
  out += "# grid: offsets " + format_double(c.grid_start_db) + ".." +
         format_double(c.grid_stop_db) + " dB relative to actual, points=" +
         std::to_string(c.grid_points) + " packets_per_point=" + std::to_string(c.packets) +
         "\n";
  out += "model_snr_db,ber,ci95,mean_iters\n";
  for (const MismatchPoint& p : r.points)
    out += format_double(p.model_snr_db) + "," + format_double(p.ber) + "," +
           format_double(p.ci95) + "," + format_double(p.mean_iters) + "\n";
  return out;
}

}  // namespace cgldpc
