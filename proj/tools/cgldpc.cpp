// Command-line front end: graph inspection, BER sweep, noise tracking,
// model-mismatch curve, and packet encoding/dumping.  All experiment output
// is CSV; rerunning any subcommand with the same flags and seed produces
// byte-identical files.
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgldpc/channel.hpp"
#include "cgldpc/experiments.hpp"
#include "cgldpc/kernels.hpp"

namespace {

using namespace cgldpc;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

// Simple key=value overrides applied after flag parsing, so a config file
// wins over flags.  Lines starting with '#' and blank lines are ignored.
class ConfigOverrides {
 public:
  void add(const std::string& key, std::function<void(const std::string&)> fn) {
    setters_[key] = std::move(fn);
  }

  void apply_file(const std::string& path) const {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      std::size_t start = line.find_first_not_of(' ');
      if (start == std::string::npos) continue;
      line = line.substr(start);
      if (line[0] == '#') continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected key=value, got '" + line + "'");
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      auto it = setters_.find(key);
      if (it == setters_.end())
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown config key '" +
                                 key + "'");
      try {
        it->second(value);
      } catch (const std::exception& e) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for '" + key +
                                 "': " + e.what());
      }
    }
  }

 private:
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};

double to_d(const std::string& v) { return std::stod(v); }
long to_l(const std::string& v) { return std::stol(v); }
int to_i(const std::string& v) { return std::stoi(v); }
std::uint64_t to_u64(const std::string& v) { return std::stoull(v); }
bool to_b(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  std::string kernels = "auto";
  std::string code = "(220,110)";
};

void add_common(CLI::App* sub, CommonOpts& c, ConfigOverrides& ov) {
  sub->add_option("--seed", c.seed, "base RNG seed")->capture_default_str();
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_option("--config", c.config, "key=value file applied after flags (overrides them)");
  sub->add_option("--kernels", c.kernels, "compute backend: auto|scalar|avx2")
      ->capture_default_str();
  sub->add_option("--code", c.code, "builtin name (16,8)/(220,110) or alist file path")
      ->capture_default_str();
  ov.add("seed", [&c](const std::string& v) { c.seed = to_u64(v); });
  ov.add("out", [&c](const std::string& v) { c.out = v; });
  ov.add("kernels", [&c](const std::string& v) { c.kernels = v; });
  ov.add("code", [&c](const std::string& v) { c.code = v; });
}

void apply_kernels(const std::string& name) {
  kernels::Backend b;
  if (name == "auto")
    b = kernels::Backend::Auto;
  else if (name == "scalar")
    b = kernels::Backend::Scalar;
  else if (name == "avx2")
    b = kernels::Backend::Avx2;
  else
    throw std::runtime_error("unknown kernel backend '" + name + "' (auto|scalar|avx2)");
  if (!kernels::select(b))
    throw std::runtime_error("kernel backend '" + name + "' is not available on this machine");
}

// "estimate,perfect,fixed(1.32),fixed-offset(-0.1)" — parenthesised values
// set the corresponding config fields.
struct ModeList {
  std::vector<Mode> modes;
  std::optional<double> fixed_precision;
  std::optional<double> offset_db;
};

ModeList parse_mode_list(const std::string& s) {
  ModeList out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(pos, comma - pos);
    pos = comma + 1;
    if (tok.empty()) continue;
    const std::size_t open = tok.find('(');
    if (open != std::string::npos) {
      if (tok.back() != ')')
        throw std::invalid_argument("bad mode token '" + tok + "': missing ')'");
      const std::string name = tok.substr(0, open);
      const double value = to_d(tok.substr(open + 1, tok.size() - open - 2));
      if (name == "fixed") {
        out.fixed_precision = value;
        out.modes.push_back(Mode::Fixed);
      } else if (name == "fixed-offset") {
        out.offset_db = value;
        out.modes.push_back(Mode::FixedOffset);
      } else {
        throw std::invalid_argument("mode '" + name + "' does not take a value");
      }
    } else {
      out.modes.push_back(parse_mode(tok));
    }
  }
  if (out.modes.empty()) throw std::invalid_argument("empty mode list");
  return out;
}

void add_decode_opts(CLI::App* sub, DecodeConfig& dc, ConfigOverrides& ov) {
  sub->add_option("--max-iter", dc.max_iter, "maximum belief-update sweeps per packet")
      ->capture_default_str();
  sub->add_option("--calibration-tol", dc.calibration_tol,
                  "per-edge symmetric-KL convergence tolerance")
      ->capture_default_str();
  sub->add_option("--deactivation-threshold", dc.deactivation_threshold,
                  "incoming-change threshold below which a cluster sleeps")
      ->capture_default_str();
  sub->add_flag("--no-deactivate", [&dc](std::int64_t) { dc.deactivate_clusters = false; },
                "disable cluster deactivation");
  ov.add("max-iter", [&dc](const std::string& v) { dc.max_iter = to_i(v); });
  ov.add("calibration-tol", [&dc](const std::string& v) { dc.calibration_tol = to_d(v); });
  ov.add("deactivation-threshold",
         [&dc](const std::string& v) { dc.deactivation_threshold = to_d(v); });
  ov.add("deactivate", [&dc](const std::string& v) { dc.deactivate_clusters = to_b(v); });
}

std::optional<long> window_from_long(long w) {
  if (w <= 0) return std::nullopt;  // infinite history
  return w;
}

int run_build_graph(const CommonOpts& c, const std::string& alist_out) {
  DecoderSetup s = make_setup(resolve_code(c.code));
  if (!alist_out.empty()) write_output(alist_out, save_alist_string(s.h));
  write_output(c.out, describe_graph(s.graph, s.schedule, s.attachment));
  return 0;
}

int run_sweep_cmd(const CommonOpts& c, SweepConfig cfg, const std::string& modes_arg,
                  long window) {
  const ModeList ml = parse_mode_list(modes_arg);
  cfg.modes = ml.modes;
  if (ml.fixed_precision) cfg.fixed_precision = *ml.fixed_precision;
  if (ml.offset_db) cfg.offset_db = *ml.offset_db;
  cfg.window_packets = window_from_long(window);
  cfg.seed = c.seed;
  DecoderSetup s = make_setup(resolve_code(c.code));
  const SweepResult r = run_ber_sweep(s, cfg);
  write_output(c.out, sweep_csv(s, r));
  return 0;
}

int run_track_cmd(const CommonOpts& c, TrackConfig cfg, const std::string& modes_arg, long window,
                  double fixed_precision, const std::string& trace_spec,
                  const std::string& trace_csv, long upsample, const std::string& ma_out) {
  const ModeList ml = parse_mode_list(modes_arg);
  cfg.modes = ml.modes;
  if (ml.fixed_precision) fixed_precision = *ml.fixed_precision;
  if (ml.offset_db) cfg.offset_db = *ml.offset_db;
  cfg.window_packets = window_from_long(window);
  if (fixed_precision > 0.0) cfg.fixed_precision = fixed_precision;
  cfg.seed = c.seed;

  DecoderSetup s = make_setup(resolve_code(c.code));
  NoiseTrace trace;
  if (!trace_csv.empty()) {
    std::optional<std::size_t> up;
    if (upsample > 0) up = std::size_t(upsample);
    trace = load_trace_csv_file(trace_csv, s.rate, up);
  } else if (!trace_spec.empty()) {
    const long len = cfg.packets > 0 ? cfg.packets : 1000;
    trace = parse_trace_spec(trace_spec, std::size_t(len));
  } else {
    throw std::runtime_error("track needs --trace or --trace-csv");
  }

  const TrackResult r = run_tracking(s, cfg, trace);
  write_output(c.out, track_csv(s, r));
  if (!ma_out.empty()) write_output(ma_out, track_ma_csv(r));
  return 0;
}

int run_mismatch_cmd(const CommonOpts& c, MismatchConfig cfg) {
  cfg.seed = c.seed;
  DecoderSetup s = make_setup(resolve_code(c.code));
  const MismatchResult r = run_mismatch(s, cfg);
  write_output(c.out, mismatch_csv(s, r));
  return 0;
}

int run_encode_cmd(const CommonOpts& c, const std::string& message, long random_packets,
                   double precision) {
  DecoderSetup s = make_setup(resolve_code(c.code));
  const int k = s.encoder.message_len();

  std::vector<Packet> packets;
  if (!message.empty()) {
    if (long(message.size()) != k)
      throw std::runtime_error("message must have exactly " + std::to_string(k) + " bits");
    Packet p;
    p.message.reserve(message.size());
    for (char ch : message) {
      if (ch != '0' && ch != '1')
        throw std::runtime_error("message must be a string of 0s and 1s");
      p.message.push_back(std::uint8_t(ch - '0'));
    }
    p.codeword = s.encoder.encode(p.message);
    p.received = precision > 0.0
                     ? add_awgn(modulate_bpsk(p.codeword.bits), precision,
                                SplitMix64(packet_seed(c.seed, 0)).next())
                     : modulate_bpsk(p.codeword.bits);
    packets.push_back(std::move(p));
  } else {
    if (random_packets < 1) throw std::runtime_error("encode needs --message or --random >= 1");
    for (long i = 0; i < random_packets; ++i) {
      if (precision > 0.0) {
        packets.push_back(make_packet(s, precision, packet_seed(c.seed, std::uint64_t(i))));
      } else {
        SplitMix64 rng(packet_seed(c.seed, std::uint64_t(i)));
        Packet p;
        p.message.resize(std::size_t(k));
        for (auto& b : p.message) b = rng.bit();
        p.codeword = s.encoder.encode(p.message);
        p.received = modulate_bpsk(p.codeword.bits);
        packets.push_back(std::move(p));
      }
    }
  }

  std::string out = "# encoded packets\n";
  out += "# code: n=" + std::to_string(s.h.cols) + " m=" + std::to_string(s.h.rows) +
         " k=" + std::to_string(k) + "\n";
  out += "# seed=" + std::to_string(c.seed) + " precision=" + format_double(precision) +
         (precision > 0.0 ? "" : " (noiseless)") + "\n";
  out += "packet,pos,bit,clean,received\n";
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const Packet& p = packets[i];
    const std::vector<double> clean = modulate_bpsk(p.codeword.bits);
    for (std::size_t pos = 0; pos < p.received.size(); ++pos)
      out += std::to_string(i) + "," + std::to_string(pos) + "," +
             std::to_string(int(p.codeword.bits[pos])) + "," + format_double(clean[pos]) + "," +
             format_double(p.received[pos]) + "\n";
  }
  write_output(c.out, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-graph LDPC decoding with sequential noise-precision tracking"};
  app.require_subcommand(1);
  int rc = 0;

  // ---- build-graph -------------------------------------------------------
  auto bg_common = std::make_shared<CommonOpts>();
  auto bg_alist = std::make_shared<std::string>();
  auto bg_ov = std::make_shared<ConfigOverrides>();
  CLI::App* bg = app.add_subcommand("build-graph", "construct and describe the cluster graph");
  add_common(bg, *bg_common, *bg_ov);
  bg->add_option("--alist-out", *bg_alist, "also export the parity-check matrix as alist");
  bg_ov->add("alist-out", [bg_alist](const std::string& v) { *bg_alist = v; });
  bg->callback([=, &rc] {
    bg_ov->apply_file(bg_common->config);
    apply_kernels(bg_common->kernels);
    rc = run_build_graph(*bg_common, *bg_alist);
  });

  // ---- ber-sweep ---------------------------------------------------------
  auto sw_common = std::make_shared<CommonOpts>();
  auto sw_cfg = std::make_shared<SweepConfig>();
  auto sw_modes = std::make_shared<std::string>("estimate,perfect");
  auto sw_window = std::make_shared<long>(10);
  auto sw_ov = std::make_shared<ConfigOverrides>();
  CLI::App* sw = app.add_subcommand("ber-sweep", "stationary BER sweep over an SNR grid");
  add_common(sw, *sw_common, *sw_ov);
  sw->add_option("--snr-start", sw_cfg->snr_start_db, "grid start (dB)")->capture_default_str();
  sw->add_option("--snr-stop", sw_cfg->snr_stop_db, "grid stop (dB)")->capture_default_str();
  sw->add_option("--points", sw_cfg->points, "grid points")->capture_default_str();
  sw->add_option("--packets", sw_cfg->packets, "packets per point")->capture_default_str();
  sw->add_option("--modes", *sw_modes, "comma list: estimate,perfect,fixed(P),fixed-offset(DB)")
      ->capture_default_str();
  sw->add_option("--window", *sw_window, "estimate-mode history window S in packets (<=0: inf)")
      ->capture_default_str();
  sw->add_option("--prior-mean", sw_cfg->prior_mean, "initial precision prior mean")
      ->capture_default_str();
  sw->add_option("--prior-nu", sw_cfg->prior_nu, "initial precision prior pseudo-count")
      ->capture_default_str();
  sw->add_option("--smoothing-a", sw_cfg->smoothing_a, "additive smoothing constant")
      ->capture_default_str();
  sw->add_option("--threads", sw_cfg->threads, "worker threads for the batch modes")
      ->capture_default_str();
  add_decode_opts(sw, sw_cfg->decode, *sw_ov);
  sw_ov->add("snr-start", [sw_cfg](const std::string& v) { sw_cfg->snr_start_db = to_d(v); });
  sw_ov->add("snr-stop", [sw_cfg](const std::string& v) { sw_cfg->snr_stop_db = to_d(v); });
  sw_ov->add("points", [sw_cfg](const std::string& v) { sw_cfg->points = to_i(v); });
  sw_ov->add("packets", [sw_cfg](const std::string& v) { sw_cfg->packets = to_l(v); });
  sw_ov->add("modes", [sw_modes](const std::string& v) { *sw_modes = v; });
  sw_ov->add("window", [sw_window](const std::string& v) { *sw_window = to_l(v); });
  sw_ov->add("prior-mean", [sw_cfg](const std::string& v) { sw_cfg->prior_mean = to_d(v); });
  sw_ov->add("prior-nu", [sw_cfg](const std::string& v) { sw_cfg->prior_nu = to_d(v); });
  sw_ov->add("smoothing-a", [sw_cfg](const std::string& v) { sw_cfg->smoothing_a = to_d(v); });
  sw_ov->add("threads", [sw_cfg](const std::string& v) { sw_cfg->threads = to_i(v); });
  sw->callback([=, &rc] {
    sw_ov->apply_file(sw_common->config);
    apply_kernels(sw_common->kernels);
    rc = run_sweep_cmd(*sw_common, *sw_cfg, *sw_modes, *sw_window);
  });

  // ---- track -------------------------------------------------------------
  auto tr_common = std::make_shared<CommonOpts>();
  auto tr_cfg = std::make_shared<TrackConfig>();
  auto tr_modes = std::make_shared<std::string>("estimate,perfect,fixed");
  auto tr_window = std::make_shared<long>(10);
  auto tr_fixed = std::make_shared<double>(0.0);
  auto tr_trace = std::make_shared<std::string>();
  auto tr_trace_csv = std::make_shared<std::string>();
  auto tr_upsample = std::make_shared<long>(0);
  auto tr_ma_out = std::make_shared<std::string>();
  auto tr_ov = std::make_shared<ConfigOverrides>();
  CLI::App* tr = app.add_subcommand("track", "sequential tracking over a noise trace");
  add_common(tr, *tr_common, *tr_ov);
  tr->add_option("--packets", tr_cfg->packets, "packets to run (0: whole trace)")
      ->capture_default_str();
  tr->add_option("--modes", *tr_modes, "comma list: estimate,perfect,fixed(P),fixed-offset(DB)")
      ->capture_default_str();
  tr->add_option("--window", *tr_window, "estimate-mode history window S in packets (<=0: inf)")
      ->capture_default_str();
  tr->add_option("--fixed-precision", *tr_fixed,
                 "fixed-mode precision (<=0: derive from an uncapped estimate pre-pass)")
      ->capture_default_str();
  tr->add_option("--prior-mean", tr_cfg->prior_mean, "initial precision prior mean")
      ->capture_default_str();
  tr->add_option("--prior-nu", tr_cfg->prior_nu, "initial precision prior pseudo-count")
      ->capture_default_str();
  tr->add_option("--smoothing-a", tr_cfg->smoothing_a, "additive smoothing constant")
      ->capture_default_str();
  tr->add_option("--ma-window", tr_cfg->ma_window, "moving-average window (packets)")
      ->capture_default_str();
  tr->add_option("--trace", *tr_trace,
                 "synthetic trace: constant:P | step:P1:P2:AT | ramp:P1:P2 | "
                 "sinusoid:MEAN:AMP:PERIOD");
  tr->add_option("--trace-csv", *tr_trace_csv, "trace CSV (header: precision or snr_db)");
  tr->add_option("--upsample", *tr_upsample, "stretch the CSV trace to this many packets");
  tr->add_option("--ma-out", *tr_ma_out, "also write the moving-average series to this file");
  tr->add_option("--threads", tr_cfg->threads, "worker threads for the batch modes")
      ->capture_default_str();
  add_decode_opts(tr, tr_cfg->decode, *tr_ov);
  tr_ov->add("packets", [tr_cfg](const std::string& v) { tr_cfg->packets = to_l(v); });
  tr_ov->add("modes", [tr_modes](const std::string& v) { *tr_modes = v; });
  tr_ov->add("window", [tr_window](const std::string& v) { *tr_window = to_l(v); });
  tr_ov->add("fixed-precision", [tr_fixed](const std::string& v) { *tr_fixed = to_d(v); });
  tr_ov->add("prior-mean", [tr_cfg](const std::string& v) { tr_cfg->prior_mean = to_d(v); });
  tr_ov->add("prior-nu", [tr_cfg](const std::string& v) { tr_cfg->prior_nu = to_d(v); });
  tr_ov->add("smoothing-a", [tr_cfg](const std::string& v) { tr_cfg->smoothing_a = to_d(v); });
  tr_ov->add("ma-window", [tr_cfg](const std::string& v) { tr_cfg->ma_window = to_l(v); });
  tr_ov->add("trace", [tr_trace](const std::string& v) { *tr_trace = v; });
  tr_ov->add("trace-csv", [tr_trace_csv](const std::string& v) { *tr_trace_csv = v; });
  tr_ov->add("upsample", [tr_upsample](const std::string& v) { *tr_upsample = to_l(v); });
  tr_ov->add("ma-out", [tr_ma_out](const std::string& v) { *tr_ma_out = v; });
  tr_ov->add("threads", [tr_cfg](const std::string& v) { tr_cfg->threads = to_i(v); });
  tr->callback([=, &rc] {
    tr_ov->apply_file(tr_common->config);
    apply_kernels(tr_common->kernels);
    rc = run_track_cmd(*tr_common, *tr_cfg, *tr_modes, *tr_window, *tr_fixed, *tr_trace,
                       *tr_trace_csv, *tr_upsample, *tr_ma_out);
  });

  // ---- mismatch ----------------------------------------------------------
  auto mm_common = std::make_shared<CommonOpts>();
  auto mm_cfg = std::make_shared<MismatchConfig>();
  auto mm_ov = std::make_shared<ConfigOverrides>();
  CLI::App* mm = app.add_subcommand(
      "mismatch", "BER vs assumed model SNR at one true precision (non-learning decoder)");
  add_common(mm, *mm_common, *mm_ov);
  mm->add_option("--actual-precision", mm_cfg->actual_precision, "true channel precision")
      ->capture_default_str();
  mm->add_option("--grid-start", mm_cfg->grid_start_db, "first model offset (dB, rel. actual)")
      ->capture_default_str();
  mm->add_option("--grid-stop", mm_cfg->grid_stop_db, "last model offset (dB, rel. actual)")
      ->capture_default_str();
  mm->add_option("--grid-points", mm_cfg->grid_points, "model grid points")
      ->capture_default_str();
  mm->add_option("--packets", mm_cfg->packets, "packets shared across the grid")
      ->capture_default_str();
  mm->add_option("--smoothing-a", mm_cfg->smoothing_a, "additive smoothing constant")
      ->capture_default_str();
  mm->add_option("--threads", mm_cfg->threads, "worker threads")->capture_default_str();
  add_decode_opts(mm, mm_cfg->decode, *mm_ov);
  mm_ov->add("actual-precision",
             [mm_cfg](const std::string& v) { mm_cfg->actual_precision = to_d(v); });
  mm_ov->add("grid-start", [mm_cfg](const std::string& v) { mm_cfg->grid_start_db = to_d(v); });
  mm_ov->add("grid-stop", [mm_cfg](const std::string& v) { mm_cfg->grid_stop_db = to_d(v); });
  mm_ov->add("grid-points", [mm_cfg](const std::string& v) { mm_cfg->grid_points = to_i(v); });
  mm_ov->add("packets", [mm_cfg](const std::string& v) { mm_cfg->packets = to_l(v); });
  mm_ov->add("smoothing-a", [mm_cfg](const std::string& v) { mm_cfg->smoothing_a = to_d(v); });
  mm_ov->add("threads", [mm_cfg](const std::string& v) { mm_cfg->threads = to_i(v); });
  mm->callback([=, &rc] {
    mm_ov->apply_file(mm_common->config);
    apply_kernels(mm_common->kernels);
    rc = run_mismatch_cmd(*mm_common, *mm_cfg);
  });

  // ---- encode ------------------------------------------------------------
  auto en_common = std::make_shared<CommonOpts>();
  auto en_message = std::make_shared<std::string>();
  auto en_random = std::make_shared<long>(0);
  auto en_precision = std::make_shared<double>(0.0);
  auto en_ov = std::make_shared<ConfigOverrides>();
  CLI::App* en = app.add_subcommand("encode", "encode packets and dump channel signal values");
  add_common(en, *en_common, *en_ov);
  en->add_option("--message", *en_message, "explicit message bits, e.g. 01101001");
  en->add_option("--random", *en_random, "number of random packets instead of --message");
  en->add_option("--precision", *en_precision, "noise precision (<=0: noiseless dump)")
      ->capture_default_str();
  en_ov->add("message", [en_message](const std::string& v) { *en_message = v; });
  en_ov->add("random", [en_random](const std::string& v) { *en_random = to_l(v); });
  en_ov->add("precision", [en_precision](const std::string& v) { *en_precision = to_d(v); });
  en->callback([=, &rc] {
    en_ov->apply_file(en_common->config);
    apply_kernels(en_common->kernels);
    rc = run_encode_cmd(*en_common, *en_message, *en_random, *en_precision);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
