#pragma once
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgldpc/channel.hpp"
#include "cgldpc/cluster_graph.hpp"
#include "cgldpc/decoder.hpp"
#include "cgldpc/gf2.hpp"
#include "cgldpc/tracker.hpp"

namespace cgldpc {

// Everything derived from one parity-check matrix that the experiments need:
// the cluster graph, its message schedule, the bit attachment, and an encoder.
struct DecoderSetup {
  ParityCheckMatrix h;
  ClusterGraph graph;
  MessageSchedule schedule;
  BitAttachment attachment;
  SystematicEncoder encoder;
  double rate = 0.0;
};

DecoderSetup make_setup(ParityCheckMatrix h);

// How the decoder learns (or is told) the channel precision:
//   estimate     sequential gamma tracking, window S packets
//   perfect      true per-packet precision installed as fixed moments
//   fixed        one configured precision installed as fixed moments
//   fixed-offset like estimate, but each packet's decode prior has its mean
//                derated by a constant dB offset (deliberate underestimate)
enum class Mode { Estimate, Perfect, Fixed, FixedOffset };

Mode parse_mode(const std::string& s);
std::string format_mode(Mode m);

// One simulated packet: drawn message, its codeword, and the noisy channel
// output.  All randomness comes from a single per-packet stream seeded by
// packet_seed(base, index), so packets are independent of processing order.
struct Packet {
  std::vector<std::uint8_t> message;
  Codeword codeword;
  std::vector<double> received;
};

Packet make_packet(const DecoderSetup& s, double precision, std::uint64_t seed);

// Bit errors over the message positions only (k information bits per packet).
int count_message_errors(const DecoderSetup& s, const Codeword& truth,
                         const Codeword& decoded);

// Per-packet additive-smoothed error rates r_p = (a + e_p) / (k + a),
// averaged over a centered moving window (truncated at the edges; even
// windows take the extra packet on the right).  window = 1 returns the raw
// smoothed rates.
std::vector<double> smoothed_ber(std::span<const int> errors_per_packet, int k, double a,
                                 long window);

// Mean and normal-approximation 95% CI half-width (1.96 * sd / sqrt(n)) of
// the per-packet smoothed rates; ci95 is 0 for fewer than two packets.
struct RateSummary {
  double ber = 0.0;
  double ci95 = 0.0;
};
RateSummary summarize_rates(std::span<const int> errors_per_packet, int k, double a);

// Per-packet outcomes of one decoding mode over a shared batch of packets.
struct ModeRun {
  Mode mode = Mode::Perfect;
  std::vector<int> errors;
  std::vector<int> iters;
  std::vector<std::uint8_t> converged;
  std::vector<double> est_mean;  // precision presented to / inferred by the decoder
  std::vector<double> est_sd;    // posterior sd (0 for the non-learning modes)
  double fixed_precision_used = 0.0;  // Fixed only
};

// ---------------------------------------------------------------------------
// Stationary BER sweep: an SNR grid, every mode decoding the same received
// packets at each point (paired design).

struct SweepConfig {
  double snr_start_db = 0.0;
  double snr_stop_db = 4.45;
  int points = 6;
  long packets = 1000;
  std::vector<Mode> modes = {Mode::Estimate, Mode::Perfect};
  std::optional<long> window_packets = 10;  // S for estimate mode (nullopt = inf)
  double prior_mean = 1.0;                  // initial precision prior (nu = 2)
  double prior_nu = 2.0;
  double fixed_precision = 1.0;  // Mode::Fixed
  double offset_db = -0.1;       // Mode::FixedOffset
  double smoothing_a = 0.005;
  DecodeConfig decode;
  std::uint64_t seed = 1;
  int threads = 1;  // batch modes only; output is identical for any value
};

struct SweepPoint {
  double snr_db = 0.0;
  Mode mode = Mode::Perfect;
  double ber = 0.0;
  double ci95 = 0.0;
  double mean_iters = 0.0;
  long packets = 0;
};

struct SweepResult {
  SweepConfig cfg;
  std::vector<double> snr_grid_db;
  std::vector<SweepPoint> points;  // snr-major, then modes in configured order
  std::vector<ModeRun> runs;       // same order as `points`
};

SweepResult run_ber_sweep(const DecoderSetup& s, const SweepConfig& cfg);
std::string sweep_csv(const DecoderSetup& s, const SweepResult& r);

// ---------------------------------------------------------------------------
// Non-stationary tracking: one packet per trace entry, shared across modes.

struct TrackConfig {
  long packets = 0;  // 0 = whole trace
  std::vector<Mode> modes = {Mode::Estimate, Mode::Perfect, Mode::Fixed};
  std::optional<long> window_packets = 10;
  double prior_mean = 1.0;
  double prior_nu = 2.0;
  // Fixed-mode precision; when unset it defaults to the final posterior mean
  // of a preliminary estimate pass with an infinite window over the same
  // packets (the "long-run average" baseline).
  std::optional<double> fixed_precision;
  double offset_db = -0.1;
  double smoothing_a = 0.005;
  long ma_window = 10000;  // moving-average window for smoothed-BER series
  DecodeConfig decode;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct TrackModeSummary {
  Mode mode = Mode::Perfect;
  double ber = 0.0;
  double ci95 = 0.0;
  double mean_iters = 0.0;
};

struct TrackResult {
  TrackConfig cfg;
  NoiseTrace trace;                       // truncated to the packets actually run
  std::vector<ModeRun> runs;              // one per configured mode
  std::vector<TrackModeSummary> summaries;
  // per mode: smoothed error rates through the configured moving window
  std::vector<std::vector<double>> ma_series;
  double fixed_precision_used = 0.0;      // config value or the pre-pass result
};

TrackResult run_tracking(const DecoderSetup& s, const TrackConfig& cfg, const NoiseTrace& trace);
std::string track_csv(const DecoderSetup& s, const TrackResult& r);
// Optional companion dump of the moving-average series (packet,mode,ma_ber).
std::string track_ma_csv(const TrackResult& r);

// ---------------------------------------------------------------------------
// Model-mismatch curve: identical packets at one true precision, decoded with
// fixed moments taken from each model SNR on a grid around the true SNR.

struct MismatchConfig {
  double actual_precision = 1.32;
  double grid_start_db = -1.5;  // offsets relative to the actual SNR
  double grid_stop_db = 2.5;
  int grid_points = 9;
  long packets = 2000;
  double smoothing_a = 0.005;
  DecodeConfig decode;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct MismatchPoint {
  double model_snr_db = 0.0;
  double ber = 0.0;
  double ci95 = 0.0;
  double mean_iters = 0.0;
};

struct MismatchResult {
  MismatchConfig cfg;
  double actual_snr_db = 0.0;
  std::vector<MismatchPoint> points;
  std::vector<ModeRun> runs;  // same order as `points`
};

MismatchResult run_mismatch(const DecoderSetup& s, const MismatchConfig& cfg);
std::string mismatch_csv(const DecoderSetup& s, const MismatchResult& r);

// Doubles are printed with %.17g so every CSV value round-trips exactly and
// reruns are byte-identical.
std::string format_double(double v);

}  // namespace cgldpc
