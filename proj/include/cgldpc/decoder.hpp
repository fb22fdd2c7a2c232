#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgldpc/cluster_graph.hpp"
#include "cgldpc/expfam.hpp"
#include "cgldpc/factor_table.hpp"
#include "cgldpc/gf2.hpp"

namespace cgldpc {

struct DecodeConfig {
  int max_iter = 20;
  // convergence is not declared before this many iterations (testing hook)
  int min_iter = 0;
  double calibration_tol = 1e-6;
  double deactivation_threshold = 1e-5;
  bool deactivate_clusters = true;
  // when set, the precision is treated as known: these moments are installed
  // every iteration and the gamma belief is never updated
  std::optional<GammaMoments> fixed_gamma;
  bool collect_trace = false;
};

struct IterationTrace {
  int iteration = 0;
  int active_clusters = 0;
  double gamma_mean = 0.0;
  bool syndrome_ok = false;
};

// Mutable inference state for one packet.
struct DecoderState {
  std::vector<SparseFactorTable> cluster_beliefs;
  std::vector<SparseFactorTable> sepset_beliefs;    // indexed by edge id
  std::vector<CategoricalMessage> boundary_msgs;    // last delivered bit message, per bit
  std::vector<CondGaussianBelief> observations;     // x, installed moments, bit posterior
  GammaBelief gamma;
  std::vector<std::uint8_t> active;
  int iteration = 0;

  // change tracking: cluster belief versions and, per edge direction, the
  // source version at the last computed message (0 = never)
  std::vector<std::uint64_t> belief_version;
  std::vector<std::array<std::uint64_t, 2>> edge_sent_version;
};

DecoderState make_initial_state(const ClusterGraph& g, const GammaBelief& prior,
                                std::span<const double> received, const GammaMoments& moments);

struct DecodeResult {
  Codeword bits;
  bool converged = false;  // implies syndrome_ok(bits)
  int iterations = 0;
  GammaBelief posterior_gamma;
  std::vector<std::pair<double, double>> per_bit_posteriors;
  std::vector<IterationTrace> trace;
};

// One full run of the hybrid schedule: per iteration a forward sweep
// (moments install, bit evidence, belief updates from the outermost layer in
// to the large clusters) and a backward sweep (belief updates back out, bit
// posterior install, gamma rebuild from the stored prior).  Stops when the
// clusters are calibrated and the hard decisions satisfy every parity check,
// or after max_iter sweeps (best effort, converged=false).
DecodeResult decode(const ParityCheckMatrix& h, const ClusterGraph& g,
                    const MessageSchedule& schedule, const BitAttachment& attachment,
                    const GammaBelief& prior, std::span<const double> received,
                    const DecodeConfig& cfg);

// Hard decisions from the current bit posteriors; ties resolve to 0.
std::vector<std::uint8_t> hard_decisions(const DecoderState& state);

// True iff the argmax bits satisfy the syndrome and, for every edge, the two
// endpoint marginals onto the sepset agree within symmetric KL <= tol.
bool check_calibration(const ParityCheckMatrix& h, const ClusterGraph& g,
                       const DecoderState& state, double tol);

// Per-edge deactivation vote: true when the incoming sepset change is small
// enough that the receiving cluster may go inactive.
bool maybe_deactivate(const SparseFactorTable& new_sep, const SparseFactorTable& old_sep,
                      double threshold);

}  // namespace cgldpc
