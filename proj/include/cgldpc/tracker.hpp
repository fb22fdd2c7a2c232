#pragma once
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgldpc/expfam.hpp"

namespace cgldpc {

// Sequential precision tracking: each packet's gamma posterior becomes the
// next prior, with an evidence cap that limits the effective history to
// S*N pseudo-observations so the filter can follow non-stationary noise.
struct TrackerState {
  GammaBelief prior;
  // stationarity window in packets; nullopt disables forgetting (S = inf)
  std::optional<long> window_packets;
  int codeword_len = 0;

  struct HistoryRow {
    long packet = 0;
    double posterior_mean = 0.0;
    double posterior_sd = 0.0;
  };
  std::vector<HistoryRow> history;
  long packets_seen = 0;
};

TrackerState make_tracker(const GammaBelief& prior, std::optional<long> window_packets,
                          int codeword_len);

// Fold one packet's posterior into the state.  When eta2 exceeds the cap
// S*N, both natural parameters are rescaled by c = S*N/eta2: the new eta2 is
// exactly S*N and eta1 is rebuilt from the pre-scale ratio eta1/eta2, so the
// ratio (and with it omega*(nu/2-1) and, to first order, the mean) is
// preserved by construction.
TrackerState advance(TrackerState state, const GammaBelief& posterior);

// SNR(dB) = 10*log10(Eb*gamma/(2*R)) and its inverse.
double precision_to_snr_db(double precision, double rate, double eb = 1.0);
double snr_db_to_precision(double snr_db, double rate, double eb = 1.0);

// History dump: packet,true_precision,posterior_mean,posterior_sd,snr_db.
// The true-precision column is left empty when no trace is supplied; snr_db
// converts the posterior mean at the given code rate.
std::string history_csv(const TrackerState& state, std::span<const double> true_precision,
                        double rate);

}  // namespace cgldpc
