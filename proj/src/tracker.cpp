#include "cgldpc/tracker.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <stdexcept>

namespace cgldpc {

TrackerState make_tracker(const GammaBelief& prior, std::optional<long> window_packets,
                          int codeword_len) {
  if (window_packets && *window_packets < 1)
    throw std::invalid_argument("stationarity window must be at least 1 packet");
  if (codeword_len < 1) throw std::invalid_argument("codeword length must be positive");
  return {prior, window_packets, codeword_len, {}, 0};
}

TrackerState advance(TrackerState state, const GammaBelief& posterior) {
  GammaBelief next = posterior;
  if (state.window_packets) {
    const double cap = double(*state.window_packets) * double(state.codeword_len);
    if (posterior.eta2() > cap) {
      const double ratio = posterior.eta1() / posterior.eta2();
      next = GammaBelief(ratio * cap, cap);
    }
  }
  state.history.push_back({state.packets_seen, next.mean(), next.sd()});
  ++state.packets_seen;
  state.prior = next;
  return state;
}

double precision_to_snr_db(double precision, double rate, double eb) {
  if (!(precision > 0.0) || !(rate > 0.0) || !(eb > 0.0))
    throw std::invalid_argument("precision, rate and Eb must be positive");
  return 10.0 * std::log10(eb * precision / (2.0 * rate));
}

double snr_db_to_precision(double snr_db, double rate, double eb) {
  if (!(rate > 0.0) || !(eb > 0.0)) throw std::invalid_argument("rate and Eb must be positive");
  return 2.0 * rate * std::pow(10.0, snr_db / 10.0) / eb;
}

std::string history_csv(const TrackerState& state, std::span<const double> true_precision,
                        double rate) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out = "packet,true_precision,posterior_mean,posterior_sd,snr_db\n";
  for (const TrackerState::HistoryRow& row : state.history) {
    out += std::to_string(row.packet) + ",";
    if (std::size_t(row.packet) < true_precision.size())
      out += fmt(true_precision[std::size_t(row.packet)]);
    out += "," + fmt(row.posterior_mean) + "," + fmt(row.posterior_sd) + "," +
           fmt(precision_to_snr_db(row.posterior_mean, rate)) + "\n";
  }
  return out;
}

}  // namespace cgldpc
