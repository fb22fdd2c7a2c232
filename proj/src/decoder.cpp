#include "cgldpc/decoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cgldpc/kernels.hpp"

namespace cgldpc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// symmetric KL between two binary log-prob pairs
double binary_sym_kl(double a0, double a1, double b0, double b1) {
  const double za = (a0 > a1 ? a0 : a1) + std::log1p(std::exp(-std::fabs(a0 - a1)));
  const double zb = (b0 > b1 ? b0 : b1) + std::log1p(std::exp(-std::fabs(b0 - b1)));
  const double pa0 = a0 - za, pa1 = a1 - za, pb0 = b0 - zb, pb1 = b1 - zb;
  const double kl_ab = std::exp(pa0) * (pa0 - pb0) + std::exp(pa1) * (pa1 - pb1);
  const double kl_ba = std::exp(pb0) * (pb0 - pa0) + std::exp(pb1) * (pb1 - pa1);
  return 0.5 * (kl_ab + kl_ba);
}
}  // namespace

DecoderState make_initial_state(const ClusterGraph& g, const GammaBelief& prior,
                                std::span<const double> received, const GammaMoments& moments) {
  DecoderState st{.gamma = prior};
  st.cluster_beliefs.reserve(g.clusters.size());
  for (const auto& c : g.clusters) st.cluster_beliefs.push_back(SparseFactorTable::parity(c));
  st.sepset_beliefs.reserve(g.edges.size());
  for (const auto& e : g.edges) st.sepset_beliefs.push_back(SparseFactorTable::uniform(e.sepset));
  st.boundary_msgs.resize(g.num_vars);
  st.observations.resize(g.num_vars);
  for (int v = 0; v < g.num_vars; ++v) {
    st.boundary_msgs[v] = {v, 0.0, 0.0};  // uniform: nothing delivered yet
    st.observations[v] = {received[v], moments, 0.5, 0.5};
  }
  st.active.assign(g.clusters.size(), 1);
  st.belief_version.assign(g.clusters.size(), 1);
  st.edge_sent_version.assign(g.edges.size(), {0, 0});
  return st;
}

std::vector<std::uint8_t> hard_decisions(const DecoderState& state) {
  std::vector<std::uint8_t> bits(state.observations.size());
  for (std::size_t v = 0; v < bits.size(); ++v)
    bits[v] = state.observations[v].p_b1 > state.observations[v].p_b0 ? 1 : 0;
  return bits;
}

bool maybe_deactivate(const SparseFactorTable& new_sep, const SparseFactorTable& old_sep,
                      double threshold) {
  return symmetric_kl(new_sep, old_sep) < threshold;
}

bool check_calibration(const ParityCheckMatrix& h, const ClusterGraph& g,
                       const DecoderState& state, double tol) {
  if (!syndrome_ok(h, hard_decisions(state))) return false;
  for (const auto& e : g.edges) {
    SparseFactorTable ma = marginalize(state.cluster_beliefs[e.a], e.sepset);
    SparseFactorTable mb = marginalize(state.cluster_beliefs[e.b], e.sepset);
    if (!(symmetric_kl(ma, mb) <= tol)) return false;
  }
  return true;
}

namespace {

struct SweepStats {
  // per-cluster largest incoming change this iteration
  std::vector<double> max_change;
  explicit SweepStats(std::size_t n) : max_change(n, 0.0) {}
  void note(int cluster, double change) {
    if (change > max_change[cluster]) max_change[cluster] = change;
  }
};

// Belief-update message over one edge.  Skips exactly when the source belief
// is unchanged since this direction last looked at it (the message would be
// identical).  A deactivated destination only accepts messages whose change
// reaches the reactivation threshold.
void send_edge(DecoderState& st, const ClusterGraph& g, int src, int dst, int eid,
               double threshold, bool deactivation, SweepStats& stats) {
  const auto& edge = g.edges[eid];
  const int dir = (src == edge.a) ? 0 : 1;
  if (st.edge_sent_version[eid][dir] == st.belief_version[src]) return;

  SparseFactorTable psi = marginalize(st.cluster_beliefs[src], edge.sepset);
  psi.shift_to_max();
  const double change = symmetric_kl(psi, st.sepset_beliefs[eid]);
  st.edge_sent_version[eid][dir] = st.belief_version[src];
  if (change == 0.0) return;  // identical message: absorbing it is a no-op
  if (deactivation && !st.active[dst] && change < threshold) return;

  stats.note(dst, change);
  st.cluster_beliefs[dst] =
      absorb_ratio(std::move(st.cluster_beliefs[dst]), psi, st.sepset_beliefs[eid]);
  if (st.cluster_beliefs[dst].empty())
    throw std::runtime_error("cluster " + std::to_string(dst) +
                             " lost all support during belief update");
  st.cluster_beliefs[dst].shift_to_max();
  st.sepset_beliefs[eid] = std::move(psi);
  ++st.belief_version[dst];
  st.active[dst] = 1;
}

}  // namespace

DecodeResult decode(const ParityCheckMatrix& h, const ClusterGraph& g,
                    const MessageSchedule& schedule, const BitAttachment& attachment,
                    const GammaBelief& prior, std::span<const double> received,
                    const DecodeConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (int(received.size()) != h.cols)
    throw std::invalid_argument("received length " + std::to_string(received.size()) +
                                " != codeword length " + std::to_string(h.cols));
  if (g.num_vars != h.cols)
    throw std::invalid_argument("cluster graph covers a different variable count than H");
  if (int(attachment.cluster_of_bit.size()) != g.num_vars)
    throw std::invalid_argument("attachment does not cover every bit");
  for (int v = 0; v < g.num_vars; ++v) {
    const int c = attachment.cluster_of_bit[v];
    if (c < 0 || c >= int(g.clusters.size()) ||
        !std::binary_search(g.clusters[c].begin(), g.clusters[c].end(), v))
      throw std::invalid_argument("bit " + std::to_string(v) +
                                  " is attached to a cluster that does not contain it");
  }

  const GammaMoments initial =
      cfg.fixed_gamma ? *cfg.fixed_gamma : gamma_moments(prior);
  DecoderState st = make_initial_state(g, prior, received, initial);

  const std::size_t n_bits = received.size();
  std::vector<double> xs(received.begin(), received.end());
  std::vector<double> p1(n_bits, 0.5), lp0(n_bits), lp1(n_bits);

  DecodeResult res{.posterior_gamma = prior};
  bool moments_dirty = true;
  GammaMoments moments = initial;

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    st.iteration = iter;
    SweepStats stats(g.clusters.size());

    // (a) install precision moments in every observation node
    if (moments_dirty) {
      for (auto& obs : st.observations) obs = vmp_parent_to_child_gamma(moments, obs);
      kernels::active().bit_loglik(xs.data(), n_bits, moments.e_gamma, moments.e_log_gamma,
                                   lp0.data(), lp1.data());
    }

    // (b) bit evidence into the attached clusters
    if (moments_dirty) {
      for (std::size_t v = 0; v < n_bits; ++v) {
        const CategoricalMessage msg{int(v), lp0[v], lp1[v]};
        const CategoricalMessage& old = st.boundary_msgs[v];
        if (msg.lp0 == old.lp0 && msg.lp1 == old.lp1) continue;
        const int dst = attachment.cluster_of_bit[v];
        const double change = binary_sym_kl(msg.lp0, msg.lp1, old.lp0, old.lp1);
        if (change == 0.0) continue;
        if (cfg.deactivate_clusters && !st.active[dst] && change < cfg.deactivation_threshold)
          continue;
        stats.note(dst, change);
        st.cluster_beliefs[dst] =
            absorb_categorical(std::move(st.cluster_beliefs[dst]), msg, old);
        if (st.cluster_beliefs[dst].empty())
          throw std::runtime_error("cluster " + std::to_string(dst) +
                                   " lost all support absorbing bit evidence");
        st.cluster_beliefs[dst].shift_to_max();
        st.boundary_msgs[v] = msg;
        ++st.belief_version[dst];
        st.active[dst] = 1;
      }
    }

    // (c) belief updates from the outermost layer in to the large clusters
    for (auto it = schedule.ordered_pairs.rbegin(); it != schedule.ordered_pairs.rend(); ++it)
      send_edge(st, g, it->second, it->first, g.edge_between(it->first, it->second),
                cfg.deactivation_threshold, cfg.deactivate_clusters, stats);

    // (d) belief updates back out
    for (const auto& [s, d] : schedule.ordered_pairs)
      send_edge(st, g, s, d, g.edge_between(s, d), cfg.deactivation_threshold,
                cfg.deactivate_clusters, stats);

    // (e) install bit posteriors from the attached clusters
    for (std::size_t v = 0; v < n_bits; ++v) {
      const int c = attachment.cluster_of_bit[v];
      const int var = int(v);
      SparseFactorTable marg = marginalize(st.cluster_beliefs[c], std::span<const int>(&var, 1));
      st.observations[v] = hybrid_parent_to_child_bit(st.observations[v], marg);
      p1[v] = st.observations[v].p_b1;
    }

    // (f) rebuild the gamma belief from the stored prior plus fresh
    // observation increments (never accumulated across sweeps)
    if (!cfg.fixed_gamma) {
      const double quad = kernels::active().residual_quad(xs.data(), p1.data(), n_bits);
      GammaBelief updated(prior.eta1() - 0.5 * quad, prior.eta2() + 0.5 * double(n_bits));
      moments_dirty = !(updated.eta1() == st.gamma.eta1() && updated.eta2() == st.gamma.eta2()) ||
                      iter == 1;
      st.gamma = updated;
      if (moments_dirty) moments = gamma_moments(st.gamma);
    } else {
      moments_dirty = false;
    }

    // cluster deactivation: nothing entering a cluster moved this iteration
    if (cfg.deactivate_clusters)
      for (std::size_t c = 0; c < g.clusters.size(); ++c)
        if (st.active[c] && stats.max_change[c] < cfg.deactivation_threshold) st.active[c] = 0;

    const bool synd = syndrome_ok(h, hard_decisions(st));
    if (cfg.collect_trace) {
      int active = 0;
      for (auto a : st.active) active += a;
      res.trace.push_back({iter, active,
                           cfg.fixed_gamma ? cfg.fixed_gamma->e_gamma : st.gamma.mean(), synd});
    }
    res.iterations = iter;
    if (iter >= cfg.min_iter && synd && check_calibration(h, g, st, cfg.calibration_tol)) {
      res.converged = true;
      break;
    }
  }

  res.bits.bits = hard_decisions(st);
  res.bits.message_len = h.cols - h.rows;
  res.posterior_gamma = st.gamma;
  res.per_bit_posteriors.resize(n_bits);
  for (std::size_t v = 0; v < n_bits; ++v)
    res.per_bit_posteriors[v] = {st.observations[v].p_b0, st.observations[v].p_b1};
  return res;
}

}  // namespace cgldpc
