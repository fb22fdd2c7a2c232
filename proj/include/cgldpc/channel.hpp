#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgldpc/rng.hpp"

namespace cgldpc {

// bit 0 -> -1.0, bit 1 -> +1.0 (Eb = 1)
std::vector<double> modulate_bpsk(std::span<const std::uint8_t> bits);

// Adds Gaussian noise with variance 1/precision.  Deterministic per seed.
std::vector<double> add_awgn(std::span<const double> signal, double precision,
                             std::uint64_t seed);

// Packet seeds derive from a base seed and the packet index so packets are
// independent of processing order.
inline std::uint64_t packet_seed(std::uint64_t base_seed, std::uint64_t packet_index) {
  return base_seed ^ packet_index;
}

// Per-packet true noise precision over a run.
struct NoiseTrace {
  std::vector<double> precision;
  std::string source;  // how the trace was produced, for output metadata
};

NoiseTrace constant_trace(double precision, std::size_t len);
NoiseTrace step_trace(double before, double after, std::size_t change_at, std::size_t len);
NoiseTrace ramp_trace(double start, double end, std::size_t len);
NoiseTrace sinusoid_trace(double mean, double amplitude, double period, std::size_t len);

// Parses a one-column CSV with header `precision` or `snr_db` (converted at
// the given code rate).  When `upsample_to` is set, the trace is stretched by
// linear interpolation: target index t reads source position t*m/T, holding
// the last value beyond the end.
NoiseTrace load_trace_csv(std::istream& in, double rate,
                          std::optional<std::size_t> upsample_to = {});
NoiseTrace load_trace_csv_file(const std::string& path, double rate,
                               std::optional<std::size_t> upsample_to = {});

// "kind:params" forms: constant:P, step:P1:P2:AT, ramp:P1:P2, sinusoid:MEAN:AMP:PERIOD
NoiseTrace parse_trace_spec(const std::string& spec, std::size_t len);

}  // namespace cgldpc
