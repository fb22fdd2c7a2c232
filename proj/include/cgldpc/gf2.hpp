#pragma once
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cgldpc {

// Binary parity-check matrix in sparse row form.  Row supports are strictly
// increasing column indices; every row has at least one entry.
struct ParityCheckMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<int>> row_support;

  static ParityCheckMatrix from_rows(int cols, std::vector<std::vector<int>> rows);
  std::vector<std::vector<int>> col_support() const;
  double rate() const { return double(cols - rows) / double(cols); }
};

// MacKay "alist" text format.  The reader accepts 0-padded index lists (as
// emitted by several common tools); the writer emits a canonical unpadded
// form with single spaces and a trailing newline, so save(load(save(x)))
// round-trips textually.
ParityCheckMatrix load_alist(std::istream& in);
ParityCheckMatrix load_alist_file(const std::string& path);
void save_alist(const ParityCheckMatrix& h, std::ostream& out);
std::string save_alist_string(const ParityCheckMatrix& h);

struct Codeword {
  std::vector<std::uint8_t> bits;
  int message_len = 0;
};

// Systematic encoder built by GF(2) Gaussian elimination with column
// pivoting.  Message bits live at the non-pivot columns (ascending order);
// pivot columns carry the parity bits.  Construction throws when H is not
// full row rank, naming the dependent row.
class SystematicEncoder {
 public:
  explicit SystematicEncoder(const ParityCheckMatrix& h);

  int codeword_len() const { return n_; }
  int message_len() const { return k_; }
  // ascending channel positions that hold the message bits
  const std::vector<int>& message_positions() const { return message_cols_; }
  // channel position of the parity bit produced by reduced row i
  const std::vector<int>& parity_positions() const { return pivot_cols_; }

  Codeword encode(std::span<const std::uint8_t> message) const;

 private:
  int n_ = 0, k_ = 0;
  std::vector<int> message_cols_;
  std::vector<int> pivot_cols_;
  // for each reduced row: indices into message_cols_ whose bits feed its parity
  std::vector<std::vector<int>> parity_deps_;
};

inline SystematicEncoder systematic_encoder(const ParityCheckMatrix& h) {
  return SystematicEncoder(h);
}

bool syndrome_ok(const ParityCheckMatrix& h, std::span<const std::uint8_t> bits);

// The worked (16,8) example code used throughout the tests and CLI demos.
ParityCheckMatrix builtin_16_8();
// Deterministically generated irregular (220,110) rate-1/2 code whose largest
// check degrees are 10 and 8.  Also shipped as data/ldpc_n220_r05.alist.
ParityCheckMatrix builtin_220_110();
// Resolves "(16,8)" / "16x8", "(220,110)" / "n220", or a path to an alist file.
ParityCheckMatrix resolve_code(const std::string& name);

}  // namespace cgldpc
