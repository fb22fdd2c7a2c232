#include "cgldpc/gf2.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cgldpc/rng.hpp"

namespace cgldpc {

ParityCheckMatrix ParityCheckMatrix::from_rows(int cols, std::vector<std::vector<int>> rows) {
  if (cols <= 0 || rows.empty()) throw std::invalid_argument("parity-check matrix must be non-empty");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& s = rows[r];
    if (s.empty()) throw std::invalid_argument("row " + std::to_string(r) + " has no entries");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= cols)
        throw std::invalid_argument("row " + std::to_string(r) + ": column index out of range");
      if (i > 0 && s[i] <= s[i - 1])
        throw std::invalid_argument("row " + std::to_string(r) + ": support not strictly increasing");
    }
  }
  ParityCheckMatrix h;
  h.cols = cols;
  h.rows = int(rows.size());
  h.row_support = std::move(rows);
  return h;
}

std::vector<std::vector<int>> ParityCheckMatrix::col_support() const {
  std::vector<std::vector<int>> cs(cols);
  for (int r = 0; r < rows; ++r)
    for (int c : row_support[r]) cs[c].push_back(r);
  return cs;
}

namespace {

// Token stream that remembers the source line of each token so parse errors
// can point at the offending line.
struct TokenStream {
  std::vector<std::pair<long long, int>> tokens;  // value, line number
  std::size_t pos = 0;

  explicit TokenStream(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string word;
      while (ls >> word) {
        try {
          std::size_t used = 0;
          long long v = std::stoll(word, &used);
          if (used != word.size()) throw std::invalid_argument(word);
          tokens.emplace_back(v, lineno);
        } catch (const std::exception&) {
          throw std::runtime_error("alist line " + std::to_string(lineno) +
                                   ": expected integer, got '" + word + "'");
        }
      }
    }
  }

  long long take(const char* what) {
    if (pos >= tokens.size()) {
      int last = tokens.empty() ? 0 : tokens.back().second;
      throw std::runtime_error("alist line " + std::to_string(last) +
                               ": unexpected end of file while reading " + what);
    }
    return tokens[pos++].first;
  }

  int line() const {
    if (pos == 0) return 1;
    return tokens[std::min(pos, tokens.size()) - 1].second;
  }
};

}  // namespace

ParityCheckMatrix load_alist(std::istream& in) {
  TokenStream ts(in);
  const long long n = ts.take("column count");
  const long long m = ts.take("row count");
  if (n <= 0 || m <= 0)
    throw std::runtime_error("alist line " + std::to_string(ts.line()) + ": invalid dimensions");
  const long long max_col = ts.take("max column degree");
  const long long max_row = ts.take("max row degree");

  std::vector<int> col_deg(n), row_deg(m);
  for (long long j = 0; j < n; ++j) {
    long long d = ts.take("column degree");
    if (d < 0 || d > max_col)
      throw std::runtime_error("alist line " + std::to_string(ts.line()) +
                               ": column degree out of range");
    col_deg[j] = int(d);
  }
  for (long long r = 0; r < m; ++r) {
    long long d = ts.take("row degree");
    if (d <= 0 || d > max_row)
      throw std::runtime_error("alist line " + std::to_string(ts.line()) +
                               ": row degree out of range");
    row_deg[r] = int(d);
  }

  // Column lists (1-based row indices). Entries may be padded with zeros up
  // to max_col; exactly col_deg[j] nonzero entries are required either way.
  std::vector<std::vector<int>> cols_rows(n);
  for (long long j = 0; j < n; ++j) {
    int seen = 0;
    for (int k = 0; k < col_deg[j]; ++k) {
      long long v = ts.take("column entry");
      if (v < 1 || v > m)
        throw std::runtime_error("alist line " + std::to_string(ts.line()) +
                                 ": row index out of range in column list");
      cols_rows[j].push_back(int(v - 1));
      ++seen;
    }
    // swallow optional zero padding
    while (seen < max_col && ts.pos < ts.tokens.size() && ts.tokens[ts.pos].first == 0) {
      ++ts.pos;
      ++seen;
    }
  }

  std::vector<std::vector<int>> rows_cols(m);
  for (long long r = 0; r < m; ++r) {
    int seen = 0;
    for (int k = 0; k < row_deg[r]; ++k) {
      long long v = ts.take("row entry");
      if (v < 1 || v > n)
        throw std::runtime_error("alist line " + std::to_string(ts.line()) +
                                 ": column index out of range in row list");
      rows_cols[r].push_back(int(v - 1));
      ++seen;
    }
    while (seen < max_row && ts.pos < ts.tokens.size() && ts.tokens[ts.pos].first == 0) {
      ++ts.pos;
      ++seen;
    }
  }
  if (ts.pos != ts.tokens.size())
    throw std::runtime_error("alist line " + std::to_string(ts.tokens[ts.pos].second) +
                             ": trailing data after matrix definition");

  for (auto& v : rows_cols) std::sort(v.begin(), v.end());
  for (auto& v : cols_rows) std::sort(v.begin(), v.end());

  // Cross-validate: the column lists must describe the same matrix.
  std::vector<std::vector<int>> from_cols(m);
  for (long long j = 0; j < n; ++j)
    for (int r : cols_rows[j]) from_cols[r].push_back(int(j));
  for (auto& v : from_cols) std::sort(v.begin(), v.end());
  for (long long r = 0; r < m; ++r)
    if (from_cols[r] != rows_cols[r])
      throw std::runtime_error("alist: row " + std::to_string(r) +
                               " disagrees between row and column lists");

  ParityCheckMatrix h = ParityCheckMatrix::from_rows(int(n), std::move(rows_cols));
  return h;
}

ParityCheckMatrix load_alist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alist file: " + path);
  return load_alist(in);
}

void save_alist(const ParityCheckMatrix& h, std::ostream& out) {
  const auto cs = h.col_support();
  std::size_t max_col = 0, max_row = 0;
  for (const auto& v : cs) max_col = std::max(max_col, v.size());
  for (const auto& v : h.row_support) max_row = std::max(max_row, v.size());

  out << h.cols << ' ' << h.rows << '\n';
  out << max_col << ' ' << max_row << '\n';
  for (int j = 0; j < h.cols; ++j) out << cs[j].size() << (j + 1 < h.cols ? ' ' : '\n');
  for (int r = 0; r < h.rows; ++r)
    out << h.row_support[r].size() << (r + 1 < h.rows ? ' ' : '\n');
  for (int j = 0; j < h.cols; ++j) {
    for (std::size_t i = 0; i < cs[j].size(); ++i)
      out << cs[j][i] + 1 << (i + 1 < cs[j].size() ? ' ' : '\n');
    if (cs[j].empty()) out << '\n';
  }
  for (int r = 0; r < h.rows; ++r) {
    const auto& s = h.row_support[r];
    for (std::size_t i = 0; i < s.size(); ++i) out << s[i] + 1 << (i + 1 < s.size() ? ' ' : '\n');
  }
}

std::string save_alist_string(const ParityCheckMatrix& h) {
  std::ostringstream os;
  save_alist(h, os);
  return os.str();
}

namespace {

using BitRow = std::vector<std::uint64_t>;

BitRow make_bitrow(const std::vector<int>& support, int cols) {
  BitRow row((cols + 63) / 64, 0);
  for (int c : support) row[c / 64] |= (std::uint64_t(1) << (c % 64));
  return row;
}

void xor_into(BitRow& dst, const BitRow& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

bool get_bit(const BitRow& row, int c) { return (row[c / 64] >> (c % 64)) & 1; }

int lowest_set(const BitRow& row, int cols) {
  for (std::size_t b = 0; b < row.size(); ++b)
    if (row[b]) {
      int c = int(b * 64) + __builtin_ctzll(row[b]);
      return c < cols ? c : -1;
    }
  return -1;
}

}  // namespace

SystematicEncoder::SystematicEncoder(const ParityCheckMatrix& h) : n_(h.cols) {
  const int m = h.rows;
  k_ = h.cols - h.rows;
  if (k_ <= 0) throw std::invalid_argument("encoder requires cols > rows");

  std::vector<BitRow> rows(m);
  std::vector<int> orig(m);
  for (int r = 0; r < m; ++r) {
    rows[r] = make_bitrow(h.row_support[r], n_);
    orig[r] = r;
  }

  pivot_cols_.assign(m, -1);
  // Forward elimination; each row picks its lowest remaining column as pivot.
  for (int r = 0; r < m; ++r) {
    int pc = lowest_set(rows[r], n_);
    if (pc < 0) {
      // try swapping in a later row that still has content
      int swap = -1;
      for (int r2 = r + 1; r2 < m; ++r2)
        if (lowest_set(rows[r2], n_) >= 0) {
          swap = r2;
          break;
        }
      if (swap < 0)
        throw std::runtime_error("parity-check matrix is rank deficient: row " +
                                 std::to_string(orig[r]) + " is dependent");
      std::swap(rows[r], rows[swap]);
      std::swap(orig[r], orig[swap]);
      pc = lowest_set(rows[r], n_);
    }
    pivot_cols_[r] = pc;
    for (int r2 = 0; r2 < m; ++r2)
      if (r2 != r && get_bit(rows[r2], pc)) xor_into(rows[r2], rows[r]);
    // a row eliminated to zero further down means a dependency
    for (int r2 = r + 1; r2 < m; ++r2)
      if (lowest_set(rows[r2], n_) < 0)
        throw std::runtime_error("parity-check matrix is rank deficient: row " +
                                 std::to_string(orig[r2]) + " is dependent");
  }

  std::vector<char> is_pivot(n_, 0);
  for (int pc : pivot_cols_) is_pivot[pc] = 1;
  message_cols_.reserve(k_);
  for (int c = 0; c < n_; ++c)
    if (!is_pivot[c]) message_cols_.push_back(c);

  std::vector<int> msg_index(n_, -1);
  for (int t = 0; t < k_; ++t) msg_index[message_cols_[t]] = t;

  parity_deps_.resize(m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n_; ++c)
      if (c != pivot_cols_[r] && get_bit(rows[r], c)) {
        if (msg_index[c] < 0)
          throw std::logic_error("reduced row references another pivot column");
        parity_deps_[r].push_back(msg_index[c]);
      }
}

Codeword SystematicEncoder::encode(std::span<const std::uint8_t> message) const {
  if (int(message.size()) != k_)
    throw std::invalid_argument("message length " + std::to_string(message.size()) +
                                " != " + std::to_string(k_));
  Codeword cw;
  cw.message_len = k_;
  cw.bits.assign(n_, 0);
  for (int t = 0; t < k_; ++t) cw.bits[message_cols_[t]] = message[t] & 1;
  for (std::size_t r = 0; r < pivot_cols_.size(); ++r) {
    std::uint8_t p = 0;
    for (int t : parity_deps_[r]) p ^= (message[t] & 1);
    cw.bits[pivot_cols_[r]] = p;
  }
  return cw;
}

bool syndrome_ok(const ParityCheckMatrix& h, std::span<const std::uint8_t> bits) {
  if (int(bits.size()) != h.cols)
    throw std::invalid_argument("codeword length does not match matrix columns");
  for (const auto& row : h.row_support) {
    std::uint8_t p = 0;
    for (int c : row) p ^= (bits[c] & 1);
    if (p) return false;
  }
  return true;
}

ParityCheckMatrix builtin_16_8() {
  return ParityCheckMatrix::from_rows(16, {
                                              {1, 2, 3, 6, 7, 8, 10},
                                              {0, 4, 9, 11},
                                              {3, 10, 12},
                                              {0, 4, 5, 6, 7, 11},
                                              {3, 5, 9, 12},
                                              {0, 1, 4, 8, 13},
                                              {2, 5, 6, 8, 14},
                                              {1, 7, 9, 15},
                                          });
}

namespace {

int gf2_rank(const ParityCheckMatrix& h) {
  std::vector<BitRow> rows(h.rows);
  for (int r = 0; r < h.rows; ++r) rows[r] = make_bitrow(h.row_support[r], h.cols);
  int rank = 0;
  for (int r = 0; r < h.rows; ++r) {
    int pc = lowest_set(rows[r], h.cols);
    if (pc < 0) continue;
    ++rank;
    for (int r2 = r + 1; r2 < h.rows; ++r2)
      if (get_bit(rows[r2], pc)) xor_into(rows[r2], rows[r]);
    // keep rows below reduced relative to this pivot only; partial
    // elimination is enough for rank counting
  }
  return rank;
}

// Configuration-model construction of an irregular LDPC code with fixed row
// and column degree profiles.  Fully deterministic: the attempt counter is
// part of the seed, and the first attempt that yields a simple full-rank
// matrix wins, so every build reproduces the same matrix.
ParityCheckMatrix make_irregular(int n, int m, const std::vector<int>& row_deg,
                                 const std::vector<int>& col_deg, std::uint64_t base_seed) {
  std::vector<int> stubs;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < col_deg[j]; ++k) stubs.push_back(j);

  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt > 10000) throw std::runtime_error("code construction failed to converge");
    SplitMix64 rng(base_seed + attempt);
    std::vector<int> pool = stubs;
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.below(i)]);

    std::vector<std::vector<int>> rows(m);
    bool ok = true;
    std::size_t p = 0;
    for (int r = 0; r < m && ok; ++r) {
      for (int k = 0; k < row_deg[r] && ok; ++k) {
        // avoid duplicate columns within a row by swapping ahead
        std::size_t q = p;
        while (q < pool.size() &&
               std::find(rows[r].begin(), rows[r].end(), pool[q]) != rows[r].end())
          ++q;
        if (q == pool.size()) {
          ok = false;
          break;
        }
        std::swap(pool[p], pool[q]);
        rows[r].push_back(pool[p]);
        ++p;
      }
    }
    if (!ok) continue;
    for (auto& row : rows) std::sort(row.begin(), row.end());

    ParityCheckMatrix h;
    try {
      h = ParityCheckMatrix::from_rows(n, std::move(rows));
    } catch (const std::exception&) {
      continue;
    }
    if (gf2_rank(h) != m) continue;
    return h;
  }
}

}  // namespace

ParityCheckMatrix builtin_220_110() {
  static const ParityCheckMatrix h = [] {
    const int n = 220, m = 110;
    std::vector<int> row_deg(m, 5);
    row_deg[0] = 10;
    row_deg[1] = 8;
    row_deg[2] = 8;
    int ones = 0;
    for (int d : row_deg) ones += d;  // 561
    std::vector<int> col_deg(n, 2);
    for (int j = 0; j < ones - 2 * n; ++j) col_deg[j] = 3;  // 121 columns of weight 3
    return make_irregular(n, m, row_deg, col_deg, 0xC0DE220ULL);
  }();
  return h;
}

ParityCheckMatrix resolve_code(const std::string& name) {
  if (name == "(16,8)" || name == "16x8") return builtin_16_8();
  if (name == "(220,110)" || name == "n220") return builtin_220_110();
  return load_alist_file(name);
}

}  // namespace cgldpc
