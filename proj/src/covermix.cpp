#include "conlab/covermix.hpp"

#include <sodium.h>

#include <algorithm>
#include <istream>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <string>

namespace conlab {

namespace {

constexpr std::size_t kHeader = 8;

void xor_into(Block& acc, const Block& b) {
  if (acc.size() != b.size()) throw std::invalid_argument("covermix: block sizes differ");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] ^= b[i];
}

}  // namespace

void CoverParams::validate() const {
  if (alpha < 1) throw std::invalid_argument("covermix: alpha must be at least 1");
  if (beta < 1) throw std::invalid_argument("covermix: beta must be at least 1");
  if (k < 2 || k > alpha + beta) throw std::invalid_argument("covermix: k must be in [2, alpha + beta]");
  if (block_size < 16) throw std::invalid_argument("covermix: block_size must be at least 16");
}

std::vector<Block> split_blocks(std::span<const std::uint8_t> content, std::size_t block_size) {
  if (block_size < 16) throw std::invalid_argument("covermix: block_size must be at least 16");
  Bytes stream;
  stream.reserve(kHeader + content.size() + block_size);
  put_be64(stream, content.size());
  stream.insert(stream.end(), content.begin(), content.end());
  const std::size_t count = (stream.size() + block_size - 1) / block_size;
  stream.resize(count * block_size, 0);
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < count; ++i)
    blocks.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(i * block_size),
                        stream.begin() + static_cast<std::ptrdiff_t>((i + 1) * block_size));
  return blocks;
}

std::vector<Block> split_blocks(std::span<const std::uint8_t> content, std::size_t block_size, std::size_t count) {
  auto blocks = split_blocks(content, block_size);
  if (blocks.size() > count)
    throw std::invalid_argument("covermix: content needs " + std::to_string(blocks.size()) + " blocks, alpha is " +
                                std::to_string(count));
  blocks.resize(count, Block(block_size, 0));
  return blocks;
}

Bytes join_blocks(std::span<const Block> blocks) {
  if (blocks.empty()) throw CorruptionError("covermix: no blocks");
  const std::size_t bs = blocks.front().size();
  Bytes stream;
  for (const auto& b : blocks) {
    if (b.size() != bs) throw CorruptionError("covermix: block sizes differ");
    stream.insert(stream.end(), b.begin(), b.end());
  }
  if (stream.size() < kHeader) throw CorruptionError("covermix: stream shorter than its header");
  const std::uint64_t length = get_be64(std::span(stream).first(kHeader));
  if (length > stream.size() - kHeader) throw CorruptionError("covermix: length header exceeds the block stream");
  return Bytes(stream.begin() + kHeader, stream.begin() + static_cast<std::ptrdiff_t>(kHeader + length));
}

CoverMeta make_meta(std::span<const std::uint8_t> content, std::span<const Block> covers, const CoverParams& params) {
  params.validate();
  if (covers.size() != params.beta) throw std::invalid_argument("covermix: need beta cover blocks");
  CoverMeta meta;
  meta.content_hash = sha256(content);
  meta.length = content.size();
  meta.alpha = params.alpha;
  meta.beta = params.beta;
  meta.k = params.k;
  meta.block_size = params.block_size;
  meta.seed = params.seed;
  for (const auto& c : covers) {
    if (c.size() != params.block_size) throw std::invalid_argument("covermix: cover block has the wrong size");
    meta.cover_hashes.push_back(sha256(c));
  }
  return meta;
}

Name name_codeword(std::uint64_t seed, std::span<const std::size_t> subset) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  Bytes key;
  put_be64(key, seed);
  Bytes msg;
  put_be32(msg, static_cast<std::uint32_t>(subset.size()));
  for (auto i : subset) put_be32(msg, static_cast<std::uint32_t>(i));
  std::uint8_t mac[crypto_auth_hmacsha256_BYTES];
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(&st, msg.data(), msg.size());
  crypto_auth_hmacsha256_final(&st, mac);
  return Name({"cover", to_hex(mac)});
}

Name name_codeword(const CoverMeta& meta, std::span<const std::size_t> subset) {
  return name_codeword(meta.seed, subset);
}

std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<Codeword> encode(std::span<const Block> legit, std::span<const Block> covers, std::size_t k,
                             std::uint64_t seed) {
  if (legit.empty() || covers.empty()) throw std::invalid_argument("covermix: need legitimate and cover blocks");
  std::vector<const Block*> blocks;
  for (const auto& c : covers) blocks.push_back(&c);
  for (const auto& l : legit) blocks.push_back(&l);
  const std::size_t bs = blocks.front()->size();
  for (auto* b : blocks)
    if (b->size() != bs) throw std::invalid_argument("covermix: block sizes differ");
  if (k < 1 || k > blocks.size()) throw std::invalid_argument("covermix: k out of range");

  std::vector<Codeword> out;
  for (auto& subset : k_subsets(blocks.size(), k)) {
    Codeword cw;
    cw.payload.assign(bs, 0);
    for (auto i : subset) xor_into(cw.payload, *blocks[i]);
    cw.name = name_codeword(seed, subset);
    cw.subset = std::move(subset);
    out.push_back(std::move(cw));
  }
  return out;
}

namespace {

std::vector<bool> indicator(const std::vector<std::size_t>& subset, std::size_t alpha, std::size_t beta) {
  std::vector<bool> row(alpha, false);
  for (auto i : subset) {
    if (i >= alpha + beta) throw std::invalid_argument("covermix: subset index out of range");
    if (i >= beta) row[i - beta] = !row[i - beta];
  }
  return row;
}

// Incremental row-echelon basis keyed by leading column.
class Basis {
 public:
  explicit Basis(std::size_t alpha) : pivots_(alpha) {}
  bool add(std::vector<bool> row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c]) continue;
      if (!pivots_[c]) {
        pivots_[c] = std::move(row);
        ++rank_;
        return true;
      }
      for (std::size_t j = c; j < row.size(); ++j) row[j] = row[j] != (*pivots_[c])[j];
    }
    return false;
  }
  std::size_t rank() const { return rank_; }

 private:
  std::vector<std::optional<std::vector<bool>>> pivots_;
  std::size_t rank_ = 0;
};

}  // namespace

std::size_t legit_rank(std::span<const std::vector<std::size_t>> subsets, std::size_t alpha, std::size_t beta) {
  Basis basis(alpha);
  for (const auto& s : subsets) basis.add(indicator(s, alpha, beta));
  return basis.rank();
}

bool solvable(std::span<const std::vector<std::size_t>> subsets, std::size_t alpha, std::size_t beta) {
  return alpha >= 1 && legit_rank(subsets, alpha, beta) == alpha;
}

std::vector<std::size_t> select_codewords(std::span<const std::vector<std::size_t>> available, std::size_t alpha,
                                          std::size_t beta) {
  Basis basis(alpha);
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < available.size() && basis.rank() < alpha; ++i)
    if (basis.add(indicator(available[i], alpha, beta))) picked.push_back(i);
  return picked;
}

std::vector<Block> solve_gf2(std::span<const std::vector<bool>> rows_in, std::span<const Block> rhs_in,
                             std::size_t alpha) {
  if (rows_in.size() != rhs_in.size()) throw std::invalid_argument("covermix: row/rhs count mismatch");
  std::vector<std::vector<bool>> rows(rows_in.begin(), rows_in.end());
  std::vector<Block> rhs(rhs_in.begin(), rhs_in.end());
  for (const auto& r : rows)
    if (r.size() != alpha) throw std::invalid_argument("covermix: row width must equal alpha");
  for (std::size_t c = 0; c < alpha; ++c) {
    std::size_t p = c;
    while (p < rows.size() && !rows[p][c]) ++p;
    if (p == rows.size())
      throw UnsolvableError("covermix: rank below alpha (no pivot for l_" + std::to_string(c + 1) + ")");
    std::swap(rows[p], rows[c]);
    std::swap(rhs[p], rhs[c]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == c || !rows[r][c]) continue;
      for (std::size_t j = c; j < alpha; ++j) rows[r][j] = rows[r][j] != rows[c][j];
      xor_into(rhs[r], rhs[c]);
    }
  }
  // Rows past the pivots are zero now.
  for (std::size_t r = alpha; r < rhs.size(); ++r)
    if (std::any_of(rhs[r].begin(), rhs[r].end(), [](std::uint8_t b) { return b != 0; }))
      throw CorruptionError("covermix: codewords are mutually inconsistent");
  rhs.resize(alpha);
  return rhs;
}

Bytes decode(std::span<const Codeword> codewords, std::span<const Block> covers, const CoverMeta& meta) {
  if (covers.size() != meta.beta) throw std::invalid_argument("covermix: need beta cover blocks");
  std::vector<std::vector<std::size_t>> subsets;
  for (const auto& cw : codewords) {
    if (cw.payload.size() != meta.block_size) throw CorruptionError("covermix: codeword has the wrong size");
    subsets.push_back(cw.subset);
  }
  const auto picked = select_codewords(subsets, meta.alpha, meta.beta);
  if (picked.size() < meta.alpha)
    throw UnsolvableError("covermix: codewords give rank " + std::to_string(picked.size()) + " < alpha " +
                          std::to_string(meta.alpha));
  std::vector<std::vector<bool>> rows;
  std::vector<Block> rhs;
  for (auto i : picked) {
    const Codeword& cw = codewords[i];
    Block b = cw.payload;
    for (auto idx : cw.subset)
      if (idx < meta.beta) xor_into(b, covers[idx]);
    rows.push_back(indicator(cw.subset, meta.alpha, meta.beta));
    rhs.push_back(std::move(b));
  }
  const auto legit = solve_gf2(rows, rhs, meta.alpha);
  Bytes content;
  try {
    content = join_blocks(legit);
  } catch (const CorruptionError&) {
    throw CorruptionError("covermix: content hash mismatch (block stream header invalid)");
  }
  if (content.size() != meta.length || sha256(content) != meta.content_hash)
    throw CorruptionError("covermix: content hash mismatch");
  return content;
}

std::uint64_t encode_cost(std::size_t alpha, std::size_t beta, std::size_t k) {
  const std::size_t n = alpha + beta;
  if (k > n) return 0;
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  unsigned __int128 bound = 1;
  for (std::size_t i = 0; i < k && bound <= c; ++i) bound *= n;
  if (c > bound) throw std::logic_error("covermix: C(n,k) exceeds n^k");
  if (c > UINT64_MAX) throw std::overflow_error("covermix: codeword count overflows");
  return static_cast<std::uint64_t>(c);
}

void write_meta(std::ostream& out, const CoverMeta& meta) {
  out << "conlab-covermix 1\n"
      << "alpha " << meta.alpha << '\n'
      << "beta " << meta.beta << '\n'
      << "k " << meta.k << '\n'
      << "block_size " << meta.block_size << '\n'
      << "length " << meta.length << '\n'
      << "seed " << meta.seed << '\n'
      << "content_sha256 " << to_hex(meta.content_hash) << '\n';
  for (std::size_t i = 0; i < meta.cover_hashes.size(); ++i)
    out << "cover " << (i + 1) << ' ' << to_hex(meta.cover_hashes[i]) << '\n';
}

CoverMeta read_meta(std::istream& in) {
  CoverMeta meta;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("meta line " + std::to_string(lineno) + ": " + why);
  };
  auto number = [&](const std::string& text) -> std::uint64_t {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw fail("expected a number");
    try {
      return std::stoull(text);
    } catch (const std::exception&) {
      throw fail("number out of range");
    }
  };
  auto digest = [&](const std::string& text) -> Digest {
    Bytes b;
    try {
      b = from_hex(text);
    } catch (const std::invalid_argument&) {
      throw fail("bad hex digest");
    }
    if (b.size() != 32) throw fail("digest must be 32 bytes");
    Digest d;
    std::copy(b.begin(), b.end(), d.begin());
    return d;
  };
  bool header = false, have_hash = false;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, a, b, extra;
    ls >> key >> a;
    const bool has_b = static_cast<bool>(ls >> b);
    if (ls >> extra) throw fail("trailing fields");
    if (!header) {
      if (key != "conlab-covermix" || a != "1" || has_b) throw fail("expected 'conlab-covermix 1'");
      header = true;
      continue;
    }
    if (key == "cover") {
      if (!has_b) throw fail("expected 'cover <index> <sha256>'");
      if (number(a) != meta.cover_hashes.size() + 1) throw fail("cover indices must run 1, 2, ...");
      meta.cover_hashes.push_back(digest(b));
      continue;
    }
    if (has_b) throw fail("trailing fields");
    if (!seen.insert(key).second) throw fail("duplicate key '" + key + "'");
    if (key == "alpha") meta.alpha = number(a);
    else if (key == "beta") meta.beta = number(a);
    else if (key == "k") meta.k = number(a);
    else if (key == "block_size") meta.block_size = number(a);
    else if (key == "length") meta.length = number(a);
    else if (key == "seed") meta.seed = number(a);
    else if (key == "content_sha256") {
      meta.content_hash = digest(a);
      have_hash = true;
    } else throw fail("unknown key '" + key + "'");
  }
  ++lineno;
  if (!header) throw fail("missing header");
  for (const char* key : {"alpha", "beta", "k", "block_size", "length", "seed"})
    if (!seen.contains(key)) throw fail(std::string("missing '") + key + "'");
  if (!have_hash) throw fail("missing 'content_sha256'");
  if (meta.cover_hashes.size() != meta.beta) throw fail("cover count does not match beta");
  try {
    CoverParams{meta.alpha, meta.beta, meta.k, meta.block_size, meta.seed}.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("meta: ") + e.what());
  }
  return meta;
}

}  // namespace conlab
