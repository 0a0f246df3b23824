#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "conlab/common.hpp"
#include "conlab/names.hpp"

namespace conlab {

class UnsolvableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Block = Bytes;

struct CoverParams {
  std::size_t alpha = 1;
  std::size_t beta = 1;
  std::size_t k = 2;
  std::size_t block_size = 64;
  std::uint64_t seed = 0;

  // alpha >= 1, beta >= 1, 2 <= k <= alpha + beta, block_size >= 16.
  void validate() const;
};

// 8-byte big-endian length, the content, zero padding to a whole block.
std::vector<Block> split_blocks(std::span<const std::uint8_t> content, std::size_t block_size);
// split_blocks padded with zero blocks to exactly `count`; throws if the
// content needs more.
std::vector<Block> split_blocks(std::span<const std::uint8_t> content, std::size_t block_size, std::size_t count);
// Inverse of split_blocks; throws CorruptionError on an inconsistent header.
Bytes join_blocks(std::span<const Block> blocks);

struct CoverMeta {
  Digest content_hash{};
  std::uint64_t length = 0;  // content bytes
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::size_t k = 0;
  std::size_t block_size = 0;
  std::uint64_t seed = 0;
  std::vector<Digest> cover_hashes;  // sha256 of c_1 .. c_beta

  bool operator==(const CoverMeta&) const = default;
};

CoverMeta make_meta(std::span<const std::uint8_t> content, std::span<const Block> covers, const CoverParams& params);

// /cover/<hex HMAC-SHA256(BE64 seed, BE32 k || BE32 index...)>
Name name_codeword(const CoverMeta& meta, std::span<const std::size_t> subset);
Name name_codeword(std::uint64_t seed, std::span<const std::size_t> subset);

// Block indices: 0 .. beta-1 are c_1 .. c_beta, beta .. beta+alpha-1 are l_1 .. l_alpha.
struct Codeword {
  std::vector<std::size_t> subset;
  Block payload;
  Name name;
};

// Every k-subset of n indices in lexicographic order.
std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k);

// One codeword per k-subset of [c_1..c_beta, l_1..l_alpha], lexicographic order.
std::vector<Codeword> encode(std::span<const Block> legit, std::span<const Block> covers, std::size_t k,
                             std::uint64_t seed);

// Rank over GF(2) of the legitimate-index indicator vectors.
std::size_t legit_rank(std::span<const std::vector<std::size_t>> subsets, std::size_t alpha, std::size_t beta);
bool solvable(std::span<const std::vector<std::size_t>> subsets, std::size_t alpha, std::size_t beta);

// Greedy: in the given order, keep each subset that raises the rank, stop at alpha.
std::vector<std::size_t> select_codewords(std::span<const std::vector<std::size_t>> available, std::size_t alpha,
                                          std::size_t beta);

// Gaussian elimination. rows[i] is an alpha-bit indicator (bit j = l_{j+1}),
// rhs[i] the matching block. Throws UnsolvableError below full rank and
// CorruptionError when extra rows contradict the solution.
std::vector<Block> solve_gf2(std::span<const std::vector<bool>> rows, std::span<const Block> rhs, std::size_t alpha);

// Recovers the legitimate blocks from any solvable set of codewords and
// checks the content hash (CorruptionError on mismatch).
Bytes decode(std::span<const Codeword> codewords, std::span<const Block> covers, const CoverMeta& meta);

// C(alpha + beta, k); also checks it does not exceed (alpha + beta)^k.
std::uint64_t encode_cost(std::size_t alpha, std::size_t beta, std::size_t k);

void write_meta(std::ostream& out, const CoverMeta& meta);
// Throws ParseError naming the offending line.
CoverMeta read_meta(std::istream& in);

}  // namespace conlab
