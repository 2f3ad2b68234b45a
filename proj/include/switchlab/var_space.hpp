#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace switchlab {

// A base word is a nonempty binary string, addressed as (length, value).
// Words order by length first, then value, which gives the canonical
// enumeration order used everywhere below.
struct base_word {
  unsigned len = 0;
  std::uint64_t value = 0;

  friend bool operator==(const base_word&, const base_word&) = default;
  friend std::strong_ordering operator<=>(const base_word&,
                                          const base_word&) = default;
};

inline std::string to_string(const base_word& w) {
  std::string s(w.len, '0');
  for (unsigned i = 0; i < w.len; ++i)
    if ((w.value >> (w.len - 1 - i)) & 1) s[i] = '1';
  return s;
}

inline base_word parse_base_word(const std::string& s) {
  if (s.empty() || s.size() > 63)
    fail(error_kind::data, "base word must have length 1..63: \"" + s + "\"");
  base_word w{static_cast<unsigned>(s.size()), 0};
  for (char c : s) {
    if (c != '0' && c != '1')
      fail(error_kind::data, "base word is not binary: \"" + s + "\"");
    w.value = (w.value << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return w;
}

// Structured variable / block addresses. ys holds the tuple coordinates in
// order; a block drops the last one.
struct var_id {
  base_word b;
  std::vector<std::uint64_t> ys;

  friend bool operator==(const var_id&, const var_id&) = default;
  friend auto operator<=>(const var_id&, const var_id&) = default;
};

struct block_id {
  base_word b;
  std::vector<std::uint64_t> ys;

  friend bool operator==(const block_id&, const block_id&) = default;
  friend auto operator<=>(const block_id&, const block_id&) = default;
};

inline block_id block_of(const var_id& v) {
  block_id b{v.b, v.ys};
  if (b.ys.empty()) fail(error_kind::data, "variable with no coordinates");
  b.ys.pop_back();
  return b;
}

namespace space_detail {

inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp,
                                 const char* what) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    unsigned __int128 wide = static_cast<unsigned __int128>(r) * base;
    if (wide > UINT64_MAX)
      fail(error_kind::config, std::string(what) + " overflows 64 bits");
    r = static_cast<std::uint64_t>(wide);
  }
  return r;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b,
                                 const char* what) {
  if (a > UINT64_MAX - b)
    fail(error_kind::config, std::string(what) + " overflows 64 bits");
  return a + b;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b,
                                 const char* what) {
  unsigned __int128 wide = static_cast<unsigned __int128>(a) * b;
  if (wide > UINT64_MAX)
    fail(error_kind::config, std::string(what) + " overflows 64 bits");
  return static_cast<std::uint64_t>(wide);
}

} // namespace space_detail

// Finite variable universe. scale_range lists base-word lengths; the i-th
// occurrence of length n names the word (n, i-1). Coordinates 1..arity-1
// range over M^e1 and the last coordinate over M^e2 with M = 2^|b|, unless
// last_range_override pins an explicit range for that word length (used for
// collapsed spaces whose blocks are cut to a quota, not a power of M).
//
// Variables are totally ordered by (b, ys) lexicographically; the variables
// of a block are contiguous, ascending in the last coordinate. A group is a
// block minus its last coordinate; the blocks of a group are contiguous too.
class var_space {
public:
  var_space() = default;

  var_space(std::vector<unsigned> scale_range, unsigned e1, unsigned e2,
            unsigned tuple_arity = 3,
            std::map<unsigned, std::uint64_t> last_range_override = {}) {
    if (e1 < 1 || e2 < 1) fail(error_kind::config, "e1 and e2 must be >= 1");
    if (tuple_arity < 2) fail(error_kind::config, "tupleArity must be >= 2");
    e1_ = e1;
    e2_ = e2;
    arity_ = tuple_arity;
    override_ = std::move(last_range_override);

    std::map<unsigned, std::uint64_t> seen;
    std::vector<base_word> ws;
    for (unsigned len : scale_range) {
      if (len < 1 || len > 63)
        fail(error_kind::config, "base word length must be in 1..63");
      std::uint64_t occ = seen[len]++;
      if (occ >= (std::uint64_t(1) << len))
        fail(error_kind::config,
             "more words of length " + std::to_string(len) +
                 " than binary strings of that length");
      ws.push_back(base_word{len, occ});
    }
    std::sort(ws.begin(), ws.end());
    for (auto& [len, ignored] : override_) {
      (void)ignored;
      if (!seen.count(len))
        fail(error_kind::config,
             "lastRangeOverride names absent word length " +
                 std::to_string(len));
      if (override_[len] < 1)
        fail(error_kind::config, "lastRangeOverride range must be >= 1");
    }

    using namespace space_detail;
    std::uint64_t var_off = 0, block_off = 0, group_off = 0;
    for (const base_word& w : ws) {
      word_layout L;
      L.w = w;
      std::uint64_t m = std::uint64_t(1) << w.len;
      L.y_rng = checked_pow(m, e1_, "M^e1");
      auto it = override_.find(w.len);
      L.z_rng = it != override_.end() ? it->second
                                      : checked_pow(m, e2_, "M^e2");
      L.groups = checked_pow(L.y_rng, arity_ - 2, "group count");
      L.blocks = checked_mul(L.groups, L.y_rng, "block count");
      L.vars = checked_mul(L.blocks, L.z_rng, "variable count");
      L.var_off = var_off;
      L.block_off = block_off;
      L.group_off = group_off;
      var_off = checked_add(var_off, L.vars, "variable count");
      block_off = checked_add(block_off, L.blocks, "block count");
      group_off = checked_add(group_off, L.groups, "group count");
      words_.push_back(L);
    }
    var_count_ = var_off;
    block_count_ = block_off;
    group_count_ = group_off;
  }

  unsigned e1() const { return e1_; }
  unsigned e2() const { return e2_; }
  unsigned tuple_arity() const { return arity_; }
  const std::map<unsigned, std::uint64_t>& last_range_override() const {
    return override_;
  }

  std::size_t word_count() const { return words_.size(); }
  const base_word& word_at(std::size_t i) const {
    if (i >= words_.size()) fail(error_kind::data, "word index out of range");
    return words_[i].w;
  }
  std::uint64_t scale_of_word(std::size_t i) const {
    return std::uint64_t(1) << word_at(i).len;
  }
  std::size_t word_index(const base_word& b) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i].w == b) return i;
    fail(error_kind::data, "base word not in space: " + to_string(b));
  }

  std::uint64_t var_count() const { return var_count_; }
  std::uint64_t block_count() const { return block_count_; }
  std::uint64_t group_count() const { return group_count_; }

  // last-coordinate range of the word, i.e. the size of each of its blocks
  std::uint64_t block_size_of_word(std::size_t i) const {
    return words_.at(i).z_rng;
  }
  // range of each non-final coordinate of the word
  std::uint64_t y_range_of_word(std::size_t i) const {
    return words_.at(i).y_rng;
  }

  std::size_t word_of_var(std::uint64_t v) const {
    return find_word(v, &word_layout::var_off, var_count_, "variable");
  }
  std::size_t word_of_block(std::uint64_t b) const {
    return find_word(b, &word_layout::block_off, block_count_, "block");
  }
  std::size_t word_of_group(std::uint64_t g) const {
    return find_word(g, &word_layout::group_off, group_count_, "group");
  }

  std::uint64_t scale_of_var(std::uint64_t v) const {
    return std::uint64_t(1) << words_[word_of_var(v)].w.len;
  }
  std::uint64_t scale_of_block(std::uint64_t b) const {
    return std::uint64_t(1) << words_[word_of_block(b)].w.len;
  }

  var_id var_at(std::uint64_t v) const {
    const word_layout& L = words_[word_of_var(v)];
    std::uint64_t local = v - L.var_off;
    var_id id;
    id.b = L.w;
    id.ys.assign(arity_, 0);
    id.ys[arity_ - 1] = local % L.z_rng;
    local /= L.z_rng;
    for (unsigned c = arity_ - 1; c-- > 0;) {
      id.ys[c] = local % L.y_rng;
      local /= L.y_rng;
    }
    return id;
  }

  std::uint64_t index_of(const var_id& id) const {
    const word_layout& L = words_[word_index(id.b)];
    if (id.ys.size() != arity_)
      fail(error_kind::data, "variable has wrong coordinate count");
    std::uint64_t acc = 0;
    for (unsigned c = 0; c < arity_ - 1; ++c) {
      if (id.ys[c] >= L.y_rng)
        fail(error_kind::data, "variable coordinate out of range");
      acc = acc * L.y_rng + id.ys[c];
    }
    if (id.ys[arity_ - 1] >= L.z_rng)
      fail(error_kind::data, "variable last coordinate out of range");
    return L.var_off + acc * L.z_rng + id.ys[arity_ - 1];
  }

  block_id block_at(std::uint64_t b) const {
    const word_layout& L = words_[word_of_block(b)];
    std::uint64_t local = b - L.block_off;
    block_id id;
    id.b = L.w;
    id.ys.assign(arity_ - 1, 0);
    for (unsigned c = arity_ - 1; c-- > 0;) {
      id.ys[c] = local % L.y_rng;
      local /= L.y_rng;
    }
    return id;
  }

  std::uint64_t index_of_block(const block_id& id) const {
    const word_layout& L = words_[word_index(id.b)];
    if (id.ys.size() != arity_ - 1)
      fail(error_kind::data, "block has wrong coordinate count");
    std::uint64_t acc = 0;
    for (std::uint64_t y : id.ys) {
      if (y >= L.y_rng) fail(error_kind::data, "block coordinate out of range");
      acc = acc * L.y_rng + y;
    }
    return L.block_off + acc;
  }

  std::uint64_t block_of_var(std::uint64_t v) const {
    const word_layout& L = words_[word_of_var(v)];
    return L.block_off + (v - L.var_off) / L.z_rng;
  }
  std::uint64_t block_first_var(std::uint64_t b) const {
    const word_layout& L = words_[word_of_block(b)];
    return L.var_off + (b - L.block_off) * L.z_rng;
  }
  std::uint64_t block_size(std::uint64_t b) const {
    return words_[word_of_block(b)].z_rng;
  }

  std::uint64_t group_of_block(std::uint64_t b) const {
    const word_layout& L = words_[word_of_block(b)];
    return L.group_off + (b - L.block_off) / L.y_rng;
  }
  std::uint64_t group_first_block(std::uint64_t g) const {
    const word_layout& L = words_[word_of_group(g)];
    return L.block_off + (g - L.group_off) * L.y_rng;
  }
  // blocks per group, i.e. the range of the next-to-last coordinate
  std::uint64_t group_size(std::uint64_t g) const {
    return words_[word_of_group(g)].y_rng;
  }

  std::vector<var_id> enumerate_vars() const {
    std::vector<var_id> out;
    out.reserve(var_count_);
    for (std::uint64_t v = 0; v < var_count_; ++v) out.push_back(var_at(v));
    return out;
  }

  friend bool operator==(const var_space& a, const var_space& b) {
    if (a.e1_ != b.e1_ || a.e2_ != b.e2_ || a.arity_ != b.arity_ ||
        a.override_ != b.override_ || a.words_.size() != b.words_.size())
      return false;
    for (std::size_t i = 0; i < a.words_.size(); ++i)
      if (!(a.words_[i].w == b.words_[i].w)) return false;
    return true;
  }

private:
  struct word_layout {
    base_word w;
    std::uint64_t y_rng = 0, z_rng = 0;
    std::uint64_t groups = 0, blocks = 0, vars = 0;
    std::uint64_t var_off = 0, block_off = 0, group_off = 0;
  };

  std::size_t find_word(std::uint64_t idx, std::uint64_t word_layout::*off,
                        std::uint64_t total, const char* what) const {
    if (idx >= total)
      fail(error_kind::data,
           std::string(what) + " index " + std::to_string(idx) +
               " out of range");
    std::size_t lo = 0, hi = words_.size();
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (words_[mid].*off <= idx)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

  unsigned e1_ = 1, e2_ = 1, arity_ = 3;
  std::map<unsigned, std::uint64_t> override_;
  std::vector<word_layout> words_;
  std::uint64_t var_count_ = 0, block_count_ = 0, group_count_ = 0;
};

} // namespace switchlab
