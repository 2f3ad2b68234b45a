#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "decision_tree.hpp"
#include "encoding.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "restriction.hpp"
#include "var_space.hpp"

namespace switchlab {

using njson = nlohmann::json;

// ---- coordinates ----------------------------------------------------------

inline njson var_to_json(const var_id& v) {
  njson j;
  j["b"] = to_string(v.b);
  for (std::size_t i = 0; i < v.ys.size(); ++i)
    j["y" + std::to_string(i + 1)] = v.ys[i];
  return j;
}

inline var_id parse_var_json(const var_space& sp, const njson& j) {
  if (!j.is_object() || !j.contains("b") || !j["b"].is_string())
    fail(error_kind::data, "variable record needs a binary \"b\" field");
  var_id v;
  v.b = parse_base_word(j["b"].get<std::string>());
  v.ys.resize(sp.tuple_arity());
  for (unsigned i = 0; i < sp.tuple_arity(); ++i) {
    std::string key = "y" + std::to_string(i + 1);
    if (!j.contains(key) || !j[key].is_number_unsigned())
      fail(error_kind::data, "variable record misses coordinate " + key);
    v.ys[i] = j[key].get<std::uint64_t>();
  }
  return v;
}

inline njson block_to_json(const block_id& b) {
  njson j;
  j["b"] = to_string(b.b);
  for (std::size_t i = 0; i < b.ys.size(); ++i)
    j["y" + std::to_string(i + 1)] = b.ys[i];
  return j;
}

inline block_id parse_block_json(const var_space& sp, const njson& j) {
  if (!j.is_object() || !j.contains("b") || !j["b"].is_string())
    fail(error_kind::data, "block record needs a binary \"b\" field");
  block_id b;
  b.b = parse_base_word(j["b"].get<std::string>());
  b.ys.resize(sp.tuple_arity() - 1);
  for (unsigned i = 0; i + 1 < sp.tuple_arity(); ++i) {
    std::string key = "y" + std::to_string(i + 1);
    if (!j.contains(key) || !j[key].is_number_unsigned())
      fail(error_kind::data, "block record misses coordinate " + key);
    b.ys[i] = j[key].get<std::uint64_t>();
  }
  return b;
}

inline std::string var_text(const var_space& sp, std::uint64_t v) {
  var_id id = sp.var_at(v);
  std::string s = to_string(id.b) + ":";
  for (std::size_t i = 0; i < id.ys.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(id.ys[i]);
  }
  return s;
}

inline std::string block_text(const var_space& sp, std::uint64_t b) {
  block_id id = sp.block_at(b);
  std::string s = to_string(id.b) + ":";
  for (std::size_t i = 0; i < id.ys.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(id.ys[i]);
  }
  return s;
}

// ---- restrictions ---------------------------------------------------------

// Only assignments are recorded: unset variables and undetermined blocks are
// implicit, and the forced markers are reconstruction detail that the
// serialized event deliberately drops.
inline njson restriction_to_json(const restriction& r) {
  const var_space& sp = r.space();
  njson j;
  j["stage"] = r.stage();
  j["polarity"] = r.pol() == polarity::normal ? "normal" : "flipped";
  njson vars = njson::array();
  for (std::uint64_t v = 0; v < sp.var_count(); ++v) {
    var_state s = r.state(v);
    if (s == var_state::unset) continue;
    njson e;
    e["var"] = var_to_json(sp.var_at(v));
    e["state"] = to_string(s);
    vars.push_back(std::move(e));
  }
  j["vars"] = std::move(vars);
  njson blocks = njson::array();
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    block_state s = r.bstate(b);
    if (s == block_state::undetermined) continue;
    njson e;
    e["block"] = block_to_json(sp.block_at(b));
    e["state"] = to_string(s);
    blocks.push_back(std::move(e));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline restriction parse_restriction(const var_space& sp, const njson& j) {
  if (!j.is_object()) fail(error_kind::data, "restriction must be an object");
  polarity pol = polarity::normal;
  if (j.contains("polarity")) {
    std::string p = j["polarity"].get<std::string>();
    if (p == "flipped")
      pol = polarity::flipped;
    else if (p != "normal")
      fail(error_kind::data, "unknown polarity: " + p);
  }
  std::string stage = j.value("stage", std::string("parsed"));
  restriction r(sp, pol, stage);
  for (const njson& e : j.value("vars", njson::array())) {
    std::uint64_t v = sp.index_of(parse_var_json(sp, e["var"]));
    std::string s = e.value("state", std::string());
    if (s == "0")
      r.set_var(v, var_state::zero);
    else if (s == "1")
      r.set_var(v, var_state::one);
    else if (s == "*")
      r.set_var(v, var_state::star);
    else
      fail(error_kind::data, "unknown variable state: \"" + s + "\"");
  }
  for (const njson& e : j.value("blocks", njson::array())) {
    std::uint64_t b = sp.index_of_block(parse_block_json(sp, e["block"]));
    std::string s = e.value("state", std::string());
    if (s == "allOnes")
      r.set_block(b, block_state::all_ones);
    else if (s == "zeroBlock")
      r.set_block(b, block_state::zero_block);
    else if (s == "starBlock")
      r.set_block(b, block_state::star_block);
    else
      fail(error_kind::data, "unknown block state: \"" + s + "\"");
  }
  return r;
}

// ---- formulas -------------------------------------------------------------

inline njson literal_to_json(const literal& l) {
  njson j = var_to_json(l.var);
  j["sign"] = l.positive ? "+" : "-";
  return j;
}

inline literal parse_literal_json(const var_space& sp, const njson& j) {
  literal l;
  l.var = parse_var_json(sp, j);
  std::string s = j.value("sign", std::string("+"));
  if (s == "+")
    l.positive = true;
  else if (s == "-")
    l.positive = false;
  else
    fail(error_kind::data, "literal sign must be \"+\" or \"-\"");
  return l;
}

inline njson dnf_to_json(const dnf& f) {
  njson j;
  j["width"] = f.width;
  j["polarity"] = f.kind == formula_kind::dnf ? "dnf" : "cnf";
  njson terms = njson::array();
  for (const conjunction& c : f.terms) {
    njson t = njson::array();
    for (const literal& l : c) t.push_back(literal_to_json(l));
    terms.push_back(std::move(t));
  }
  j["conjunctions"] = std::move(terms);
  return j;
}

inline dnf parse_dnf(const var_space& sp, const njson& j) {
  if (!j.is_object() || !j.contains("conjunctions"))
    fail(error_kind::data, "formula must carry a \"conjunctions\" array");
  formula_kind kind = formula_kind::dnf;
  std::string p = j.value("polarity", std::string("dnf"));
  if (p == "cnf")
    kind = formula_kind::cnf;
  else if (p != "dnf")
    fail(error_kind::data, "formula polarity must be \"dnf\" or \"cnf\"");
  std::vector<conjunction> terms;
  for (const njson& t : j["conjunctions"]) {
    if (!t.is_array()) fail(error_kind::data, "conjunction must be an array");
    conjunction c;
    for (const njson& l : t) c.push_back(parse_literal_json(sp, l));
    terms.push_back(std::move(c));
  }
  dnf f = make_dnf(std::move(terms), kind,
                   j.value("width", std::uint64_t(0)));
  validate_dnf(sp, f);
  return f;
}

// ---- decision trees -------------------------------------------------------

inline njson round_to_json(const var_space& sp, const failure_round& r) {
  njson j;
  j["conj"] = r.conj;
  njson blocks = njson::array();
  for (std::uint64_t b : r.blocks) blocks.push_back(block_to_json(sp.block_at(b)));
  j["blocks"] = std::move(blocks);
  njson reps = njson::array();
  for (std::uint64_t v : r.reps) reps.push_back(var_to_json(sp.var_at(v)));
  j["reps"] = std::move(reps);
  j["answers"] = r.answers;
  njson gamma = njson::array();
  for (std::uint64_t v : r.gamma) gamma.push_back(var_to_json(sp.var_at(v)));
  j["gamma"] = std::move(gamma);
  return j;
}

inline njson tree_to_json(const var_space& sp, const decision_tree& t) {
  struct rec {
    const var_space& sp;
    const decision_tree& t;
    njson node(std::size_t i) const {
      const decision_tree::node& n = t.at(i);
      njson j;
      if (n.is_leaf) {
        j["leaf"] = n.value;
        njson trace = njson::array();
        for (const failure_round& r : n.trace)
          trace.push_back(round_to_json(sp, r));
        j["trace"] = std::move(trace);
      } else {
        j["query"] = var_to_json(sp.var_at(n.var));
        j["lo"] = node(n.lo);
        j["hi"] = node(n.hi);
      }
      return j;
    }
  };
  njson j;
  if (t.phase1_queries) j["phase1Queries"] = *t.phase1_queries;
  j["root"] = rec{sp, t}.node(t.root());
  return j;
}

// indented text form, stable for golden files
inline std::string render_tree(const var_space& sp, const decision_tree& t) {
  std::string out;
  struct rec {
    const var_space& sp;
    const decision_tree& t;
    std::string& out;
    void node(std::size_t i, unsigned depth) const {
      std::string pad(2 * depth, ' ');
      const decision_tree::node& n = t.at(i);
      if (n.is_leaf) {
        out += pad + "leaf " + std::to_string(n.value);
        if (!n.trace.empty())
          out += " rounds=" + std::to_string(n.trace.size());
        out += "\n";
        return;
      }
      out += pad + "? " + var_text(sp, n.var) + "\n";
      out += pad + "0:\n";
      node(n.lo, depth + 1);
      out += pad + "1:\n";
      node(n.hi, depth + 1);
    }
  };
  rec{sp, t, out}.node(t.root(), 0);
  return out;
}

// ---- code bundles ---------------------------------------------------------

namespace bits_detail {

inline std::string mask_string(const std::vector<bool>& m) {
  std::string s(m.size(), '0');
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) s[i] = '1';
  return s;
}

inline std::vector<bool> parse_mask(const std::string& s, const char* what) {
  std::vector<bool> m(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      fail(error_kind::data, std::string(what) + " must be a bit string");
    m[i] = s[i] == '1';
  }
  return m;
}

} // namespace bits_detail

inline njson bundle_to_json(const code_bundle& b) {
  njson j;
  j["rhoTauSigma"] = restriction_to_json(b.rho_tau_sigma);
  j["tauCode"] = b.tau_code;
  njson beta = njson::array();
  for (const block_record& r : b.beta_prime) {
    njson e;
    e["membership"] = bits_detail::mask_string(r.membership);
    e["continuation"] = r.continuation;
    beta.push_back(std::move(e));
  }
  j["betaPrime"] = std::move(beta);
  std::string pi(b.pi_prime.size(), '0');
  for (std::size_t i = 0; i < b.pi_prime.size(); ++i)
    if (b.pi_prime[i]) pi[i] = '1';
  j["piPrime"] = pi;
  njson gamma = njson::array();
  for (const auto& m : b.gamma_prime)
    gamma.push_back(bits_detail::mask_string(m));
  j["gammaPrime"] = std::move(gamma);
  bundle_bits bl = bit_lengths(b);
  j["bits"] = njson{{"tau", bl.tau},
                    {"beta", bl.beta},
                    {"pi", bl.pi},
                    {"gamma", bl.gamma},
                    {"total", bl.total()}};
  return j;
}

inline code_bundle parse_bundle(const var_space& sp, const njson& j) {
  if (!j.is_object() || !j.contains("rhoTauSigma"))
    fail(error_kind::data, "bundle must carry \"rhoTauSigma\"");
  code_bundle b;
  b.rho_tau_sigma = parse_restriction(sp, j["rhoTauSigma"]);
  b.tau_code = j.value("tauCode", std::string());
  for (char c : b.tau_code)
    if (c != '0' && c != '1' && c != '-')
      fail(error_kind::data, "tauCode symbols must be 0, 1 or -");
  for (const njson& e : j.value("betaPrime", njson::array())) {
    block_record r;
    r.membership = bits_detail::parse_mask(
        e.value("membership", std::string()), "betaPrime membership");
    r.continuation = e.value("continuation", false);
    b.beta_prime.push_back(std::move(r));
  }
  b.pi_prime =
      bits_detail::parse_mask(j.value("piPrime", std::string()), "piPrime");
  for (const njson& m : j.value("gammaPrime", njson::array()))
    b.gamma_prime.push_back(
        bits_detail::parse_mask(m.get<std::string>(), "gammaPrime mask"));
  return b;
}

// ---- compact binary bundle form -------------------------------------------

// One unaligned little-endian bitstream. Every field is length-prefixed;
// two-bit codes carry variable states, block states and ternary symbols.
class bit_writer {
public:
  void push(bool b) {
    if (n_ % 8 == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= static_cast<std::uint8_t>(1u << (n_ % 8));
    ++n_;
  }
  void push_uint(std::uint64_t v, unsigned bits) {
    for (unsigned i = 0; i < bits; ++i) push((v >> i) & 1);
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t n_ = 0;
};

class bit_reader {
public:
  explicit bit_reader(const std::vector<std::uint8_t>& bytes)
      : bytes_(bytes) {}

  bool pull() {
    if (n_ >= 8 * bytes_.size())
      fail(error_kind::data, "binary bundle truncated");
    bool b = (bytes_[n_ / 8] >> (n_ % 8)) & 1;
    ++n_;
    return b;
  }
  std::uint64_t pull_uint(unsigned bits) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bits; ++i)
      if (pull()) v |= std::uint64_t(1) << i;
    return v;
  }
  // everything after the cursor must be padding zeros of the final byte
  void expect_end() const {
    if ((n_ + 7) / 8 != bytes_.size())
      fail(error_kind::data, "binary bundle carries trailing bytes");
    for (std::uint64_t i = n_; i < 8 * bytes_.size(); ++i)
      if ((bytes_[i / 8] >> (i % 8)) & 1)
        fail(error_kind::data, "binary bundle carries trailing bits");
  }

private:
  const std::vector<std::uint8_t>& bytes_;
  std::uint64_t n_ = 0;
};

inline std::vector<std::uint8_t> bundle_to_binary(const code_bundle& b) {
  const restriction& r = b.rho_tau_sigma;
  const var_space& sp = r.space();
  bit_writer w;
  w.push_uint(0x31424c53, 32); // "SLB1"
  w.push_uint(r.pol() == polarity::normal ? 0 : 1, 1);
  w.push_uint(sp.var_count(), 64);
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    w.push_uint(static_cast<unsigned>(r.state(v)), 2);
  w.push_uint(sp.block_count(), 64);
  for (std::uint64_t bk = 0; bk < sp.block_count(); ++bk)
    w.push_uint(static_cast<unsigned>(r.bstate(bk)), 2);
  w.push_uint(b.tau_code.size(), 64);
  for (char c : b.tau_code)
    w.push_uint(c == '-' ? 2 : static_cast<unsigned>(c - '0'), 2);
  std::uint64_t rw = b.beta_prime.empty() ? 0 : b.beta_prime[0].membership.size();
  w.push_uint(rw, 64);
  w.push_uint(b.beta_prime.size(), 64);
  for (const block_record& rec : b.beta_prime) {
    if (rec.membership.size() != rw)
      fail(error_kind::data, "binary form needs uniform record width");
    for (bool bit : rec.membership) w.push(bit);
    w.push(rec.continuation);
  }
  w.push_uint(b.pi_prime.size(), 64);
  for (bool bit : b.pi_prime) w.push(bit);
  w.push_uint(b.gamma_prime.size(), 64);
  for (const auto& mask : b.gamma_prime) {
    if (mask.size() != rw)
      fail(error_kind::data, "binary form needs uniform mask width");
    for (bool bit : mask) w.push(bit);
  }
  return w.bytes();
}

inline code_bundle parse_binary_bundle(const var_space& sp,
                                       const std::vector<std::uint8_t>& bytes,
                                       const std::string& stage = "decoded") {
  bit_reader rd(bytes);
  if (rd.pull_uint(32) != 0x31424c53)
    fail(error_kind::data, "binary bundle magic mismatch");
  polarity pol = rd.pull_uint(1) ? polarity::flipped : polarity::normal;
  code_bundle b;
  b.rho_tau_sigma = restriction(sp, pol, stage);
  if (rd.pull_uint(64) != sp.var_count())
    fail(error_kind::data, "binary bundle variable count mismatch");
  for (std::uint64_t v = 0; v < sp.var_count(); ++v) {
    std::uint64_t s = rd.pull_uint(2);
    b.rho_tau_sigma.set_var(v, static_cast<var_state>(s));
  }
  if (rd.pull_uint(64) != sp.block_count())
    fail(error_kind::data, "binary bundle block count mismatch");
  for (std::uint64_t bk = 0; bk < sp.block_count(); ++bk)
    b.rho_tau_sigma.set_block(bk, static_cast<block_state>(rd.pull_uint(2)));
  std::uint64_t tau_len = rd.pull_uint(64);
  for (std::uint64_t i = 0; i < tau_len; ++i) {
    std::uint64_t s = rd.pull_uint(2);
    if (s > 2) fail(error_kind::data, "binary bundle ternary symbol invalid");
    b.tau_code += s == 2 ? '-' : static_cast<char>('0' + s);
  }
  std::uint64_t rw = rd.pull_uint(64);
  std::uint64_t recs = rd.pull_uint(64);
  for (std::uint64_t i = 0; i < recs; ++i) {
    block_record rec;
    rec.membership.resize(rw);
    for (std::uint64_t k = 0; k < rw; ++k) rec.membership[k] = rd.pull();
    rec.continuation = rd.pull();
    b.beta_prime.push_back(std::move(rec));
  }
  std::uint64_t pis = rd.pull_uint(64);
  b.pi_prime.resize(pis);
  for (std::uint64_t i = 0; i < pis; ++i) b.pi_prime[i] = rd.pull();
  std::uint64_t gammas = rd.pull_uint(64);
  for (std::uint64_t i = 0; i < gammas; ++i) {
    std::vector<bool> mask(rw);
    for (std::uint64_t k = 0; k < rw; ++k) mask[k] = rd.pull();
    b.gamma_prime.push_back(std::move(mask));
  }
  rd.expect_end();
  return b;
}

} // namespace switchlab
