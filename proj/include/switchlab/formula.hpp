#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "var_space.hpp"

namespace switchlab {

struct literal {
  var_id var;
  bool positive = true;

  friend bool operator==(const literal&, const literal&) = default;
};

// literal order inside a conjunction is part of the formula's identity: the
// encoding refers to literals by their original positions
using conjunction = std::vector<literal>;

// kind=cnf keeps the same storage and reads each term as a clause of the
// De Morgan dual; evaluation flips accordingly
enum class formula_kind : unsigned char { dnf, cnf };

struct dnf {
  std::vector<conjunction> terms;
  std::size_t width = 0; // declared bound, >= every term's size
  formula_kind kind = formula_kind::dnf;

  friend bool operator==(const dnf&, const dnf&) = default;
};

inline dnf make_dnf(std::vector<conjunction> terms,
                    formula_kind kind = formula_kind::dnf,
                    std::size_t declared_width = 0) {
  dnf f;
  f.terms = std::move(terms);
  f.kind = kind;
  f.width = declared_width;
  for (const conjunction& c : f.terms)
    f.width = std::max(f.width, c.size());
  return f;
}

// negates every literal and flips the kind; eval(dual(f)) = 1 - eval(f)
inline dnf dual(const dnf& f) {
  dnf out = f;
  out.kind = f.kind == formula_kind::dnf ? formula_kind::cnf
                                         : formula_kind::dnf;
  for (conjunction& c : out.terms)
    for (literal& l : c) l.positive = !l.positive;
  return out;
}

// Rejects literals outside the space, terms over the declared width, and
// terms carrying both polarities of one variable. A repeated literal of one
// sign is redundant but legal; a contradictory pair is not a term at all.
inline void validate_dnf(const var_space& sp, const dnf& f) {
  std::vector<std::pair<std::uint64_t, bool>> seen;
  for (std::size_t t = 0; t < f.terms.size(); ++t) {
    if (f.terms[t].size() > f.width)
      fail(error_kind::data, "term " + std::to_string(t) +
                                 " exceeds the declared width " +
                                 std::to_string(f.width));
    seen.clear();
    for (const literal& l : f.terms[t]) {
      std::uint64_t v = sp.index_of(l.var);
      for (auto [sv, sp_] : seen)
        if (sv == v && sp_ != l.positive)
          fail(error_kind::data, "term " + std::to_string(t) +
                                     " contains both polarities of a variable");
      seen.emplace_back(v, l.positive);
    }
  }
}

namespace formula_detail {

inline bool term_true(const var_space& sp, const conjunction& c,
                      const std::vector<std::int8_t>& point) {
  for (const literal& l : c) {
    std::int8_t bit = point.at(sp.index_of(l.var));
    if (bit != 0 && bit != 1)
      fail(error_kind::data, "evaluation point misses a formula variable");
    if ((bit == 1) != l.positive) return false;
  }
  return true;
}

inline bool clause_true(const var_space& sp, const conjunction& c,
                        const std::vector<std::int8_t>& point) {
  for (const literal& l : c) {
    std::int8_t bit = point.at(sp.index_of(l.var));
    if (bit != 0 && bit != 1)
      fail(error_kind::data, "evaluation point misses a formula variable");
    if ((bit == 1) == l.positive) return true;
  }
  return false;
}

} // namespace formula_detail

inline bool eval_dnf(const var_space& sp, const dnf& f,
                     const std::vector<std::int8_t>& point) {
  if (f.kind == formula_kind::cnf) {
    for (const conjunction& c : f.terms)
      if (!formula_detail::clause_true(sp, c, point)) return false;
    return true;
  }
  for (const conjunction& c : f.terms)
    if (formula_detail::term_true(sp, c, point)) return true;
  return false;
}

enum class conj_status : unsigned char { satisfied, killed, residual };

// residual holds the original positions of the still-unvalued literals
struct conj_view {
  conj_status status = conj_status::satisfied;
  std::vector<std::size_t> residual;
};

// Applies a partial assignment (var index -> optional bit) to one term of a
// dnf-kind formula. killed beats residual: a single falsified literal
// decides the term no matter how many stars remain.
template <class ValueFn>
conj_view restrict_conjunction(const var_space& sp, const conjunction& c,
                               ValueFn&& value) {
  conj_view out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::optional<int> bit = value(sp.index_of(c[i].var));
    if (!bit) {
      out.residual.push_back(i);
    } else if ((*bit == 1) != c[i].positive) {
      out.status = conj_status::killed;
      out.residual.clear();
      return out;
    }
  }
  out.status =
      out.residual.empty() ? conj_status::satisfied : conj_status::residual;
  return out;
}

struct live_conjunction {
  std::size_t index = 0;
  conj_view view;
};

// First term not falsified by the partial assignment, scanning in list
// order. A satisfied term and a residual term both stop the scan; the caller
// distinguishes them through the view's status.
template <class ValueFn>
std::optional<live_conjunction> first_live_conjunction(const var_space& sp,
                                                       const dnf& f,
                                                       ValueFn&& value,
                                                       std::size_t from = 0) {
  if (f.kind != formula_kind::dnf)
    fail(error_kind::data, "liveness scan needs dnf form");
  for (std::size_t t = from; t < f.terms.size(); ++t) {
    conj_view v = restrict_conjunction(sp, f.terms[t], value);
    if (v.status != conj_status::killed)
      return live_conjunction{t, std::move(v)};
  }
  return std::nullopt;
}

} // namespace switchlab
