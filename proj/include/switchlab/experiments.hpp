#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "decision_tree.hpp"
#include "error.hpp"
#include "extfloat.hpp"
#include "formula.hpp"
#include "json.hpp"
#include "rational.hpp"
#include "restriction.hpp"
#include "rng.hpp"

namespace switchlab {

// ---- exact failure mass ----------------------------------------------------

struct exact_rate {
  rational p;                  // total probability of the failure event
  std::uint64_t members = 0;   // outcomes in the failure set
  std::uint64_t outcomes = 0;  // positive-probability outcomes enumerated
};

inline exact_rate exact_failure_rate(const var_space& sp, const dnf& f,
                                     const canonical_params& params,
                                     const dist_params& dist = {},
                                     std::uint64_t budget = 1u << 20,
                                     polarity pol = polarity::normal) {
  exact_rate out;
  out.p = rational(0);
  enumerate_restrictions(
      sp, dist, budget,
      [&](const restriction& rho, const rational& prob) {
        ++out.outcomes;
        if (failure_set_member(sp, f, rho, params)) {
          ++out.members;
          out.p += prob;
        }
      },
      pol);
  return out;
}

// ---- Monte Carlo -----------------------------------------------------------

struct mc_rate {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double estimate = 0.0;
  double stderr_est = 0.0;
};

// Trial t is a pure function of (seed, t), so the partition into threads
// cannot change the count and the result is byte-identical for any thread
// count.
inline mc_rate monte_carlo_failure_rate(const var_space& sp, const dnf& f,
                                        const canonical_params& params,
                                        const dist_params& dist,
                                        std::uint64_t master_seed,
                                        std::uint64_t trials,
                                        unsigned threads = 1,
                                        polarity pol = polarity::normal) {
  if (threads == 0) threads = 1;
  counter_rng rng(master_seed);
  std::atomic<std::uint64_t> hits{0};
  auto worker = [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t local = 0;
    for (std::uint64_t t = lo; t < hi; ++t) {
      restriction rho = sample_rho(sp, dist, rng, t, pol);
      if (failure_set_member(sp, f, rho, params)) ++local;
    }
    hits += local;
  };
  if (threads == 1 || trials < 2 * threads) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    std::uint64_t chunk = (trials + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      std::uint64_t lo = std::uint64_t(i) * chunk;
      std::uint64_t hi = std::min(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (std::thread& th : pool) th.join();
  }
  mc_rate out;
  out.trials = trials;
  out.failures = hits.load();
  if (trials) {
    out.estimate = static_cast<double>(out.failures) / trials;
    out.stderr_est =
        std::sqrt(out.estimate * (1.0 - out.estimate) / trials);
  }
  return out;
}

// ---- asymptotic bound comparison -------------------------------------------

// Works in the log2 domain throughout: at the nominal scales the raw bound
// values overflow or underflow every fixed-precision float, while their
// logarithms stay 20 digits wide.
struct bound_report {
  extfloat log2_union;
  extfloat log2_target;
  extfloat union_bound;  // 2^log2_union, saturating
  extfloat target_bound; // 2^log2_target, saturating
  bool vacuous = false;       // union bound at or above 1
  bool ordering_holds = false; // union below target
  bool delta_small = false;    // 12*delta < epsilon
};

// union part: (12 e N^delta)^(N^eps / 2) * (N^(eps/12) - 1)^(-N^eps / 2)
// target part: 2^(-N^eps), with N = 2^log2_n
inline bound_report bound_values(std::uint64_t log2_n, const rational& delta,
                                 const rational& eps) {
  if (log2_n == 0) fail(error_kind::config, "nominal N must exceed 1");
  if (delta <= 0 || eps <= 0)
    fail(error_kind::config, "delta and epsilon must be positive");
  bound_report out;
  out.delta_small = delta * 12 < eps;

  extfloat L(log2_n);
  extfloat n_eps = extfloat::exp2_of(extfloat(eps) * L);
  extfloat n_eps12 = extfloat::exp2_of(extfloat(eps) * L / extfloat(std::uint64_t(12)));
  extfloat one(std::uint64_t(1));
  if (n_eps12 <= one)
    fail(error_kind::config,
         "N^(eps/12) does not exceed 1 at this scale; the union bound "
         "denominator vanishes");

  extfloat log2_12e =
      extfloat::log2_of(extfloat(std::uint64_t(12)) * extfloat::euler());
  extfloat per_term =
      log2_12e + extfloat(delta) * L - extfloat::log2_of(n_eps12 - one);
  out.log2_union = n_eps / extfloat(std::uint64_t(2)) * per_term;
  out.log2_target = -n_eps;
  out.union_bound = extfloat::exp2_of(out.log2_union);
  out.target_bound = extfloat::exp2_of(out.log2_target);
  out.vacuous = !out.log2_union.is_negative();
  out.ordering_holds = out.log2_union < out.log2_target;
  return out;
}

// ---- report rows -----------------------------------------------------------

// One row per computation mode; columns that a mode does not produce stay
// empty in the CSV and null in the JSON.
struct experiment_row {
  std::string config_hash;
  std::string mode; // "exact" or "montecarlo"
  std::uint64_t h = 0;
  std::uint64_t w = 0;
  bool has_exact = false;
  rational exact_value;
  bool has_mc = false;
  mc_rate mc;
  bound_report bounds;
};

inline std::string csv_header_experiments() {
  return "config_hash,mode,h,w,exact_p,exact_q,mc_estimate,mc_stderr,trials,"
         "union_bound,target_bound,vacuous_flag";
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_row_experiments(const experiment_row& r) {
  std::string s = r.config_hash + "," + r.mode + "," + std::to_string(r.h) +
                  "," + std::to_string(r.w) + ",";
  if (r.has_exact)
    s += r.exact_value.get_num().get_str() + "," +
         r.exact_value.get_den().get_str();
  else
    s += ",";
  s += ",";
  if (r.has_mc)
    s += format_double(r.mc.estimate) + "," + format_double(r.mc.stderr_est) +
         "," + std::to_string(r.mc.trials);
  else
    s += ",,";
  s += "," + r.bounds.union_bound.str() + "," + r.bounds.target_bound.str() +
       "," + (r.bounds.vacuous ? "1" : "0");
  return s;
}

inline nlohmann::json json_row_experiments(const experiment_row& r) {
  nlohmann::json j;
  j["config_hash"] = r.config_hash;
  j["mode"] = r.mode;
  j["h"] = r.h;
  j["w"] = r.w;
  if (r.has_exact) {
    j["exact_p"] = r.exact_value.get_num().get_str();
    j["exact_q"] = r.exact_value.get_den().get_str();
  } else {
    j["exact_p"] = nullptr;
    j["exact_q"] = nullptr;
  }
  if (r.has_mc) {
    j["mc_estimate"] = r.mc.estimate;
    j["mc_stderr"] = r.mc.stderr_est;
    j["trials"] = r.mc.trials;
  } else {
    j["mc_estimate"] = nullptr;
    j["mc_stderr"] = nullptr;
    j["trials"] = nullptr;
  }
  j["union_bound"] = r.bounds.union_bound.str();
  j["target_bound"] = r.bounds.target_bound.str();
  j["log2_union"] = r.bounds.log2_union.str();
  j["log2_target"] = r.bounds.log2_target.str();
  j["vacuous_flag"] = r.bounds.vacuous;
  j["ordering_holds"] = r.bounds.ordering_holds;
  j["delta_small"] = r.bounds.delta_small;
  return j;
}

} // namespace switchlab
