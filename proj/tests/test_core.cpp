#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "helpers.hpp"

using namespace switchlab;
using testutil::tiny_dnf;
using testutil::tiny_params;
using testutil::tiny_space;
using testutil::V;

TEST_CASE("variable space layout on the tiny fixture") {
  const var_space& sp = tiny_space();
  REQUIRE(sp.word_count() == 1);
  REQUIRE(sp.var_count() == 8);
  REQUIRE(sp.block_count() == 4);
  REQUIRE(sp.group_count() == 2);
  REQUIRE(sp.tuple_arity() == 3);
  REQUIRE(sp.scale_of_word(0) == 2);

  // vars enumerate lexicographically by coordinate tuple
  std::uint64_t idx = 0;
  for (std::uint64_t y1 = 0; y1 < 2; ++y1)
    for (std::uint64_t y2 = 0; y2 < 2; ++y2)
      for (std::uint64_t y3 = 0; y3 < 2; ++y3) {
        REQUIRE(V(sp, y1, y2, y3) == idx);
        var_id v = sp.var_at(idx);
        REQUIRE(v.ys == std::vector<std::uint64_t>{y1, y2, y3});
        REQUIRE(sp.index_of(v) == idx);
        ++idx;
      }

  // blocks drop the last coordinate, groups drop two
  for (std::uint64_t v = 0; v < sp.var_count(); ++v) {
    std::uint64_t b = sp.block_of_var(v);
    REQUIRE(b == v / 2);
    REQUIRE(sp.block_first_var(b) <= v);
    REQUIRE(v < sp.block_first_var(b) + sp.block_size(b));
    REQUIRE(sp.block_size(b) == 2);
    REQUIRE(sp.group_of_block(b) == b / 2);
    REQUIRE(sp.scale_of_var(v) == 2);
    REQUIRE(sp.scale_of_block(b) == 2);
  }
  for (std::uint64_t g = 0; g < sp.group_count(); ++g)
    REQUIRE(sp.group_size(g) == 2);
}

TEST_CASE("variable space over mixed scales") {
  var_space sp({1, 2}, 1, 1, 3, {});
  REQUIRE(sp.word_count() == 2);
  REQUIRE(sp.scale_of_word(0) == 2);
  REQUIRE(sp.scale_of_word(1) == 4);
  // 2^3 vars for the small word, 4^3 for the large one
  REQUIRE(sp.var_count() == 8 + 64);
  REQUIRE(sp.block_count() == 4 + 16);
  REQUIRE(sp.group_count() == 2 + 4);
  REQUIRE(sp.block_size(0) == 2);
  REQUIRE(sp.block_size(4) == 4);
  REQUIRE(sp.word_of_var(7) == 0);
  REQUIRE(sp.word_of_var(8) == 1);
}

TEST_CASE("last-range override reshapes the final coordinate") {
  var_space sp({1}, 1, 1, 2, {{1, 1}});
  REQUIRE(sp.var_count() == 2);
  REQUIRE(sp.block_count() == 2);
  REQUIRE(sp.group_count() == 1);
  REQUIRE(sp.block_size(0) == 1);

  var_space wide({1}, 1, 1, 2, {});
  REQUIRE(wide.var_count() == 4);
  REQUIRE(wide.block_size(0) == 2);
}

TEST_CASE("variable space rejects malformed shapes") {
  REQUIRE_THROWS_AS(var_space({1}, 0, 1, 3, {}), error);
  REQUIRE_THROWS_AS(var_space({1}, 1, 1, 1, {}), error);
  REQUIRE_THROWS_AS(var_space({0}, 1, 1, 3, {}), error);
  REQUIRE_THROWS_AS(var_space({64}, 1, 1, 3, {}), error);
  try {
    var_space({1}, 0, 1, 3, {});
    FAIL("expected config error");
  } catch (const error& e) {
    REQUIRE(e.kind() == error_kind::config);
  }
}

TEST_CASE("base words print and parse") {
  base_word w{3, 5};
  std::string s = to_string(w);
  base_word back = parse_base_word(s);
  REQUIRE(back.len == w.len);
  REQUIRE(back.value == w.value);
  REQUIRE_THROWS_AS(parse_base_word(""), error);
  REQUIRE_THROWS_AS(parse_base_word("012"), error);
}

TEST_CASE("counter rng is a pure function of its counters") {
  counter_rng a(42), b(42), c(43);
  for (std::uint64_t t = 0; t < 8; ++t)
    for (std::uint64_t i = 0; i < 8; ++i) {
      REQUIRE(a.draw(rng_stream::var_stage, t, i) ==
              b.draw(rng_stream::var_stage, t, i));
      REQUIRE(a.draw(rng_stream::var_stage, t, i) ==
              a.draw(rng_stream::var_stage, t, i));
    }
  REQUIRE(a.draw(rng_stream::var_stage, 0, 0) !=
          c.draw(rng_stream::var_stage, 0, 0));
  REQUIRE(a.draw(rng_stream::var_stage, 0, 0) !=
          a.draw(rng_stream::block_stage, 0, 0));

  // dyadic bernoulli edge cases are exact, not approximate
  REQUIRE_FALSE(a.bernoulli_dyadic(rng_stream::var_stage, 1, 2, 0, 3));
  REQUIRE(a.bernoulli_dyadic(rng_stream::var_stage, 1, 2, 8, 3));
  for (std::uint64_t i = 0; i < 64; ++i)
    REQUIRE(a.bounded(rng_stream::family, 0, i, 5) < 5);
}

TEST_CASE("rational helpers") {
  REQUIRE(pow2(10) == 1024);
  REQUIRE(bigint_pow(bigint(3), 4) == 81);
  REQUIRE(rational_pow(rational(1, 2), 3) == rational(1, 8));
  unsigned ld = 0;
  std::uint64_t num = 0;
  REQUIRE(is_dyadic(rational(3, 8), &ld, &num));
  REQUIRE(ld == 3);
  REQUIRE(num == 3);
  REQUIRE_FALSE(is_dyadic(rational(1, 3)));
  REQUIRE(parse_rational("1/110") == rational(1, 110));
  REQUIRE(rational_to_string(rational(2, 4)) == "1/2");
  REQUIRE_THROWS_AS(parse_rational("1/0"), error);
}

TEST_CASE("single block probabilities match hand computation") {
  // two-block space so each event leaves the other block in a reference
  // state of known mass, which division then cancels
  var_space sp({1}, 1, 1, 2, {});
  REQUIRE(sp.block_count() == 2);
  REQUIRE(sp.block_size(0) == 2);

  auto with_reference = [&](const std::function<void(restriction&)>& fill) {
    restriction r(sp, polarity::normal, "rho");
    // reference block: no stars, both vars at the first-stage constant
    r.set_var(sp.block_first_var(1) + 0, 1);
    r.set_var(sp.block_first_var(1) + 1, 1);
    r.set_block(1, block_state::all_ones);
    fill(r);
    validate_event(r);
    return exact_probability(r) / rational(1, 4);
  };

  rational all_ones = with_reference([&](restriction& r) {
    r.set_var(0, 1);
    r.set_var(1, 1);
    r.set_block(0, block_state::all_ones);
  });
  REQUIRE(all_ones == rational(1, 4));

  rational zero_one_star = with_reference([&](restriction& r) {
    // the masked star already carries the block constant in the event
    r.set_var(0, 0);
    r.set_var(1, 1);
    r.set_block(0, block_state::zero_block);
  });
  REQUIRE(zero_one_star == rational(1, 8));

  rational star_one_star = with_reference([&](restriction& r) {
    r.set_var(0, var_state::star);
    r.set_var(1, 1);
    r.set_block(0, block_state::star_block);
  });
  REQUIRE(star_one_star == rational(1, 8));
}

TEST_CASE("enumeration covers the outcome space with total mass one") {
  const var_space& sp = tiny_space();
  rational total(0);
  std::uint64_t count = 0;
  std::set<std::string> seen;
  enumerate_restrictions(sp, {}, 1 << 20,
                         [&](const restriction& r, const rational& p) {
                           validate_event(r);
                           REQUIRE(p == exact_probability(r));
                           REQUIRE(p > 0);
                           total += p;
                           ++count;
                           seen.insert(restriction_to_json(r).dump());
                         });
  REQUIRE(count == 2401);
  REQUIRE(seen.size() == 2401);
  REQUIRE(total == rational(1));
}

TEST_CASE("enumeration respects its outcome budget") {
  REQUIRE_THROWS_AS(
      enumerate_restrictions(tiny_space(), {}, 100,
                             [](const restriction&, const rational&) {}),
      error);
  try {
    enumerate_restrictions(tiny_space(), {}, 100,
                           [](const restriction&, const rational&) {});
  } catch (const error& e) {
    REQUIRE(e.kind() == error_kind::budget);
  }
}

TEST_CASE("distribution overrides keep total mass one") {
  var_space sp({1}, 1, 1, 2, {});
  dist_params dist;
  dist.var_star = rational(1, 4);
  dist.block_star = rational(3, 4);
  rational total(0);
  std::uint64_t count = 0;
  enumerate_restrictions(sp, dist, 1 << 20,
                         [&](const restriction& r, const rational& p) {
                           REQUIRE(p == exact_probability(r, dist));
                           total += p;
                           ++count;
                         });
  REQUIRE(count == 49);
  REQUIRE(total == rational(1));
}

TEST_CASE("non-dyadic star probabilities are rejected") {
  dist_params dist;
  dist.var_star = rational(1, 3);
  restriction r(tiny_space(), polarity::normal, "rho");
  for (std::uint64_t v = 0; v < 8; ++v) r.set_var(v, 1);
  for (std::uint64_t b = 0; b < 4; ++b) r.set_block(b, block_state::all_ones);
  REQUIRE_THROWS_AS(exact_probability(r, dist), error);
  dist.var_star = rational(3, 2);
  REQUIRE_THROWS_AS(exact_probability(r, dist), error);
}

TEST_CASE("sampled restrictions are valid events") {
  const var_space& sp = tiny_space();
  counter_rng rng(9001);
  for (std::uint64_t t = 0; t < 100; ++t) {
    restriction r = sample_rho(sp, {}, rng, t);
    validate_event(r);
    REQUIRE(r.stage() == "rho");
    // normal polarity: zeros appear only as zero-block masks
    for (std::uint64_t v = 0; v < sp.var_count(); ++v)
      if (r.state(v) == var_state::zero)
        REQUIRE(r.bstate(sp.block_of_var(v)) == block_state::zero_block);
  }
  // identical counters reproduce the draw exactly
  counter_rng rng2(9001);
  REQUIRE(sample_rho(sp, {}, rng, 7) == sample_rho(sp, {}, rng2, 7));
}

TEST_CASE("flipped polarity mirrors the normal distribution") {
  var_space sp({1}, 1, 1, 2, {});
  restriction r(sp, polarity::flipped, "rho");
  // mirrored event: non-star vars take 0, a zero block forces its mask to 1
  r.set_var(0, 1);
  r.set_var(1, 0);
  r.set_block(0, block_state::zero_block);
  r.set_var(2, 0);
  r.set_var(3, 0);
  r.set_block(1, block_state::all_ones);
  validate_event(r);
  REQUIRE(exact_probability(r) == rational(1, 32));

  counter_rng rng(4);
  for (std::uint64_t t = 0; t < 50; ++t) {
    restriction s = sample_rho(sp, {}, rng, t, polarity::flipped);
    validate_event(s);
    // ones appear only as zero-block masks under flipped polarity
    for (std::uint64_t v = 0; v < sp.var_count(); ++v)
      if (s.state(v) == var_state::one)
        REQUIRE(s.bstate(sp.block_of_var(v)) == block_state::zero_block);
  }
}

TEST_CASE("g extension keeps one representative star per star block") {
  const var_space& sp = tiny_space();
  counter_rng rng(12);
  for (std::uint64_t t = 0; t < 200; ++t) {
    restriction rho = sample_rho(sp, {}, rng, t);
    restriction g = extend_g(rho);
    REQUIRE(g.stage() == "g");
    for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
      if (rho.bstate(b) != block_state::star_block) continue;
      std::uint64_t stars = 0;
      std::uint64_t first_star = sp.var_count();
      for (std::uint64_t v = sp.block_first_var(b);
           v < sp.block_first_var(b) + sp.block_size(b); ++v) {
        if (rho.state(v) == var_state::star && first_star == sp.var_count())
          first_star = v;
        if (g.state(v) == var_state::star) {
          ++stars;
          // the surviving star is the minimal one the draw left open
          REQUIRE(v == first_star);
        } else if (rho.state(v) == var_state::star) {
          REQUIRE(g.state(v) == var_state::one);
          REQUIRE(g.var_forced(v));
        }
      }
      REQUIRE(stars == 1);
    }
    REQUIRE(underlying_event(g) == rho);
  }
}

TEST_CASE("h extension trims surplus star blocks to an exact quota") {
  const var_space& sp = tiny_space();
  counter_rng rng(33);
  std::map<unsigned, std::uint64_t> quota{{1, 1}};
  std::uint64_t tried = 0, used = 0;
  for (std::uint64_t t = 0; tried < 400 && used < 50; ++t, ++tried) {
    restriction rho = sample_rho(sp, {}, rng, t);
    restriction g = extend_g(rho);
    bool enough = true;
    for (std::uint64_t grp = 0; grp < sp.group_count(); ++grp) {
      std::uint64_t stars = 0;
      std::uint64_t b0 = sp.group_first_block(grp);
      for (std::uint64_t b = b0; b < b0 + sp.group_size(grp); ++b)
        if (g.bstate(b) == block_state::star_block) ++stars;
      if (stars < 1) enough = false;
    }
    if (!enough) {
      REQUIRE_THROWS_AS(extend_h(g, quota), error);
      continue;
    }
    ++used;
    restriction h = extend_h(g, quota);
    REQUIRE(h.stage() == "h");
    for (std::uint64_t grp = 0; grp < sp.group_count(); ++grp) {
      std::uint64_t stars = 0;
      std::uint64_t lowest_star_block = sp.block_count();
      std::uint64_t b0 = sp.group_first_block(grp);
      for (std::uint64_t b = b0; b < b0 + sp.group_size(grp); ++b) {
        if (h.bstate(b) == block_state::star_block) {
          ++stars;
          if (lowest_star_block == sp.block_count()) lowest_star_block = b;
        }
        if (g.bstate(b) == block_state::star_block &&
            h.bstate(b) != block_state::star_block) {
          // a trimmed block turns into a forced zero block
          REQUIRE(h.bstate(b) == block_state::zero_block);
          REQUIRE(h.block_forced(b));
        }
      }
      REQUIRE(stars == 1);
      // the survivor is the lowest-index star block the group had
      std::uint64_t first_g_star = sp.block_count();
      for (std::uint64_t b = b0; b < b0 + sp.group_size(grp); ++b)
        if (g.bstate(b) == block_state::star_block) {
          first_g_star = b;
          break;
        }
      REQUIRE(lowest_star_block == first_g_star);
    }
    REQUIRE(underlying_event(h) == rho);
  }
  REQUIRE(used >= 30);
}

TEST_CASE("composition layers assignments and rejects clashes") {
  const var_space& sp = tiny_space();
  restriction base(sp, polarity::normal, "rho");
  base.set_var(0, 1);
  restriction add(sp, polarity::normal, "tau");
  add.set_var(1, 0);
  restriction both = compose(base, add);
  REQUIRE(both.value_of(0) == 1);
  REQUIRE(both.value_of(1) == 0);

  restriction clash(sp, polarity::normal, "tau");
  clash.set_var(0, 1); // same value still counts as a clash
  REQUIRE_THROWS_AS(compose(base, clash), error);

  restriction other(sp, polarity::flipped, "tau");
  REQUIRE_THROWS_AS(compose(base, other), error);

  restriction blocks(sp, polarity::normal, "sigma");
  blocks.set_block(0, block_state::star_block);
  restriction layered = compose(base, blocks);
  REQUIRE(layered.bstate(0) == block_state::star_block);
  restriction block_clash(sp, polarity::normal, "sigma");
  block_clash.set_block(0, block_state::star_block);
  REQUIRE_THROWS_AS(compose(layered, block_clash), error);
}

TEST_CASE("restriction json roundtrips drop forcing but keep the event") {
  const var_space& sp = tiny_space();
  counter_rng rng(5);
  restriction rho = sample_rho(sp, {}, rng, 3);
  restriction h = extend_h(extend_g(rho), {{1, 1}});
  njson j = restriction_to_json(h);
  restriction back = parse_restriction(sp, j);
  REQUIRE(back.stage() == h.stage());
  REQUIRE(back.pol() == h.pol());
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    REQUIRE(back.state(v) == h.state(v));
  for (std::uint64_t b = 0; b < sp.block_count(); ++b)
    REQUIRE(back.bstate(b) == h.bstate(b));

  njson bad = j;
  bad["vars"][0]["state"] = "2";
  REQUIRE_THROWS_AS(parse_restriction(sp, bad), error);
}

TEST_CASE("dnf validation enforces width, signs and known coordinates") {
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  validate_dnf(sp, f);

  dnf wide = f;
  wide.width = 1;
  REQUIRE_THROWS_AS(validate_dnf(sp, wide), error);

  dnf contradictory = f;
  contradictory.terms[0] = {literal{sp.var_at(0), true},
                            literal{sp.var_at(0), false}};
  REQUIRE_THROWS_AS(validate_dnf(sp, contradictory), error);

  dnf foreign = f;
  foreign.terms[0][0].var = var_id{base_word{2, 0}, {0, 0, 0}};
  REQUIRE_THROWS_AS(validate_dnf(sp, foreign), error);
}

TEST_CASE("dnf evaluation agrees with its dual everywhere") {
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  dnf d = dual(f);
  REQUIRE(d.kind == formula_kind::cnf);
  REQUIRE(dual(d).kind == formula_kind::dnf);
  for (std::uint64_t point = 0; point < 256; ++point) {
    std::vector<std::int8_t> bits(8);
    for (std::uint64_t v = 0; v < 8; ++v) bits[v] = (point >> v) & 1;
    bool fv = eval_dnf(sp, f, bits);
    bool dv = eval_dnf(sp, d, bits);
    REQUIRE(dv == !fv);
    REQUIRE(eval_dnf(sp, dual(d), bits) == fv);
  }
}

TEST_CASE("liveness scan finds the first undecided term and stays stable") {
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  counter_rng rng(77);
  for (std::uint64_t t = 0; t < 100; ++t) {
    restriction g = extend_g(sample_rho(sp, {}, rng, t));
    auto value = [&](std::uint64_t v) { return g.value_of(v); };
    auto live = first_live_conjunction(sp, f, value);
    if (!live) continue;
    for (std::size_t i = 0; i < live->index; ++i)
      REQUIRE(restrict_conjunction(sp, f.terms[i], value).status ==
              conj_status::killed);
    // appending terms never moves an existing first live index
    dnf longer = f;
    longer.terms.push_back(f.terms[0]);
    auto live2 = first_live_conjunction(sp, longer, value);
    REQUIRE(live2);
    REQUIRE(live2->index == live->index);
  }
}

TEST_CASE("dnf json roundtrip") {
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  njson j = dnf_to_json(f);
  dnf back = parse_dnf(sp, j);
  REQUIRE(back.width == f.width);
  REQUIRE(back.kind == f.kind);
  REQUIRE(back.terms.size() == f.terms.size());
  for (std::size_t t = 0; t < f.terms.size(); ++t)
    for (std::size_t i = 0; i < f.terms[t].size(); ++i) {
      REQUIRE(back.terms[t][i].var == f.terms[t][i].var);
      REQUIRE(back.terms[t][i].positive == f.terms[t][i].positive);
    }
}
