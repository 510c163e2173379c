#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "pdyn/expr.hpp"

using namespace pdyn;

TEST_CASE("parsing the canonical family") {
  ExprPtr e = parse("exp(z + 1/z)");
  REQUIRE(e->kind == ExprKind::Exp);
  REQUIRE(e->a->kind == ExprKind::Add);
  CHECK(e->a->a->kind == ExprKind::Var);
  REQUIRE(e->a->b->kind == ExprKind::Div);
  CHECK(e->a->b->a->kind == ExprKind::Lit);
  CHECK(e->a->b->a->lit_value == 1.0);
  CHECK(e->a->b->b->kind == ExprKind::Var);
}

TEST_CASE("power binds tighter than multiplication") {
  ExprPtr e = parse("z^2*exp(z)");
  REQUIRE(e->kind == ExprKind::Mul);
  REQUIRE(e->a->kind == ExprKind::Pow);
  CHECK(e->a->pow_exponent == 2);
  CHECK(e->a->a->kind == ExprKind::Var);
  CHECK(e->b->kind == ExprKind::Exp);
}

TEST_CASE("nested exponentials") {
  ExprPtr e = parse("exp(exp(1/z) + z)");
  REQUIRE(e->kind == ExprKind::Exp);
  REQUIRE(e->a->kind == ExprKind::Add);
  REQUIRE(e->a->a->kind == ExprKind::Exp);
  CHECK(e->a->a->a->kind == ExprKind::Div);
  CHECK(e->a->b->kind == ExprKind::Var);
}

TEST_CASE("unary minus sits between power and product") {
  ExprPtr e = parse("-z^2");
  REQUIRE(e->kind == ExprKind::Neg);
  CHECK(e->a->kind == ExprKind::Pow);
  ExprPtr f = parse("-z*2");
  REQUIRE(f->kind == ExprKind::Mul);
  CHECK(f->a->kind == ExprKind::Neg);
}

TEST_CASE("canonical formatting") {
  CHECK(format(*make_exp(make_var())) == "exp(z)");
  CHECK(format(*make_pow(make_var(), -1)) == "z^-1");
  CHECK(format(*parse("exp(z + 1/z)")) == "exp(z+1/z)");
  CHECK(format(*make_lit(1.0, true)) == "i");
  CHECK(format(*make_lit(2.5, true)) == "2.5i");
  CHECK(format(*make_neg(make_mul(make_var(), make_lit(2)))) == "-(z*2)");
}

TEST_CASE("positioned syntax errors with expectations") {
  SUBCASE("non-integer exponent") {
    try {
      parse("z^2.5");
      FAIL("expected parse error");
    } catch (const parse_error& e) {
      CHECK(e.offset() == 2);
      REQUIRE(!e.expected().empty());
      CHECK(e.expected()[0] == "integer");
    }
  }
  SUBCASE("identifier exponent") {
    CHECK_THROWS_AS(parse("z^w"), parse_error);
  }
  SUBCASE("exponent magnitude cap") {
    CHECK_THROWS_AS(parse("z^65"), parse_error);
    CHECK_NOTHROW(parse("z^64"));
    CHECK_NOTHROW(parse("z^-64"));
  }
  SUBCASE("unknown identifier") {
    try {
      parse("exp(w)");
      FAIL("expected parse error");
    } catch (const parse_error& e) {
      CHECK(e.offset() == 4);
    }
  }
  SUBCASE("unbalanced parentheses") {
    try {
      parse("exp(z");
      FAIL("expected parse error");
    } catch (const parse_error& e) {
      CHECK(e.offset() == 5);
      CHECK(e.expected()[0] == "')'");
    }
  }
  SUBCASE("trailing garbage") {
    CHECK_THROWS_AS(parse("z )"), parse_error);
  }
}

TEST_CASE("shipped corpus round-trips") {
  std::ifstream in(PDYN_DATA_DIR "/expr_corpus.txt");
  REQUIRE(in.good());
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++count;
    CAPTURE(line);
    ExprPtr e = parse(line);
    std::string canon = format(*e);
    ExprPtr again = parse(canon);
    CHECK(structurally_equal(*e, *again));
    CHECK(format(*again) == canon);
  }
  CHECK(count == 50);
}

namespace {

ExprPtr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 8);
  switch (pick(rng)) {
    case 0:
      return make_var();
    case 1: {
      std::uniform_real_distribution<double> u(0.0, 100.0);
      std::uniform_int_distribution<int> imag(0, 1);
      double v = u(rng);
      // exercise integer-looking and fractional literals
      if (imag(rng)) v = std::floor(v);
      return make_lit(v, imag(rng) == 1);
    }
    case 2:
      return make_neg(random_tree(rng, depth - 1));
    case 3:
      return make_add(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4:
      return make_sub(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5:
      return make_mul(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 6:
      return make_div(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 7: {
      std::uniform_int_distribution<int> k(-64, 64);
      return make_pow(random_tree(rng, depth - 1), k(rng));
    }
    default:
      return make_exp(random_tree(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("format/parse round-trip holds on random trees") {
  std::mt19937_64 rng(20260810);
  for (int i = 0; i < 2000; ++i) {
    ExprPtr e = random_tree(rng, 8);
    std::string text = format(*e);
    CAPTURE(text);
    ExprPtr back = parse(text);
    CHECK(structurally_equal(*e, *back));
  }
}

TEST_CASE("canonical family builder") {
  SUBCASE("exp(z + 1/z)") {
    RadstromSpec spec{0, {cplx(0, 0), cplx(1, 0)}, {cplx(0, 0), cplx(1, 0)}};
    ExprPtr e = radstrom(spec);
    CHECK(format(*e) == "exp(z+1/z)");
    CHECK(structurally_equal(*e, *parse("exp(z + 1/z)")));
  }
  SUBCASE("z^2*exp(z)") {
    RadstromSpec spec{2, {cplx(0, 0), cplx(1, 0)}, {}};
    CHECK(format(*radstrom(spec)) == "z^2*exp(z)");
  }
  SUBCASE("k = 1 uses a bare factor") {
    RadstromSpec spec{1, {cplx(0, 0), cplx(1, 0)}, {}};
    CHECK(format(*radstrom(spec)) == "z*exp(z)");
  }
  SUBCASE("complex coefficients expand through operators") {
    RadstromSpec spec{0, {cplx(0, 0), cplx(1, 2)}, {}};
    ExprPtr e = radstrom(spec);
    CHECK(format(*e) == "exp((1+2i)*z)");
    CHECK(structurally_equal(*e, *parse(format(*e))));
  }
  SUBCASE("both constant is rejected") {
    RadstromSpec spec{3, {cplx(1, 0)}, {cplx(2, 0)}};
    CHECK_THROWS_AS(radstrom(spec), precondition_error);
  }
}
