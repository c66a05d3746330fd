#include <catch2/catch_amalgamated.hpp>

#include "pelcr/oracle.hpp"
#include "pelcr/term.hpp"

using namespace pelcr;

TEST_CASE("Krivine application nests to the right") {
  TermPtr t = parse_term("(\\f \\x (f)(f)x) \\x x");
  REQUIRE(t->kind == Term::Kind::App);
  const TermPtr& two = t->left;
  REQUIRE(two->kind == Term::Kind::Abs);
  REQUIRE(two->name == "f");
  const TermPtr& body = two->left->left;  // under \f \x
  REQUIRE(body->kind == Term::Kind::App);
  CHECK(body->left->kind == Term::Kind::Var);   // f
  CHECK(body->left->name == "f");
  REQUIRE(body->right->kind == Term::Kind::App);  // (f)x
  CHECK(body->right->left->name == "f");
  CHECK(body->right->right->name == "x");
  CHECK(t->right->kind == Term::Kind::Abs);
  CHECK(alpha_equal(t->right, parse_term("\\y y")));
}

TEST_CASE("integers expand to Church numerals") {
  CHECK(alpha_equal(parse_term("2"), parse_term("\\f \\x (f)(f)x")));
  CHECK(alpha_equal(parse_term("0"), parse_term("\\f \\x x")));
  CHECK(alpha_equal(church(3), parse_term("\\g \\y (g)(g)(g)y")));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_term("\\x"), TermParseError);
  CHECK_THROWS_AS(parse_term("(x"), TermParseError);
  CHECK_THROWS_AS(parse_term(""), TermParseError);
  CHECK_THROWS_AS(parse_term("\\x x)"), TermParseError);
}

TEST_CASE("unbound names are rejected unless declared free") {
  CHECK_THROWS_AS(parse_term("x"), TermParseError);
  CHECK_NOTHROW(parse_term("x", {"x"}));
  CHECK_NOTHROW(parse_term("\\y (y)x", {"x"}));
  CHECK_THROWS_AS(parse_term("\\y (y)z", {"x"}), TermParseError);
}

TEST_CASE("lambda with UTF-8 syntax and optional dot") {
  CHECK(alpha_equal(parse_term("λx.x"), parse_term("\\x x")));
  CHECK(alpha_equal(parse_term("λf.λx.(f)x"), parse_term("\\f \\x (f)x")));
}

TEST_CASE("beta oracle") {
  CHECK(alpha_equal(beta_normal_form(parse_term("(\\f \\x (f)(f)x) \\x x")),
                    parse_term("\\x x")));
  CHECK(alpha_equal(beta_normal_form(parse_term("(2)(2)")), church(4)));
  TermPtr omega = parse_term("(\\x (x)x) \\x (x)x");
  CHECK_THROWS_AS(beta_normal_form(omega, 100), FuelExhausted);
}

TEST_CASE("capture-avoiding substitution") {
  // (\x \y (x)y) y  ->  \y' (y)y'
  TermPtr t = parse_term("((\\x \\y (x)y) y)", {"y"});
  TermPtr nf = beta_normal_form(t);
  REQUIRE(nf->kind == Term::Kind::Abs);
  CHECK(nf->left->kind == Term::Kind::App);
  CHECK(nf->left->left->name == "y");       // the free y
  CHECK(nf->left->left->name != nf->name);  // binder renamed away from it
}

TEST_CASE("DD terms parse and the small ones reduce") {
  std::string dd2 = "(\\x (x)x)(\\x (x)x)2";
  TermPtr t = parse_term(dd2);
  // (delta)(delta)2 = delta(delta(2)); delta(2) = (2)2 = 4; delta(4) = (4)4.
  REQUIRE(t->kind == Term::Kind::App);
  REQUIRE(t->right->kind == Term::Kind::App);
  TermPtr nf = beta_normal_form(t, 1000000);
  CHECK(alpha_equal(nf, church(256)));
}
