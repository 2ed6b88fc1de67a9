#include "flatcheck/qpa.hpp"
#include "flatcheck/smtlib.hpp"
#include "support/random_gen.hpp"

#include <gtest/gtest.h>

using namespace flatcheck;
using namespace flatcheck::qpa;

TEST(QpaBuild, ConstantFolding) {
    Expr x = var("x", Sort::Int);
    EXPECT_TRUE(is_int_const(add(lit(2), lit(3))));
    EXPECT_EQ(add(lit(2), lit(3))->value, 5);
    EXPECT_EQ(to_smt(add({x, lit(0)})), "x");
    EXPECT_EQ(to_smt(mul(1, x)), "x");
    EXPECT_TRUE(is_int_const(mul(0, x)));
    EXPECT_TRUE(is_true(ge(lit(3), lit(2))));
    EXPECT_TRUE(is_false(and_(tru(), fls())));
    EXPECT_TRUE(is_true(or_(ge(x, lit(0)), tru())));
    EXPECT_TRUE(is_true(implies(fls(), ge(x, lit(0)))));
    EXPECT_EQ(to_smt(ite(tru(), x, lit(1))), "x");
    EXPECT_EQ(to_smt(not_(not_(ge(x, lit(1))))), "(>= x 1)");
}

TEST(QpaBuild, SortsAreChecked) {
    Expr b = var("b", Sort::Bool), x = var("x", Sort::Int);
    EXPECT_THROW(add(b, x), Error);
    EXPECT_THROW(and_(x, b), Error);
    EXPECT_EQ(eq(b, b)->op == Op::Iff || is_true(eq(b, b)), true);
}

TEST(QpaScript, DeclarationsAreUnique) {
    QpaScript s;
    s.int_var("x");
    EXPECT_THROW(s.bool_var("x"), Error);
    EXPECT_TRUE(s.declared("x"));
    EXPECT_EQ(s.sort_of("x"), Sort::Int);
    s.assert_("f", tru());
    EXPECT_TRUE(s.assertions().empty()) << "constant true is skipped";
}

// Evaluation against direct integer arithmetic.
TEST(QpaEval, MatchesDirectArithmetic) {
    fctest::Rng rng(21);
    Expr x = var("x", Sort::Int), y = var("y", Sort::Int);
    for (int k = 0; k < 500; ++k) {
        long long a = fctest::uniform(rng, -5, 5), b = fctest::uniform(rng, -5, 5), c = fctest::uniform(rng, -9, 9);
        long long vx = fctest::uniform(rng, -20, 20), vy = fctest::uniform(rng, -20, 20);
        Expr t = add({mul(a, x), mul(b, y), lit(c)});
        Model m{{"x", Value::of(BigInt(vx))}, {"y", Value::of(BigInt(vy))}};
        long long want = a * vx + b * vy + c;
        EXPECT_EQ(evaluate(t, m).number, want);
        EXPECT_EQ(evaluate(ge(t, lit(0)), m).truth, want >= 0);
        EXPECT_EQ(evaluate(lt(t, lit(1)), m).truth, want < 1);
        EXPECT_EQ(evaluate(ite(gt(x, y), x, y), m).number, std::max(vx, vy));
        EXPECT_EQ(evaluate(iff(ge(x, lit(0)), ge(y, lit(0))), m).truth, (vx >= 0) == (vy >= 0));
    }
}

TEST(QpaEval, MissingVariableThrows) {
    EXPECT_THROW(evaluate(var("x", Sort::Int), Model{}), Error);
}

TEST(QpaSize, NodeCountAndLinearity) {
    QpaScript s;
    Expr x = s.int_var("x"), y = s.int_var("y");
    s.assert_("a", ge(add(x, y), lit(1)));
    s.assert_("b", le(mul(3, x), lit(4)));
    ScriptSize sz = script_size(s);
    EXPECT_EQ(sz.declarations, 2u);
    EXPECT_GT(sz.nodes, 0u);
    for (const auto& a : s.assertions()) EXPECT_TRUE(is_linear(a.expr));
    std::vector<std::string> vars;
    collect_vars(s.assertions()[0].expr, vars);
    std::sort(vars.begin(), vars.end());
    EXPECT_EQ(vars, (std::vector<std::string>{"x", "y"}));
}

TEST(SmtText, EmissionLayout) {
    QpaScript s;
    Expr x = s.int_var("x");
    Expr b = s.bool_var("b");
    s.metadata()["n"] = "4";
    s.assert_("fam.one", implies(b, ge(x, lit(-2))));
    std::string text = emit_smtlib(s);
    EXPECT_NE(text.find("(set-logic QF_LIA)"), std::string::npos);
    EXPECT_NE(text.find("(declare-fun x () Int)"), std::string::npos);
    EXPECT_NE(text.find("(declare-fun b () Bool)"), std::string::npos);
    EXPECT_NE(text.find("; fam.one\n(assert (=> b (>= x (- 2))))"), std::string::npos);
    EXPECT_NE(text.find("; n: 4"), std::string::npos);
    EXPECT_LT(text.find("(check-sat)"), text.find("(get-model)"));
}

TEST(SmtText, ModelParsing) {
    QpaScript s;
    s.int_var("x");
    s.int_var("y");
    s.bool_var("b");
    auto pm = parse_model(R"((
      (define-fun x () Int (- 3))
      (define-fun b () Bool true)
      (define-fun y () Int 12)
      (define-fun extra () Int 1)
    ))", s);
    EXPECT_EQ(pm.model.at("x").number, -3);
    EXPECT_EQ(pm.model.at("y").number, 12);
    EXPECT_TRUE(pm.model.at("b").truth);
    ASSERT_EQ(pm.warnings.size(), 1u);
    auto pairs = parse_model("((x 1) (y (- 2)) (b false))", s);
    EXPECT_EQ(pairs.model.at("y").number, -2);
    EXPECT_THROW(parse_model("((x 1) (b false))", s), Error);                     // y missing
    EXPECT_THROW(parse_model("((x true) (y 1) (b false))", s), Error);             // wrong sort
    EXPECT_THROW(parse_model("((define-fun x () Int 1)", s), Error);               // unbalanced
}
