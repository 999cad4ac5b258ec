#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "sleuth/error.hpp"
#include "sleuth/evaluator.hpp"
#include "support/models.hpp"

using namespace sleuth;
using fixtures::costs_cell;

namespace {

Value eval_in(const WorkbookSet& set, const std::string& formula) {
    return evaluate_formula(set, formula, costs_cell("Z99"));
}

double num(const WorkbookSet& set, const std::string& formula) {
    Value v = eval_in(set, formula);
    EXPECT_EQ(v.kind, Value::Kind::Number) << formula << " gave " << to_string(v);
    return v.number;
}

}  // namespace

TEST(Evaluate, CostModel) {
    WorkbookSet set = fixtures::cost_model();
    EXPECT_EQ(evaluate(set, costs_cell("H5")), Value::of_number(1));
    EXPECT_EQ(evaluate(set, costs_cell("I5")), Value::of_number(4));
    EXPECT_EQ(evaluate(set, costs_cell("H6")), Value::of_number(1));
    EXPECT_EQ(evaluate(set, costs_cell("I6")), Value::of_number(0));
    EXPECT_EQ(evaluate(set, costs_cell("H7")), Value::of_number(1300));
    EXPECT_EQ(evaluate(set, costs_cell("I7")), Value::of_number(2000));
    EXPECT_EQ(evaluate(set, costs_cell("H2")), Value::of_number(10));
    EXPECT_EQ(evaluate(set, costs_cell("Z1")).kind, Value::Kind::Blank);
}

TEST(Evaluate, Arithmetic) {
    WorkbookSet set = fixtures::cost_model();
    EXPECT_EQ(num(set, "=1+2*3"), 7);
    EXPECT_EQ(num(set, "=2^3^2"), 64);
    EXPECT_EQ(num(set, "=-2^2"), 4);
    EXPECT_EQ(num(set, "=50%"), 0.5);
    EXPECT_EQ(num(set, "=(H2+I2)/2"), 55);
    EXPECT_EQ(eval_in(set, "=1/0"), Value::of_error("#DIV/0!"));
    EXPECT_EQ(eval_in(set, "=B1+1"), Value::of_error("#VALUE!"));
    EXPECT_EQ(eval_in(set, "=\"a\"&1&TRUE"), Value::of_text("a1TRUE"));
}

TEST(Evaluate, Functions) {
    WorkbookSet set = fixtures::cost_model();
    EXPECT_EQ(num(set, "=SUM(H2:I3)"), 118);
    EXPECT_EQ(num(set, "=SUM(B1:B3,1)"), 1);
    EXPECT_EQ(num(set, "=MAX(H2:I3)"), 100);
    EXPECT_EQ(num(set, "=MIN(H2:I3,-1)"), -1);
    EXPECT_EQ(num(set, "=ROUNDUP(2.1,0)"), 3);
    EXPECT_EQ(num(set, "=ROUNDUP(-2.1,0)"), -3);
    EXPECT_EQ(num(set, "=ROUNDUP(1.234,2)"), 1.24);
    EXPECT_EQ(num(set, "=ROUNDUP(0.3/0.1,0)"), 3);
    EXPECT_EQ(num(set, "=SUMPRODUCT(D5:D6,E5:E6)"), 24 * 500 + 8 * 800);
    EXPECT_EQ(num(set, "=IF(H2>5,1,1/0)"), 1);
    EXPECT_EQ(eval_in(set, "=IF(H2<5,1)"), Value::of_boolean(false));
    EXPECT_EQ(eval_in(set, "=\"abc\"=\"ABC\""), Value::of_boolean(true));
    EXPECT_EQ(eval_in(set, "=1<\"a\""), Value::of_boolean(true));
    EXPECT_EQ(eval_in(set, "=SUM(\"x\")"), Value::of_error("#VALUE!"));
    EXPECT_EQ(eval_in(set, "=H2:I2"), Value::of_error("#VALUE!"));
}

TEST(Evaluate, Failures) {
    WorkbookSet set = fixtures::cost_model();
    try {
        eval_in(set, "=SUMPRODUCT(D5:D6,E5:E7)");
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
    try {
        eval_in(set, "=VLOOKUP(1,A1:B2,2)");
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Unsupported);
    }
    set.set_cell(costs_cell("A1"), CellContent::of_formula("=A2+1"));
    set.set_cell(costs_cell("A2"), CellContent::of_formula("=SUM(A1:A1)"));
    try {
        evaluate(set, costs_cell("A1"));
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Cycle);
    }
}

TEST(Evaluate, BlankResultShowsZero) {
    WorkbookSet set = fixtures::cost_model();
    set.set_cell(costs_cell("A1"), CellContent::of_formula("=Z50"));
    EXPECT_EQ(evaluate(set, costs_cell("A1")), Value::of_number(0));
}

// Random acyclic sheets: each cell's expected value is computed alongside
// the formula text by a plain recursive generator.
TEST(EvaluatorProperty, AgreesWithDirectComputation) {
    std::mt19937 rng(314);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    struct Expr {
        std::string text;
        double value;
    };
    for (int iter = 0; iter < 1000; ++iter) {
        WorkbookSet set;
        Workbook wb("w");
        wb.add_sheet("S");
        set.add(wb);
        const int n = pick(2, 15);
        std::vector<double> values;
        auto cell_name = [](int i) { return "A" + std::to_string(i + 1); };
        std::function<Expr(int, int)> gen = [&](int avail, int depth) -> Expr {
            int choice = depth <= 0 ? pick(0, 1) : pick(0, 8);
            if (choice == 1 && avail == 0) choice = 0;
            switch (choice) {
                case 0: {
                    int k = pick(-9, 9);
                    return {k < 0 ? "(" + std::to_string(k) + ")" : std::to_string(k), static_cast<double>(k)};
                }
                case 1: {
                    int i = pick(0, avail - 1);
                    return {cell_name(i), values[i]};
                }
                case 2: {
                    Expr a = gen(avail, depth - 1), b = gen(avail, depth - 1);
                    return {"(" + a.text + "+" + b.text + ")", a.value + b.value};
                }
                case 3: {
                    Expr a = gen(avail, depth - 1), b = gen(avail, depth - 1);
                    return {"(" + a.text + "-" + b.text + ")", a.value - b.value};
                }
                case 4: {
                    Expr a = gen(avail, depth - 1), b = gen(avail, depth - 1);
                    return {"(" + a.text + "*" + b.text + ")", a.value * b.value};
                }
                case 5: {
                    Expr a = gen(avail, depth - 1);
                    int d = pick(1, 8);
                    return {"(" + a.text + ")/" + std::to_string(d), a.value / d};
                }
                case 6: {
                    if (avail == 0) return gen(avail, 0);
                    int lo = pick(0, avail - 1), hi = pick(lo, avail - 1);
                    double s = 0;
                    for (int i = lo; i <= hi; ++i) s += values[i];
                    return {"SUM(" + cell_name(lo) + ":" + cell_name(hi) + ")", s};
                }
                case 7: {
                    Expr a = gen(avail, depth - 1), b = gen(avail, depth - 1);
                    bool mx = pick(0, 1);
                    return {std::string(mx ? "MAX(" : "MIN(") + a.text + "," + b.text + ")",
                            mx ? std::max(a.value, b.value) : std::min(a.value, b.value)};
                }
                default: {
                    Expr c1 = gen(avail, depth - 1), c2 = gen(avail, depth - 1);
                    Expr t = gen(avail, depth - 1), f = gen(avail, depth - 1);
                    return {"IF(" + c1.text + ">=" + c2.text + "," + t.text + "," + f.text + ")",
                            c1.value >= c2.value ? t.value : f.value};
                }
            }
        };
        for (int i = 0; i < n; ++i) {
            CellAddr at{"w", "S", i + 1, 1};
            if (i == 0 || pick(0, 3) == 0) {
                double v = pick(-50, 50);
                set.set_cell(at, CellContent::of_number(v));
                values.push_back(v);
            } else {
                Expr e = gen(i, 3);
                set.set_cell(at, CellContent::of_formula("=" + e.text));
                values.push_back(e.value);
            }
        }
        for (int i = 0; i < n; ++i) {
            Value v = evaluate(set, {"w", "S", i + 1, 1});
            ASSERT_EQ(v.kind, Value::Kind::Number) << set.cell({"w", "S", i + 1, 1}).formula;
            ASSERT_NEAR(v.number, values[i], 1e-9 * std::max(1.0, std::fabs(values[i])))
                << "iter " << iter << " " << set.cell({"w", "S", i + 1, 1}).formula;
        }
    }
}
