#include <gtest/gtest.h>

#include <random>

#include "sleuth/area.hpp"
#include "sleuth/error.hpp"
#include "sleuth/formula.hpp"
#include "sleuth/host_edits.hpp"

using namespace sleuth;

namespace {

std::vector<std::string> ref_texts(std::string_view src) {
    std::vector<std::string> out;
    for (const auto& r : extract_references(parse(src))) out.push_back(render_reference(r, Notation::A1));
    return out;
}

}  // namespace

TEST(Parse, CardFormula) {
    FormulaAst ast = parse("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)");
    ASSERT_EQ(ast.root.kind, NodeKind::Binary);
    EXPECT_EQ(ast.root.text, "-");
    EXPECT_EQ(ast.root.args[0].kind, NodeKind::Call);
    EXPECT_EQ(ast.root.args[0].text, "ROUNDUP");
    EXPECT_EQ(ast.root.args[1].text, "SUM");
    EXPECT_EQ(ref_texts("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)"), (std::vector<std::string>{"H2", "$D5", "$G5:G5"}));
}

TEST(Parse, ArithmeticHasNoReferences) {
    FormulaAst ast = parse("=1+2");
    EXPECT_EQ(ast.root.kind, NodeKind::Binary);
    EXPECT_TRUE(extract_references(ast).empty());
}

TEST(Parse, NestedCalls) {
    EXPECT_EQ(ref_texts("=MAX(0,J7-SUM($N7:P7))"), (std::vector<std::string>{"J7", "$N7:P7"}));
    EXPECT_EQ(ref_texts("=Q4*Qty_Model_5!I7"), (std::vector<std::string>{"Q4", "Qty_Model_5!I7"}));
    EXPECT_EQ(ref_texts("=SUM(H17:H19)"), (std::vector<std::string>{"H17:H19"}));
}

TEST(Parse, Precedence) {
    EXPECT_EQ(render(parse("=1+2*3^2")), "=1+2*3^2");
    FormulaAst a = parse("=1+2*3");
    EXPECT_EQ(a.root.text, "+");
    FormulaAst b = parse("=\"a\"&1+2");
    EXPECT_EQ(b.root.text, "&");
    FormulaAst c = parse("=1&2=3");
    EXPECT_EQ(c.root.text, "=");
    FormulaAst d = parse("=-2^2");
    EXPECT_EQ(d.root.text, "^");  // unary minus binds tighter than ^
    FormulaAst e = parse("=50%*2");
    EXPECT_EQ(e.root.text, "*");
    EXPECT_EQ(e.root.args[0].kind, NodeKind::Percent);
}

TEST(Parse, QualifiersAndNames) {
    auto refs = extract_references(parse("=[other]'My Sheet'!$A$1+PortsPerCard+Costs!B2:C3"));
    ASSERT_EQ(refs.size(), 3u);
    EXPECT_EQ(*refs[0].workbook, "other");
    EXPECT_EQ(*refs[0].sheet, "My Sheet");
    EXPECT_TRUE(refs[0].fully_absolute());
    EXPECT_EQ(refs[1].kind, RefKind::Name);
    EXPECT_EQ(refs[1].name, "PortsPerCard");
    EXPECT_EQ(refs[2].kind, RefKind::Range);
}

TEST(Parse, CaseInsensitiveInput) {
    EXPECT_EQ(render(parse("=sum(a1:b2)")), "=SUM(A1:B2)");
    EXPECT_EQ(render(parse("= 1 + sum( a1 , 2 )")), "=1+SUM(A1,2)");
}

TEST(Parse, Errors) {
    EXPECT_THROW(parse("=SUM(A1"), ParseError);
    EXPECT_THROW(parse("=1+"), ParseError);
    EXPECT_THROW(parse("=(1))"), ParseError);
    EXPECT_THROW(parse("=\"abc"), ParseError);
    try {
        parse("=1+*2");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 3u);
    }
}

TEST(Parse, BareExpressionAndLiterals) {
    EXPECT_EQ(render(parse("1+2")), "=1+2");
    EXPECT_EQ(render(parse("=0")), "=0");
    EXPECT_EQ(render(parse("=TRUE")), "=TRUE");
    EXPECT_EQ(render(parse("=#REF!+1")), "=#REF!+1");
    EXPECT_EQ(render(parse("=\"say \"\"x\"\"\"")), "=\"say \"\"x\"\"\"");
}

TEST(Notation, CardFormulaToR1C1) {
    EXPECT_EQ(a1_text_to_r1c1("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)", 5, 8), "=ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])");
    EXPECT_EQ(a1_text_to_r1c1("=1+2", 40, 40), "=1+2");
    EXPECT_EQ(a1_text_to_r1c1("=$A$1", 99, 26), "=R1C1");
}

TEST(Notation, R1C1ToA1) {
    EXPECT_EQ(render(r1c1_to_a1(parse("=R[-3]C/RC4", Notation::R1C1), 5, 8)), "=H2/$D5");
    EXPECT_EQ(render(r1c1_to_a1(parse("=R1C1", Notation::R1C1), 300, 30)), "=$A$1");
    EXPECT_THROW(r1c1_to_a1(parse("=RC[-1]", Notation::R1C1), 1, 1), SleuthError);
}

TEST(Notation, R1C1ParseAndRender) {
    FormulaAst a = parse("=SUM(R[-2]C:R[-1]C,R2C[3])*Sheet2!RC", Notation::R1C1);
    EXPECT_EQ(render(a), "=SUM(R[-2]C:R[-1]C,R2C[3])*Sheet2!RC");
}

TEST(Breakdown, TraceRows) {
    std::string src = "=MAX(0,J7-SUM($N7:P7))";
    auto rows = breakdown(parse(src), src);
    ASSERT_EQ(rows.size(), 5u);
    std::vector<std::string> types, values;
    std::vector<int> levels;
    for (const auto& r : rows) {
        types.push_back(r.ref_type);
        levels.push_back(r.nesting_level);
        values.push_back(r.value_text);
    }
    EXPECT_EQ(types, (std::vector<std::string>{"Worksheet Function", "Number", "Relative Single Cell",
                                               "Worksheet Function", "Mixed Range"}));
    EXPECT_EQ(levels, (std::vector<int>{0, 1, 1, 1, 2}));
    EXPECT_EQ(values[1], "0");
    EXPECT_EQ(values[2], "J7");
    EXPECT_EQ(values[4], "$N7:P7");
}

TEST(Breakdown, OffSheetAndSingleNumber) {
    std::string src = "=Q4*Qty_Model_5!I7";
    auto rows = breakdown(parse(src), src);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].ref_type, "Relative Single Cell");
    EXPECT_EQ(rows[1].ref_type, "Off Sheet, Relative Single Cell");
    EXPECT_EQ(rows[1].value_text, "Qty_Model_5!I7");
    auto one = breakdown(parse("=1"), "=1");
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].ref_type, "Number");
    EXPECT_EQ(one[0].nesting_level, 0);
}

TEST(Breakdown, GroupingParenthesesCount) {
    std::string src = "=(A1+(B2))";
    auto rows = breakdown(parse(src), src);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].nesting_level, 1);
    EXPECT_EQ(rows[1].nesting_level, 2);
}

// ---- randomized suites ----

namespace {

struct FormulaGen {
    std::mt19937 rng;
    explicit FormulaGen(unsigned seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    std::string cell() {
        int row = 1 + pick(200), col = 1 + pick(60);
        return format_a1(row, col, pick(2), pick(2));
    }

    std::string reference() {
        std::string q;
        switch (pick(6)) {
            case 0: q = "Data!"; break;
            case 1: q = "'Two Words'!"; break;
            case 2: q = "[other]Costs!"; break;
            default: break;
        }
        switch (pick(4)) {
            case 0: return q + cell() + ":" + cell();
            case 1: return pick(2) ? "PortsPerCard" : "rate_2";
            default: return q + cell();
        }
    }

    std::string leaf() {
        switch (pick(7)) {
            case 0: return std::to_string(pick(1000));
            case 1: return std::to_string(pick(100)) + "." + std::to_string(1 + pick(9));
            case 2: return "\"t" + std::to_string(pick(10)) + "\"";
            case 3: return pick(2) ? "TRUE" : "FALSE";
            default: return reference();
        }
    }

    std::string expr(int depth) {
        if (depth <= 0) return leaf();
        static const char* ops[] = {"+", "-", "*", "/", "^", "&", "=", "<>", "<=", ">"};
        static const char* fns[] = {"SUM", "MAX", "MIN", "ROUNDUP", "IF", "SUMPRODUCT", "VLOOKUP"};
        switch (pick(6)) {
            case 0: return expr(depth - 1) + ops[pick(10)] + expr(depth - 1);
            case 1: {
                std::string s = std::string(fns[pick(7)]) + "(";
                int n = 1 + pick(3);
                for (int i = 0; i < n; ++i) s += (i ? "," : "") + expr(depth - 1);
                return s + ")";
            }
            case 2: return "(" + expr(depth - 1) + ")";
            case 3: return "-" + expr(depth - 1);
            case 4: return leaf() + "%";
            default: return leaf();
        }
    }
};

std::size_t leaves_and_calls(const Node& n) {
    std::size_t count = 0;
    visit_nodes(n, [&](const Node& x) {
        if (x.kind == NodeKind::Call || x.args.empty()) ++count;
    });
    return count;
}

}  // namespace

TEST(FormulaProperty, ParseRenderRoundTrip) {
    FormulaGen gen(7);
    for (int i = 0; i < 1500; ++i) {
        std::string src = "=" + gen.expr(1 + i % 4);
        FormulaAst ast = parse(src);
        std::string text = render(ast);
        FormulaAst again = parse(text);
        ASSERT_EQ(again, ast) << src << " -> " << text;
        ASSERT_EQ(render(again), text);
    }
}

TEST(FormulaProperty, BreakdownCountsLeavesAndCalls) {
    FormulaGen gen(8);
    for (int i = 0; i < 1000; ++i) {
        std::string src = "=" + gen.expr(1 + i % 4);
        FormulaAst ast = parse(src);
        // Grouping parentheses and operators are not rows; a Paren node is not a leaf.
        std::size_t expected = 0;
        visit_nodes(ast.root, [&](const Node& x) {
            if (x.kind == NodeKind::Call || (x.args.empty() && x.kind != NodeKind::Paren)) ++expected;
        });
        ASSERT_EQ(breakdown(ast, src).size(), expected) << src;
        ASSERT_GE(leaves_and_calls(ast.root), expected);
    }
}

TEST(FormulaProperty, A1R1C1RoundTrip) {
    FormulaGen gen(9);
    int checked = 0;
    for (int i = 0; i < 1500; ++i) {
        std::string src = "=" + gen.expr(1 + i % 3);
        FormulaAst a1 = parse(src);
        int row = 1 + gen.pick(300), col = 1 + gen.pick(80);
        FormulaAst r1c1;
        try {
            r1c1 = a1_to_r1c1(a1, row, col);
        } catch (const SleuthError&) {
            continue;
        }
        ASSERT_EQ(r1c1_to_a1(r1c1, row, col), a1) << src;
        // The R1C1 text reparses to the same tree.
        ASSERT_EQ(parse(render(r1c1), Notation::R1C1), r1c1) << render(r1c1);
        ++checked;
    }
    EXPECT_GE(checked, 1000);
}

TEST(FormulaProperty, FillTranslatesShareGeneric) {
    FormulaGen gen(10);
    int checked = 0;
    for (int i = 0; i < 1500; ++i) {
        std::string src = "=" + gen.expr(1 + i % 3);
        int r0 = 100 + gen.pick(50), c0 = 30 + gen.pick(20);
        int r1 = r0 + gen.pick(30) - 15, c1 = c0 + gen.pick(20) - 10;
        std::string moved = translate_formula(src, r0, c0, r1, c1);
        if (moved.find("#REF!") != std::string::npos) continue;
        ASSERT_EQ(a1_text_to_r1c1(src, r0, c0), a1_text_to_r1c1(moved, r1, c1)) << src << " vs " << moved;
        ++checked;
    }
    EXPECT_GE(checked, 1000);
}
