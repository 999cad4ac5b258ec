#include <gtest/gtest.h>

#include "sleuth/edit_script.hpp"
#include "sleuth/error.hpp"
#include "support/models.hpp"

using namespace sleuth;
using fixtures::costs;
using fixtures::costs_cell;

TEST(ScriptParse, VerbsOptionsAndPayload) {
    EditScript s = parse_edit_script(
        "# comment\n"
        "\n"
        "set Costs!H4 := =SUM(H2:H3)  \n"
        "INSERT-BELOW group=CardRows row=6 count=2\n"
        "REPLICATE entries=e1,e2 -> Costs!K2\n"
        "MOVE 'My Sheet'!A1:B2 -> 'My Sheet'!D1\n");
    ASSERT_EQ(s.commands.size(), 4u);
    EXPECT_EQ(s.commands[0].verb, "SET");
    EXPECT_EQ(s.commands[0].payload, "=SUM(H2:H3)");
    EXPECT_EQ(s.commands[0].line, 3);
    EXPECT_EQ(s.commands[1].options.at("group"), "CardRows");
    EXPECT_EQ(s.commands[1].options.at("count"), "2");
    EXPECT_EQ(s.commands[2].options.at("entries"), "e1,e2");
    EXPECT_EQ(s.commands[3].args.front(), "'My Sheet'!A1:B2");
}

TEST(ScriptParse, UnknownVerb) {
    try {
        parse_edit_script("SET A1 := 1\nFROB x\n");
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ScriptApply, InsertThenFillIsClean) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::watch_cost_model(reg, set);
    EditScript s = parse_edit_script(
        "GROUP CardRows ids=e1,e2,e3,e4,e5\n"
        "INSERT-BELOW group=CardRows row=6\n"
        "SET Costs!H4 := 4\n"
        "SET Costs!I4 := 9\n"
        "SET Costs!D8 := 16\n"
        "SET Costs!E8 := 650\n"
        "SET Costs!G8 := 0\n");
    ScriptOutcome out = apply_edit_script(set, reg, s);
    EXPECT_EQ(out.results.size(), 7u);
    EXPECT_GE(out.events, 2u);
    EXPECT_EQ(set.cell(costs_cell("H10")).formula, "=SUMPRODUCT(H6:H9,$E6:$E9)");
    EXPECT_TRUE(check_all(set, reg).findings.empty());
}

TEST(ScriptApply, FailingLineRollsBackEverything) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::watch_cost_model(reg, set);
    WorkbookSet set_before = set;
    Registry reg_before = reg;
    EditScript s = parse_edit_script("SET Costs!A1 := 5\nDELETE-ROWS group=Missing row=5\n");
    try {
        apply_edit_script(set, reg, s);
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_NE(std::string(e.what()).find("script line 2"), std::string::npos);
    }
    EXPECT_EQ(set, set_before);
    EXPECT_EQ(reg, reg_before);
}

TEST(ScriptApply, RawEditsAndWatch) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    apply_edit_script(set, reg,
                      parse_edit_script("RAW-INSERT-ROWS sheet=Costs at=7\n"
                                        "RAW-FILL Costs!H6 -> Costs!H7:I7\n"
                                        "SET Costs!B2 :=\n"
                                        "WATCH Costs!B3 kind=data\n"));
    EXPECT_EQ(set.cell(costs_cell("I7")).formula, "=ROUNDUP(I4/$D7,0)-SUM($G7:H7)");
    EXPECT_TRUE(set.cell(costs_cell("B2")).is_blank());
    EXPECT_NE(reg.find_exact(costs("B3")), nullptr);
    EXPECT_EQ(reg.entry(ids.cost).extent, costs("H8:I8"));
}

TEST(ScriptApply, ReplicateSingleDestinationKeepsLayout) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    apply_edit_script(set, reg,
                      parse_edit_script("REPLICATE entries=" + ids.volumes + "," + ids.ports + "," + ids.unit_cost +
                                        "," + ids.year0 + "," + ids.cards + "," + ids.cost + " -> Costs!D22\n"));
    EXPECT_EQ(set.cell(costs_cell("H25")).formula, "=ROUNDUP(H22/$D25,0)-SUM($G25:G25)");
    EXPECT_EQ(set.cell(costs_cell("I27")).formula, "=SUMPRODUCT(I25:I26,$E25:$E26)");
    EXPECT_TRUE(check_all(set, reg).findings.empty());
}

TEST(ScriptApply, OperationalRefusesStructure) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::watch_cost_model(reg, set);
    reg.set_mode(Mode::Operational);
    try {
        apply_edit_script(set, reg, parse_edit_script("WATCH Costs!B2:B3\n"));
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Mode);
    }
}
