#include <gtest/gtest.h>

#include <random>

#include "sleuth/error.hpp"
#include "sleuth/structural.hpp"
#include "support/models.hpp"

using namespace sleuth;
using fixtures::costs;
using fixtures::costs_cell;

namespace {

struct Grouped {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::CostIds ids;

    Grouped() {
        ids = fixtures::watch_cost_model(reg, set);
        assign_group(reg, {ids.volumes, ids.ports, ids.unit_cost, ids.year0, ids.cards}, "CardRows");
    }

    void fill_row(int volume_row, int card_row) {
        set.set_cell(costs_cell("H" + std::to_string(volume_row)), CellContent::of_number(4));
        set.set_cell(costs_cell("I" + std::to_string(volume_row)), CellContent::of_number(9));
        set.set_cell(costs_cell("D" + std::to_string(card_row)), CellContent::of_number(16));
        set.set_cell(costs_cell("E" + std::to_string(card_row)), CellContent::of_number(650));
        set.set_cell(costs_cell("G" + std::to_string(card_row)), CellContent::of_number(0));
    }
};

int error_count(WorkbookSet& set, Registry& reg) { return static_cast<int>(check_all(set, reg).error_count()); }

}  // namespace

TEST(Insert, GroupRowBelowCards) {
    Grouped g;
    EditResult res = insert_in_group(g.set, g.reg, "CardRows", 6, 1);
    EXPECT_EQ(res.events, 1u);
    EXPECT_EQ(g.reg.entry(g.ids.volumes).extent, costs("H2:I4"));
    EXPECT_EQ(g.reg.entry(g.ids.ports).extent, costs("D6:D8"));
    EXPECT_EQ(g.reg.entry(g.ids.cards).extent, costs("H6:I8"));
    EXPECT_EQ(g.set.cell(costs_cell("H8")).formula, "=ROUNDUP(H4/$D8,0)-SUM($G8:G8)");
    EXPECT_EQ(g.set.cell(costs_cell("I8")).formula, "=ROUNDUP(I4/$D8,0)-SUM($G8:H8)");
    EXPECT_EQ(g.set.cell(costs_cell("H10")).formula, "=SUMPRODUCT(H6:H9,$E6:$E9)");
    EXPECT_NE(g.reg.find_exact(costs("H9:I9")), nullptr);
    EXPECT_EQ(g.reg.find_exact(costs("H9:I9"))->status, EntryStatus::Guard);
    // The new data row is blank until filled.
    Report before = check_all(g.set, g.reg);
    EXPECT_TRUE(fixtures::has_code(before.findings, FindingCode::BlankInData));
    g.fill_row(4, 8);
    Report after = check_all(g.set, g.reg);
    EXPECT_TRUE(after.findings.empty()) << after.findings.front().message << " " << format_location(after.findings.front().location);
}

TEST(Insert, AboveAndCountAndErrors) {
    Grouped g;
    insert_in_group(g.set, g.reg, "CardRows", 5, 2, InsertSide::Before);
    EXPECT_EQ(g.reg.entry(g.ids.cards).extent, costs("H7:I10"));
    EXPECT_EQ(g.set.cell(costs_cell("H9")).formula, "=ROUNDUP(H4/$D9,0)-SUM($G9:G9)");
    EXPECT_THROW(insert_in_group(g.set, g.reg, "Nope", 5, 1), SleuthError);
    EXPECT_THROW(insert_in_group(g.set, g.reg, "CardRows", 40, 1), SleuthError);
    g.reg.set_mode(Mode::Operational);
    try {
        insert_in_group(g.set, g.reg, "CardRows", 7, 1);
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Mode);
    }
}

TEST(Insert, FailureLeavesStateUntouched) {
    Grouped g;
    WorkbookSet set_before = g.set;
    Registry reg_before = g.reg;
    EXPECT_THROW(insert_in_group(g.set, g.reg, "CardRows", 99, 1), SleuthError);
    EXPECT_EQ(g.set, set_before);
    EXPECT_EQ(g.reg, reg_before);
    EXPECT_EQ(g.reg.audit_log().size(), reg_before.audit_log().size());
}

TEST(Delete, RestoresShapeAndKeepsGuard) {
    Grouped g;
    insert_in_group(g.set, g.reg, "CardRows", 6, 1);
    delete_in_group(g.set, g.reg, "CardRows", 8, 1);
    EXPECT_EQ(g.reg.entry(g.ids.volumes).extent, costs("H2:I3"));
    EXPECT_EQ(g.reg.entry(g.ids.cards).extent, costs("H5:I6"));
    EXPECT_EQ(g.set.cell(costs_cell("H8")).formula, "=SUMPRODUCT(H5:H7,$E5:$E7)");
    EXPECT_EQ(error_count(g.set, g.reg), 0);
    EXPECT_TRUE(check_all(g.set, g.reg).findings.empty());
}

TEST(Move, SelfContainedAreaStaysClean) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    move_area(set, reg, costs("H7:I7"), costs_cell("H12"));
    EXPECT_EQ(reg.entry(ids.cost).extent, costs("H12:I12"));
    EXPECT_EQ(set.cell(costs_cell("H12")).formula, "=SUMPRODUCT(H5:H6,$E5:$E6)");
    move_area(set, reg, costs("D5:D6"), costs_cell("C5"));
    EXPECT_EQ(set.cell(costs_cell("I6")).formula, "=ROUNDUP(I3/$C6,0)-SUM($G6:H6)");
    EXPECT_TRUE(check_all(set, reg).findings.empty());
}

TEST(Move, SplitRangeRefused) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::watch_cost_model(reg, set);
    WorkbookSet before = set;
    try {
        move_area(set, reg, costs("G5:G6"), costs_cell("K5"));
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::SplitRange);
    }
    EXPECT_EQ(set, before);
}

TEST(Replicate, WholeModelBelow) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    std::vector<std::string> all{ids.volumes, ids.ports, ids.unit_cost, ids.year0, ids.cards, ids.cost};
    std::vector<CellAddr> dest;
    for (const auto& id : all) {
        CellAddr tl = reg.entry(id).extent.top_left();
        tl.row += 10;
        dest.push_back(tl);
    }
    EditResult res = replicate(set, reg, all, dest);
    EXPECT_EQ(res.touched.size(), 6u);
    EXPECT_EQ(set.cell(costs_cell("H15")).formula, "=ROUNDUP(H12/$D15,0)-SUM($G15:G15)");
    EXPECT_EQ(reg.size(), 12u);
    EXPECT_TRUE(check_all(set, reg).findings.empty());
}

TEST(Fix, RejectRestoresAcceptAdopts) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    set.set_cell(costs_cell("I6"), CellContent::of_number(3));
    check_all(set, reg);
    fix_area(set, reg, ids.cards, false);
    EXPECT_EQ(set.cell(costs_cell("I6")).formula, "=ROUNDUP(I3/$D6,0)-SUM($G6:H6)");
    EXPECT_TRUE(check_all(set, reg).findings.empty());
    EXPECT_FALSE(reg.entry(ids.cards).error_flag);

    for (const char* a1 : {"H7", "I7"}) {
        std::string f = set.cell(costs_cell(a1)).formula + "*1.1";
        set.set_cell(costs_cell(a1), CellContent::of_formula(f));
    }
    check_all(set, reg);
    EXPECT_TRUE(reg.entry(ids.cost).change_flag);
    fix_area(set, reg, ids.cost, true);
    EXPECT_FALSE(reg.entry(ids.cost).change_flag);
    EXPECT_EQ(reg.entry(ids.cost).master_generic()->r1c1_text, "=SUMPRODUCT(R[-2]C:R[-1]C,R[-2]C5:R[-1]C5)*1.1");
    EXPECT_EQ(reg.audit_log().back().verb, AuditVerb::Fix);
}

TEST(Fix, GuardRejectBlanks) {
    Grouped g;
    insert_in_group(g.set, g.reg, "CardRows", 6, 1);
    std::string guard = g.reg.find_exact(costs("H9:I9"))->id;
    g.set.set_cell(costs_cell("H9"), CellContent::of_number(5));
    fix_area(g.set, g.reg, guard, false);
    EXPECT_TRUE(g.set.cell(costs_cell("H9")).is_blank());
}

TEST(ReplicateProperty, CopiesCheckClean) {
    std::mt19937 rng(7);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    // A fully relative block: two inputs, a row-wise product and a total.
    const char* relative = "S!A1 := 2\nS!B1 := 3\nS!A2 := 4\nS!B2 := 5\n"
                           "S!C1 := =A1*B1\nS!C2 := =A2*B2\nS!C3 := =SUM(C1:C2)\n";
    for (int iter = 0; iter < 1000; ++iter) {
        WorkbookSet set;
        Registry reg = fixtures::fixed_clock_registry();
        std::vector<std::string> ids;
        int dr = 0, dc = 0;
        if (iter % 2 == 0) {
            set = fixtures::cost_model();
            auto c = fixtures::watch_cost_model(reg, set);
            ids = {c.volumes, c.ports, c.unit_cost, c.year0, c.cards, c.cost};
            dr = pick(6, 400);  // absolute columns pin the copy to the same columns
        } else {
            set.add(parse_swt(relative, "w"));
            ids.push_back(watch_area(reg, set, parse_extent("S!A1:A2", "w")).id);
            ids.push_back(watch_area(reg, set, parse_extent("S!B1:B2", "w")).id);
            ids.push_back(watch_area(reg, set, parse_extent("S!C1:C2", "w")).id);
            WatchOptions fin;
            fin.final_result = true;
            ids.push_back(watch_area(reg, set, parse_extent("S!C3", "w"), fin).id);
            if (pick(0, 1)) dr = pick(3, 300), dc = pick(0, 50);
            else dr = pick(0, 300), dc = pick(3, 50);
        }
        std::vector<CellAddr> dest;
        for (const auto& id : ids) {
            CellAddr tl = reg.entry(id).extent.top_left();
            tl.row += dr;
            tl.col += dc;
            dest.push_back(tl);
        }
        replicate(set, reg, ids, dest);
        Report r = check_all(set, reg);
        ASSERT_TRUE(r.findings.empty()) << "iter " << iter << " offset " << dr << "," << dc << ": "
                                        << r.findings.front().message;
        ASSERT_EQ(reg.size(), ids.size() * 2);
    }
}

// Inserting lines in a group and deleting the same lines restores the model
// exactly, starting from a state whose guards already exist.
TEST(InsertDeleteProperty, RoundTrip) {
    Grouped base;
    insert_in_group(base.set, base.reg, "CardRows", 6, 1);
    delete_in_group(base.set, base.reg, "CardRows", 8, 1);
    std::mt19937 rng(99);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const std::string members[] = {base.ids.volumes, base.ids.ports, base.ids.cards};
    for (int iter = 0; iter < 1000; ++iter) {
        WorkbookSet set = base.set;
        Registry reg = base.reg;
        const std::string& member = members[pick(0, 2)];
        AreaExtent pre = reg.entry(member).extent;
        int anchor = pick(pre.top, pre.bottom);
        int count = pick(1, 3);
        InsertSide side = pick(0, 1) ? InsertSide::After : InsertSide::Before;
        insert_in_group(set, reg, "CardRows", anchor, count, side);
        AreaExtent post = reg.entry(member).extent;
        ASSERT_EQ(post.height(), pre.height() + count);
        int first_new = post.top + (anchor - pre.top) + (side == InsertSide::After ? 1 : 0);
        delete_in_group(set, reg, "CardRows", first_new, count);
        ASSERT_EQ(set, base.set) << "iter " << iter << " anchor " << anchor << " count " << count;
        ASSERT_EQ(reg, base.reg) << "iter " << iter << " anchor " << anchor << " count " << count;
    }
}
