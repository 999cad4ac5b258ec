#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "sleuth/checker.hpp"
#include "sleuth/error.hpp"
#include "sleuth/registry.hpp"
#include "sleuth/structural.hpp"
#include "support/models.hpp"

using namespace sleuth;
using fixtures::costs;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const SleuthError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Usage;
}

}  // namespace

TEST(Watch, FormulaBlock) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    const WatchEntry& e = watch_area(reg, set, costs("H5:I6"));
    EXPECT_EQ(e.kind, AreaKind::FormulaArea);
    EXPECT_EQ(e.current_generic()->r1c1_text, "=ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])");
    EXPECT_EQ(e.current, e.last_watched);
    EXPECT_EQ(e.references.size(), 3u);
    EXPECT_FALSE(e.change_flag);
    EXPECT_FALSE(e.error_flag);
    ASSERT_EQ(reg.audit_log().size(), 1u);
    EXPECT_EQ(reg.audit_log()[0].verb, AuditVerb::Watch);
}

TEST(Watch, DataBlockGetsBounds) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    const WatchEntry& e = watch_area(reg, set, costs("H2:I3"));
    EXPECT_EQ(e.kind, AreaKind::DataArea);
    ASSERT_NE(e.data(), nullptr);
    EXPECT_EQ(e.data()->data_kind, DataKind::Numeric);
    ASSERT_TRUE(e.data()->bounds.has_value());
    std::vector<double> values{10, 100, 2, 6};
    EXPECT_EQ(*e.data()->bounds, compute_bounds(values));
}

TEST(Watch, Errors) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    watch_area(reg, set, costs("H5:I6"));
    EXPECT_EQ(code_of([&] { watch_area(reg, set, costs("I6:I7")); }), ErrorCode::Overlap);
    EXPECT_EQ(code_of([&] { watch_area(reg, set, costs("G6:H7")); }), ErrorCode::Overlap);
    EXPECT_EQ(code_of([&] { watch_area(reg, set, costs("G7:H7")); }), ErrorCode::NonFormulaCell);
    Registry fresh;
    EXPECT_EQ(code_of([&] { watch_area(fresh, set, costs("G6:H6")); }), ErrorCode::MixedContent);
    Registry tiny(1);
    watch_area(tiny, set, costs("D5"));
    EXPECT_EQ(code_of([&] { watch_area(tiny, set, costs("D6")); }), ErrorCode::Capacity);
}

TEST(Watch, ReferenceLimit) {
    auto formula = [](int refs) {
        std::string f = "=0";
        for (int i = 1; i <= refs; ++i) f += "+A" + std::to_string(i);
        return f;
    };
    WorkbookSet set;
    Workbook wb("w");
    wb.add_sheet("S").set(1, 2, CellContent::of_formula(formula(60)));
    wb.sheet("S").set(2, 2, CellContent::of_formula(formula(61)));
    set.add(wb);
    Registry reg;
    EXPECT_EQ(watch_area(reg, set, parse_extent("S!B1", "w")).references.size(), 60u);
    EXPECT_EQ(code_of([&] { watch_area(reg, set, parse_extent("S!B2", "w")); }), ErrorCode::ReferenceLimit);
}

TEST(Unwatch, RemovesAndPrunesGroups) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    auto a = watch_area(reg, set, costs("H5:I6")).id;
    auto b = watch_area(reg, set, costs("H2:I3")).id;
    assign_group(reg, {a, b}, "CardRows");
    unwatch(reg, a);
    EXPECT_EQ(reg.size(), 1u);
    EXPECT_EQ(reg.group("CardRows").ids, std::vector<std::string>{b});
    unwatch(reg, b);
    EXPECT_EQ(reg.size(), 0u);
    EXPECT_EQ(code_of([&] { unwatch(reg, "e99"); }), ErrorCode::UnknownId);
}

TEST(Group, ShapeRules) {
    WorkbookSet set;
    set.add(parse_swt("S!A1 := 1\nS!B1 := 1\nS!C1 := 1\nS!A3 := 1\nS!B3 := 1\nS!C3 := 1\nS!D3 := 1\n", "w"));
    Registry reg;
    auto three = watch_area(reg, set, parse_extent("S!A1:C1", "w")).id;
    auto four = watch_area(reg, set, parse_extent("S!A3:D3", "w")).id;
    assign_group(reg, {three}, "Solo");
    EXPECT_EQ(reg.group("Solo").ids.size(), 1u);
    // Inserts use one offset in every member, so a row group needs equal
    // heights and a column group equal widths.
    EXPECT_EQ(code_of([&] { assign_group(reg, {three, four}, "Bad", Axis::Column); }), ErrorCode::ShapeMismatch);
    assign_group(reg, {three, four}, "Rows", Axis::Row);
    EXPECT_EQ(reg.group("Rows").ids.size(), 2u);
    EXPECT_EQ(code_of([&] { assign_group(reg, {"e77"}, "X"); }), ErrorCode::UnknownId);
}

TEST(Group, CardBlocksOfEqualWidth) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    auto ids = fixtures::watch_cost_model(reg, set);
    assign_group(reg, {ids.volumes, ids.cards}, "CardRows");
    EXPECT_EQ(reg.group("CardRows").ids.size(), 2u);
    EXPECT_EQ(reg.entry(ids.cards).group, std::optional<std::string>("CardRows"));
}

TEST(RecordChange, Contract) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    auto id = watch_area(reg, set, costs("H5:I6")).id;
    AreaState original = reg.entry(id).current;
    EXPECT_FALSE(record_change(reg, id, original));
    EXPECT_FALSE(reg.entry(id).change_flag);
    AreaState first = GenericFormula::from_r1c1_text("=ROUNDUP(R[-3]C/RC4,0)");
    AreaState second = GenericFormula::from_r1c1_text("=R[-3]C");
    EXPECT_TRUE(record_change(reg, id, first));
    EXPECT_TRUE(reg.entry(id).change_flag);
    EXPECT_EQ(reg.entry(id).last_watched, original);
    EXPECT_TRUE(record_change(reg, id, second));
    EXPECT_EQ(reg.entry(id).current, second);
    // The master stays as watched; prior states live in the audit trail.
    EXPECT_EQ(reg.entry(id).last_watched, original);
    const auto& log = reg.audit_log();
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(entry_from_json(log[1].detail["upsert"][0]).current, first);
    // Changing back clears the flag.
    record_change(reg, id, original);
    EXPECT_FALSE(reg.entry(id).change_flag);
    EXPECT_EQ(code_of([&] { record_change(reg, "e42", first); }), ErrorCode::UnknownId);
}

TEST(Watchfile, EmptyRoundTrip) {
    Registry reg;
    Registry back = parse_watchfile(to_watchfile(reg));
    EXPECT_EQ(back, reg);
    EXPECT_EQ(back.audit_log().size(), 0u);
}

TEST(Watchfile, GroupsGuardsAndAudit) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    auto ids = fixtures::watch_cost_model(reg, set);
    assign_group(reg, {ids.volumes, ids.ports, ids.unit_cost, ids.year0, ids.cards}, "CardRows");
    insert_in_group(set, reg, "CardRows", 6, 1);
    check_all(set, reg);
    reg.set_mode(Mode::Operational);
    std::string text = to_watchfile(reg);
    Registry back = parse_watchfile(text);
    EXPECT_EQ(back, reg);
    EXPECT_EQ(back.mode(), Mode::Operational);
    EXPECT_EQ(back.audit_log().size(), reg.audit_log().size());
    EXPECT_EQ(back.next_id(), reg.next_id());
    EXPECT_EQ(to_watchfile(back), text);
    bool guard = false;
    for (const auto& [id, e] : back.entries()) guard = guard || e.kind == AreaKind::GuardArea;
    EXPECT_TRUE(guard);
}

TEST(Watchfile, VersionAndCorruption) {
    EXPECT_EQ(code_of([] { parse_watchfile("SLEUTHFILE v9\n"); }), ErrorCode::Version);
    EXPECT_EQ(code_of([] { parse_watchfile("hello\n"); }), ErrorCode::Corrupt);
    EXPECT_EQ(code_of([] { parse_watchfile("SLEUTHFILE v1\nentry {not json\n"); }), ErrorCode::Corrupt);
    EXPECT_EQ(code_of([] { load_registry("/nonexistent/dir/x.sleuth"); }), ErrorCode::Io);
}

TEST(Watchfile, SaveLoadFile) {
    auto path = std::filesystem::temp_directory_path() / "sleuth_reg_test.sleuth";
    WorkbookSet set = fixtures::cost_model();
    Registry reg = fixtures::fixed_clock_registry();
    fixtures::watch_cost_model(reg, set);
    save_registry(reg, path);
    EXPECT_EQ(load_registry(path), reg);
    std::filesystem::remove(path);
}

TEST(Audit, MonotonicTimestamps) {
    WorkbookSet set = fixtures::cost_model();
    Registry reg;
    std::int64_t t = 100;
    reg.set_clock([&t] { return t; });
    watch_area(reg, set, costs("D5:D6"));
    t = 50;  // clock stepping back must not reorder the log
    watch_area(reg, set, costs("E5:E6"));
    ASSERT_EQ(reg.audit_log().size(), 2u);
    EXPECT_LE(reg.audit_log()[0].timestamp, reg.audit_log()[1].timestamp);
}

// Random operation sequences; replaying the log rebuilds the same registry.
TEST(RegistryProperty, ReplayEqualsState) {
    std::mt19937 rng(1234);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    const char* blocks[] = {"H2:I3", "D5:D6", "E5:E6", "G5:G6", "H5:I6", "H7:I7", "D5", "E6", "H2:H3", "I2:I3"};
    for (int iter = 0; iter < 1000; ++iter) {
        WorkbookSet set = fixtures::cost_model();
        Registry reg = fixtures::fixed_clock_registry(1'700'000'000 + iter);
        int steps = 2 + pick(8);
        for (int s = 0; s < steps; ++s) {
            try {
                switch (pick(7)) {
                    case 0:
                    case 1: watch_area(reg, set, costs(blocks[pick(10)])); break;
                    case 2:
                        if (reg.size()) unwatch(reg, std::next(reg.entries().begin(), pick(reg.size()))->first);
                        break;
                    case 3: {
                        std::vector<std::string> ids;
                        for (const auto& [id, e] : reg.entries())
                            if (pick(2) && e.kind != AreaKind::GuardArea) ids.push_back(id);
                        if (!ids.empty()) assign_group(reg, ids, pick(2) ? "G1" : "G2", pick(2) ? Axis::Row : Axis::Column);
                        break;
                    }
                    case 4: check_all(set, reg); break;
                    case 5:
                        if (reg.size()) {
                            auto id = std::next(reg.entries().begin(), pick(reg.size()))->first;
                            if (reg.entry(id).is_formula())
                                record_change(reg, id, GenericFormula::from_r1c1_text("=R1C1+" + std::to_string(pick(3))));
                        }
                        break;
                    default:
                        if (reg.size()) {
                            auto id = std::next(reg.entries().begin(), pick(reg.size()))->first;
                            fix_area(set, reg, id, pick(2));
                        }
                }
            } catch (const SleuthError&) {
                // Rejected operations must leave no trace; replay still has to agree.
            }
        }
        Registry replayed = Registry::replay(reg.audit_log(), reg.capacity(), reg.mode());
        ASSERT_EQ(replayed, reg) << "iteration " << iter;
        ASSERT_EQ(parse_watchfile(to_watchfile(reg)), reg);
    }
}
