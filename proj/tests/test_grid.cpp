#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "sleuth/error.hpp"
#include "sleuth/grid.hpp"
#include "support/models.hpp"

using namespace sleuth;

TEST(Swt, SingleNumberRecord) {
    Workbook wb = parse_swt("Costs!D5 := 24\n", "m");
    const CellContent& c = wb.sheet("Costs").get(5, 4);
    EXPECT_EQ(c.kind, CellKind::Number);
    EXPECT_EQ(c.number, 24);
}

TEST(Swt, FormulaRecordKeepsSource) {
    Workbook wb = parse_swt("Costs!H5 := =ROUNDUP(H2/$D5,0)-SUM($G5:G5)\n", "m");
    EXPECT_EQ(wb.sheet("costs").get(5, 8).formula, "=ROUNDUP(H2/$D5,0)-SUM($G5:G5)");
}

TEST(Swt, EmptyFileHasNoSheets) {
    Workbook wb = parse_swt("", "m");
    EXPECT_TRUE(wb.sheets().empty());
    EXPECT_EQ(to_swt(wb), "");
}

TEST(Swt, StringEscapingAndQuotedSheets) {
    Workbook wb("m");
    wb.add_sheet("My Sheet").set(1, 1, CellContent::of_text("say \"hi\""));
    wb.sheet("My Sheet").set(2, 1, CellContent::of_text(""));
    std::string text = to_swt(wb);
    EXPECT_NE(text.find("'My Sheet'!A1 := \"say \"\"hi\"\"\""), std::string::npos);
    Workbook back = parse_swt(text, "m");
    EXPECT_EQ(back, wb);
    EXPECT_EQ(back.sheet("my sheet").get(2, 1).kind, CellKind::Text);
}

TEST(Swt, ErrorsCarryLineNumbers) {
    try {
        parse_swt("# c\nCosts!A1 := 1\nCosts!A1 := 2\n", "m");
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateCell);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    try {
        parse_swt("Costs!A1 = 1\n", "m");
        FAIL();
    } catch (const SleuthError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(Swt, CostModelRoundTripsVerbatim) {
    WorkbookSet set = fixtures::cost_model();
    const Workbook& wb = set.get("model");
    Workbook back = parse_swt(to_swt(wb), "model");
    EXPECT_EQ(back, wb);
    EXPECT_EQ(to_swt(back), to_swt(wb));
    EXPECT_NE(to_swt(wb).find("Costs!I5 := =ROUNDUP(I2/$D5,0)-SUM($G5:H5)"), std::string::npos);
}

TEST(Swt, NamesRoundTrip) {
    Workbook wb = parse_swt("@name PortsPerCard := Costs!$D$5:$D$6\nCosts!D5 := 24\n", "m");
    AreaExtent e = resolve_name(wb, "portspercard");
    EXPECT_EQ(e.top, 5);
    EXPECT_EQ(e.bottom, 6);
    EXPECT_EQ(e.left, 4);
    EXPECT_EQ(parse_swt(to_swt(wb), "m"), wb);
    EXPECT_THROW(resolve_name(wb, "Nope"), SleuthError);
}

TEST(Grid, SparseReadsAreBlank) {
    Workbook wb("m");
    Sheet& s = wb.add_sheet("S");
    EXPECT_TRUE(s.get(1000, 1000).is_blank());
    s.set(3, 3, CellContent::of_number(0));
    s.set(3, 3, CellContent::blank());
    EXPECT_EQ(s.size(), 0u);
    EXPECT_THROW(wb.add_sheet("s"), SleuthError);
}

TEST(Csv, IngestKinds) {
    Workbook wb = ingest_csv_text("10,100\n=SUM(A1:B1),Year 1,\n", "S", Workbook("m"));
    const Sheet& s = wb.sheet("S");
    EXPECT_EQ(s.get(1, 1).number, 10);
    EXPECT_EQ(s.get(1, 2).number, 100);
    EXPECT_EQ(s.get(2, 1).formula, "=SUM(A1:B1)");
    EXPECT_EQ(s.get(2, 2).text, "Year 1");
    EXPECT_TRUE(s.get(2, 3).is_blank());
    EXPECT_THROW(ingest_csv_text("1", "S", wb), SleuthError);
}

TEST(Csv, QuotedFields) {
    Workbook wb = ingest_csv_text("\"a,b\",\"x\"\"y\"\n", "S", Workbook("m"));
    EXPECT_EQ(wb.sheet("S").get(1, 1).text, "a,b");
    EXPECT_EQ(wb.sheet("S").get(1, 2).text, "x\"y");
}

TEST(WorkbookSetIo, DirectoryRoundTrip) {
    auto dir = std::filesystem::temp_directory_path() / "sleuth_grid_set";
    std::filesystem::remove_all(dir);
    WorkbookSet set = fixtures::cost_model();
    Workbook other("second");
    other.add_sheet("Data").set(1, 1, CellContent::of_formula("=[model]Costs!H7"));
    set.add(other);
    save_workbook_set(set, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "model.swt"));
    EXPECT_EQ(load_workbook_set(dir), set);
    std::filesystem::remove_all(dir);
}

// Randomized sparse grids survive save/load and save canonically.
TEST(SwtProperty, RandomRoundTrip) {
    std::mt19937 rng(20080226);
    std::uniform_int_distribution<int> coord(1, 60), kind(0, 3), len(0, 6);
    const std::string alphabet = "ab \"'!:=,;xyz";
    for (int iter = 0; iter < 1000; ++iter) {
        Workbook wb("w");
        int sheets = 1 + iter % 3;
        for (int s = 0; s < sheets; ++s) {
            Sheet& sh = wb.add_sheet(s == 1 ? "Two Words" : "S" + std::to_string(s));
            int cells = iter % 17;
            for (int c = 0; c < cells; ++c) {
                int r = coord(rng), col = coord(rng);
                switch (kind(rng)) {
                    case 0: sh.set(r, col, CellContent::of_number(std::uniform_real_distribution<>(-1e6, 1e6)(rng))); break;
                    case 1: {
                        std::string t;
                        for (int i = len(rng); i > 0; --i) t += alphabet[rng() % alphabet.size()];
                        sh.set(r, col, CellContent::of_text(t));
                        break;
                    }
                    case 2: sh.set(r, col, CellContent::of_formula("=A1+" + std::to_string(r))); break;
                    default: sh.set(r, col, CellContent::of_number(static_cast<double>(col)));
                }
            }
        }
        std::string text = to_swt(wb);
        Workbook back = parse_swt(text, "w");
        ASSERT_EQ(back, wb) << text;
        ASSERT_EQ(to_swt(back), text);
    }
}
