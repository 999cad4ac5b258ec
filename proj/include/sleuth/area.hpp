#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sleuth/formula.hpp"
#include "sleuth/grid.hpp"

namespace sleuth {

class Registry;

// The reference formula shared by every cell of a filled formula area.
struct GenericFormula {
    std::string r1c1_text;
    FormulaAst ast;  // R1C1 notation

    static GenericFormula from_ast(FormulaAst r1c1);
    static GenericFormula from_r1c1_text(std::string_view text);
    // The A1 cell formula at (row, col) converted to R1C1 at that cell.
    static GenericFormula from_a1_at(std::string_view a1_source, int row, int col);

    // A1 formula text this generic materializes to at (row, col).
    std::string a1_at(int row, int col) const;

    friend bool operator==(const GenericFormula& a, const GenericFormula& b) {
        return a.r1c1_text == b.r1c1_text;
    }
};

enum class AreaKind { FormulaArea, DataArea, GuardArea };
enum class DataKind { Numeric, Textual };

const char* to_string(AreaKind k);
const char* to_string(DataKind k);

struct Area {
    AreaExtent extent;
    AreaKind kind = AreaKind::DataArea;
    std::optional<GenericFormula> generic;  // FormulaArea only; empty if the formula does not parse
    DataKind data_kind = DataKind::Numeric;  // DataArea only

    friend bool operator==(const Area& a, const Area& b) {
        return a.extent == b.extent && a.kind == b.kind && a.generic == b.generic &&
               (a.kind != AreaKind::DataArea || a.data_kind == b.data_kind);
    }
};

// Cells (row, col) that may take part in inference.
using CellFilter = std::function<bool(int row, int col, const CellContent&)>;

// Partitions the non-blank cells of a sheet into maximal rectangles of equal
// generic formula or equal data kind, growing each right first, then down.
std::vector<Area> infer_areas(const Workbook& wb, std::string_view sheet);
std::vector<Area> infer_areas(const Workbook& wb, std::string_view sheet, const CellFilter& filter);

GenericFormula generic_formula(const Workbook& wb, const AreaExtent& extent);
GenericFormula generic_formula(const WorkbookSet& set, const AreaExtent& extent);

// Formula areas not covered by any watched extent, across the whole set.
std::vector<Area> find_unwatched_formulas(const WorkbookSet& set, const Registry& reg);

DataKind classify_data_area(const Workbook& wb, const AreaExtent& extent);

// Greedy row-major cover of a cell set by disjoint rectangles.
std::vector<AreaExtent> cover_rectangles(const std::set<GridKey>& cells, const std::string& workbook,
                                         const std::string& sheet);

}  // namespace sleuth
