#pragma once

#include <algorithm>
#include <compare>
#include <tuple>
#include <string>
#include <string_view>

namespace sleuth {

inline constexpr int kMaxRows = 1'048'576;
inline constexpr int kMaxCols = 16'384;

// Identifier comparison is case-insensitive everywhere (sheets, names, workbooks).
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// 1 -> "A", 27 -> "AA".
std::string column_letters(int col);
// "AA" -> 27; returns 0 when not a valid column.
int column_index(std::string_view letters);

// Sheet/workbook names that need single quotes when written in a reference.
bool sheet_needs_quotes(std::string_view sheet);
std::string quote_sheet(std::string_view sheet);

enum class Axis { Row, Column };

struct CellAddr {
    std::string workbook;
    std::string sheet;
    int row = 1;
    int col = 1;

    bool valid() const { return row >= 1 && col >= 1 && row <= kMaxRows && col <= kMaxCols; }
};

bool same_sheet(const CellAddr& a, const CellAddr& b);
bool operator==(const CellAddr& a, const CellAddr& b);

// Rectangle on one sheet; bounds inclusive.
struct AreaExtent {
    std::string workbook;
    std::string sheet;
    int top = 1;
    int left = 1;
    int bottom = 1;
    int right = 1;

    static AreaExtent cell(const CellAddr& a) {
        return {a.workbook, a.sheet, a.row, a.col, a.row, a.col};
    }
    static AreaExtent span(const CellAddr& tl, const CellAddr& br) {
        return {tl.workbook, tl.sheet, tl.row, tl.col, br.row, br.col};
    }

    CellAddr top_left() const { return {workbook, sheet, top, left}; }
    CellAddr bottom_right() const { return {workbook, sheet, bottom, right}; }
    int height() const { return bottom - top + 1; }
    int width() const { return right - left + 1; }
    long long size() const { return static_cast<long long>(height()) * width(); }
    bool single_cell() const { return top == bottom && left == right; }
    bool valid() const;

    int first(Axis a) const { return a == Axis::Row ? top : left; }
    int last(Axis a) const { return a == Axis::Row ? bottom : right; }
    int extent_along(Axis a) const { return a == Axis::Row ? height() : width(); }

    bool contains(int row, int col) const {
        return row >= top && row <= bottom && col >= left && col <= right;
    }
    bool contains(const CellAddr& a) const;
    bool contains(const AreaExtent& other) const;
    bool intersects(const AreaExtent& other) const;
};

bool same_sheet(const AreaExtent& a, const AreaExtent& b);
bool operator==(const AreaExtent& a, const AreaExtent& b);
// Orders by workbook, sheet (case-insensitive), then top, left, bottom, right.
bool extent_less(const AreaExtent& a, const AreaExtent& b);

// Geometric intersection; caller must ensure same sheet and intersects().
AreaExtent intersection(const AreaExtent& a, const AreaExtent& b);

// "H5", "$H$5" style fragments.
std::string format_a1(int row, int col, bool row_abs = false, bool col_abs = false);

// Absolute location text such as `Costs!$H$5:$I$6`; the workbook is prefixed
// as `[wb]` when with_workbook is set.
std::string format_location(const AreaExtent& e, bool with_workbook = false);
std::string format_location(const CellAddr& a, bool with_workbook = false);

// Parses `Sheet!A1`, `[wb]Sheet!$A$1:$B$2` or a bare `A1:B2` (using the defaults).
AreaExtent parse_extent(std::string_view text, std::string_view default_workbook = {},
                        std::string_view default_sheet = {});
CellAddr parse_cell(std::string_view text, std::string_view default_workbook = {},
                    std::string_view default_sheet = {});

}  // namespace sleuth
