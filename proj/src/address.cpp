#include "sleuth/address.hpp"

#include <cctype>

#include "sleuth/error.hpp"
#include "sleuth/formula.hpp"

namespace sleuth {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse: return "parse";
        case ErrorCode::DuplicateCell: return "duplicate-cell";
        case ErrorCode::Io: return "io";
        case ErrorCode::UnknownName: return "unknown-name";
        case ErrorCode::UnknownSheet: return "unknown-sheet";
        case ErrorCode::SheetExists: return "sheet-exists";
        case ErrorCode::OutOfGrid: return "out-of-grid";
        case ErrorCode::NotUniform: return "not-uniform";
        case ErrorCode::NonFormulaCell: return "non-formula-cell";
        case ErrorCode::Unclassifiable: return "unclassifiable";
        case ErrorCode::Overlap: return "overlap";
        case ErrorCode::Capacity: return "capacity-exceeded";
        case ErrorCode::ReferenceLimit: return "reference-limit";
        case ErrorCode::MixedContent: return "mixed-content";
        case ErrorCode::UnknownId: return "unknown-id";
        case ErrorCode::ShapeMismatch: return "shape-incompatible";
        case ErrorCode::UnknownGroup: return "unknown-group";
        case ErrorCode::AnchorOutside: return "anchor-outside";
        case ErrorCode::WouldEmpty: return "would-empty-area";
        case ErrorCode::GuardDeletion: return "guard-deletion";
        case ErrorCode::DestinationCollision: return "destination-collision";
        case ErrorCode::UnwatchedSource: return "unwatched-source";
        case ErrorCode::SplitRange: return "split-range";
        case ErrorCode::Irreparable: return "irreparable";
        case ErrorCode::Mode: return "mode";
        case ErrorCode::Version: return "version-mismatch";
        case ErrorCode::Corrupt: return "corrupt-file";
        case ErrorCode::Locked: return "locked";
        case ErrorCode::Usage: return "usage";
        case ErrorCode::Cycle: return "cycle";
        case ErrorCode::Unsupported: return "unsupported";
    }
    return "unknown";
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

std::string column_letters(int col) {
    std::string out;
    while (col > 0) {
        int rem = (col - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        col = (col - 1) / 26;
    }
    return out;
}

int column_index(std::string_view letters) {
    if (letters.empty() || letters.size() > 3) return 0;
    int col = 0;
    for (char c : letters) {
        if (!std::isalpha(static_cast<unsigned char>(c))) return 0;
        col = col * 26 + (std::toupper(static_cast<unsigned char>(c)) - 'A' + 1);
    }
    return col <= kMaxCols ? col : 0;
}

bool sheet_needs_quotes(std::string_view sheet) {
    if (sheet.empty()) return true;
    if (!std::isalpha(static_cast<unsigned char>(sheet[0])) && sheet[0] != '_') return true;
    for (char c : sheet)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return true;
    // A bare name that reads as a cell or R1C1 reference would be ambiguous.
    try {
        auto a1 = parse(sheet, Notation::A1);
        if (a1.root.kind == NodeKind::Ref && a1.root.ref.kind != RefKind::Name) return true;
        auto rc = parse(sheet, Notation::R1C1);
        if (rc.root.kind == NodeKind::Ref && rc.root.ref.kind != RefKind::Name) return true;
    } catch (const SleuthError&) {
        return true;
    }
    if (iequals(sheet, "TRUE") || iequals(sheet, "FALSE")) return true;
    return false;
}

std::string quote_sheet(std::string_view sheet) {
    if (!sheet_needs_quotes(sheet)) return std::string(sheet);
    std::string out = "'";
    for (char c : sheet) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

bool same_sheet(const CellAddr& a, const CellAddr& b) {
    return iequals(a.workbook, b.workbook) && iequals(a.sheet, b.sheet);
}

bool operator==(const CellAddr& a, const CellAddr& b) {
    return same_sheet(a, b) && a.row == b.row && a.col == b.col;
}

bool AreaExtent::valid() const {
    return top >= 1 && left >= 1 && bottom <= kMaxRows && right <= kMaxCols && top <= bottom &&
           left <= right;
}

bool AreaExtent::contains(const CellAddr& a) const {
    return iequals(workbook, a.workbook) && iequals(sheet, a.sheet) && contains(a.row, a.col);
}

bool AreaExtent::contains(const AreaExtent& o) const {
    return same_sheet(*this, o) && o.top >= top && o.bottom <= bottom && o.left >= left &&
           o.right <= right;
}

bool AreaExtent::intersects(const AreaExtent& o) const {
    return same_sheet(*this, o) && o.top <= bottom && o.bottom >= top && o.left <= right &&
           o.right >= left;
}

bool same_sheet(const AreaExtent& a, const AreaExtent& b) {
    return iequals(a.workbook, b.workbook) && iequals(a.sheet, b.sheet);
}

bool operator==(const AreaExtent& a, const AreaExtent& b) {
    return same_sheet(a, b) && a.top == b.top && a.left == b.left && a.bottom == b.bottom &&
           a.right == b.right;
}

bool extent_less(const AreaExtent& a, const AreaExtent& b) {
    auto wa = to_lower(a.workbook), wb = to_lower(b.workbook);
    if (wa != wb) return wa < wb;
    auto sa = to_lower(a.sheet), sb = to_lower(b.sheet);
    if (sa != sb) return sa < sb;
    return std::tie(a.top, a.left, a.bottom, a.right) < std::tie(b.top, b.left, b.bottom, b.right);
}

AreaExtent intersection(const AreaExtent& a, const AreaExtent& b) {
    return {a.workbook, a.sheet, std::max(a.top, b.top), std::max(a.left, b.left),
            std::min(a.bottom, b.bottom), std::min(a.right, b.right)};
}

std::string format_a1(int row, int col, bool row_abs, bool col_abs) {
    std::string out;
    if (col_abs) out += '$';
    out += column_letters(col);
    if (row_abs) out += '$';
    out += std::to_string(row);
    return out;
}

std::string format_location(const AreaExtent& e, bool with_workbook) {
    std::string out;
    if (with_workbook) out += "[" + e.workbook + "]";
    out += quote_sheet(e.sheet) + "!" + format_a1(e.top, e.left, true, true);
    if (!e.single_cell()) out += ":" + format_a1(e.bottom, e.right, true, true);
    return out;
}

std::string format_location(const CellAddr& a, bool with_workbook) {
    return format_location(AreaExtent::cell(a), with_workbook);
}

AreaExtent parse_extent(std::string_view text, std::string_view default_workbook,
                        std::string_view default_sheet) {
    FormulaAst ast;
    try {
        ast = parse(text, Notation::A1);
    } catch (const ParseError& e) {
        throw SleuthError(ErrorCode::Parse, "malformed location '" + std::string(text) + "'");
    }
    if (ast.root.kind != NodeKind::Ref || ast.root.ref.kind == RefKind::Name)
        throw SleuthError(ErrorCode::Parse, "malformed location '" + std::string(text) + "'");
    const Reference& r = ast.root.ref;
    AreaExtent e;
    e.workbook = r.workbook ? *r.workbook : std::string(default_workbook);
    e.sheet = r.sheet ? *r.sheet : std::string(default_sheet);
    if (e.sheet.empty())
        throw SleuthError(ErrorCode::Parse, "location '" + std::string(text) + "' needs a sheet");
    const RefEnd& last = r.kind == RefKind::Range ? r.last : r.first;
    e.top = std::min(r.first.row.value, last.row.value);
    e.bottom = std::max(r.first.row.value, last.row.value);
    e.left = std::min(r.first.col.value, last.col.value);
    e.right = std::max(r.first.col.value, last.col.value);
    return e;
}

CellAddr parse_cell(std::string_view text, std::string_view default_workbook,
                    std::string_view default_sheet) {
    AreaExtent e = parse_extent(text, default_workbook, default_sheet);
    if (!e.single_cell())
        throw SleuthError(ErrorCode::Parse, "expected a single cell, got '" + std::string(text) + "'");
    return e.top_left();
}

}  // namespace sleuth
