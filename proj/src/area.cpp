#include "sleuth/area.hpp"

#include <map>

#include "sleuth/error.hpp"
#include "sleuth/registry.hpp"

namespace sleuth {

const char* to_string(AreaKind k) {
    switch (k) {
        case AreaKind::FormulaArea: return "formula";
        case AreaKind::DataArea: return "data";
        case AreaKind::GuardArea: return "guard";
    }
    return "?";
}

const char* to_string(DataKind k) { return k == DataKind::Numeric ? "numeric" : "textual"; }

GenericFormula GenericFormula::from_ast(FormulaAst r1c1) {
    GenericFormula g;
    g.r1c1_text = render(r1c1);
    g.ast = std::move(r1c1);
    return g;
}

GenericFormula GenericFormula::from_r1c1_text(std::string_view text) {
    return from_ast(parse(text, Notation::R1C1));
}

GenericFormula GenericFormula::from_a1_at(std::string_view a1_source, int row, int col) {
    return from_ast(a1_to_r1c1(parse(a1_source, Notation::A1), row, col));
}

std::string GenericFormula::a1_at(int row, int col) const { return render(r1c1_to_a1(ast, row, col)); }

namespace {

std::string cell_key(int row, int col, const CellContent& c) {
    switch (c.kind) {
        case CellKind::Number: return "N";
        case CellKind::Text: return "T";
        case CellKind::Formula:
            try {
                return "F" + a1_text_to_r1c1(c.formula, row, col);
            } catch (const SleuthError&) {
                // Unparsable formulas never merge with neighbours.
                return "X" + std::to_string(row) + "," + std::to_string(col);
            }
        case CellKind::Blank: break;
    }
    return {};
}

// Row-major greedy growth: extend right, then down.
std::vector<AreaExtent> grow_rectangles(const std::map<GridKey, std::string>& keys,
                                        const std::string& workbook, const std::string& sheet) {
    std::set<GridKey> assigned;
    std::vector<AreaExtent> out;
    auto key_at = [&](int r, int c) -> const std::string* {
        auto it = keys.find({r, c});
        if (it == keys.end() || assigned.count({r, c})) return nullptr;
        return &it->second;
    };
    for (const auto& [pos, key] : keys) {
        if (assigned.count(pos)) continue;
        auto [r, c] = pos;
        int right = c;
        while (right < kMaxCols) {
            const std::string* k = key_at(r, right + 1);
            if (!k || *k != key) break;
            ++right;
        }
        int bottom = r;
        while (bottom < kMaxRows) {
            bool ok = true;
            for (int cc = c; cc <= right && ok; ++cc) {
                const std::string* k = key_at(bottom + 1, cc);
                ok = k && *k == key;
            }
            if (!ok) break;
            ++bottom;
        }
        for (int rr = r; rr <= bottom; ++rr)
            for (int cc = c; cc <= right; ++cc) assigned.insert({rr, cc});
        out.push_back({workbook, sheet, r, c, bottom, right});
    }
    return out;
}

}  // namespace

std::vector<Area> infer_areas(const Workbook& wb, std::string_view sheet_name) {
    return infer_areas(wb, sheet_name, [](int, int, const CellContent&) { return true; });
}

std::vector<Area> infer_areas(const Workbook& wb, std::string_view sheet_name, const CellFilter& filter) {
    const Sheet& sheet = wb.sheet(sheet_name);
    std::map<GridKey, std::string> keys;
    for (const auto& [pos, content] : sheet.cells())
        if (!content.is_blank() && filter(pos.first, pos.second, content))
            keys.emplace(pos, cell_key(pos.first, pos.second, content));
    std::vector<Area> areas;
    for (auto& extent : grow_rectangles(keys, wb.id(), sheet.name())) {
        Area a;
        a.extent = extent;
        const CellContent& tl = sheet.get(extent.top, extent.left);
        if (tl.is_formula()) {
            a.kind = AreaKind::FormulaArea;
            try {
                a.generic = GenericFormula::from_a1_at(tl.formula, extent.top, extent.left);
            } catch (const SleuthError&) {
                a.generic.reset();
            }
        } else {
            a.kind = AreaKind::DataArea;
            a.data_kind = tl.kind == CellKind::Text ? DataKind::Textual : DataKind::Numeric;
        }
        areas.push_back(std::move(a));
    }
    return areas;
}

GenericFormula generic_formula(const Workbook& wb, const AreaExtent& extent) {
    const Sheet& sheet = wb.sheet(extent.sheet);
    std::optional<GenericFormula> first;
    for (int r = extent.top; r <= extent.bottom; ++r) {
        for (int c = extent.left; c <= extent.right; ++c) {
            const CellContent& cell = sheet.get(r, c);
            if (!cell.is_formula())
                throw SleuthError(ErrorCode::NonFormulaCell,
                                  "cell " + format_location(CellAddr{wb.id(), sheet.name(), r, c}) +
                                      " does not hold a formula");
            GenericFormula g = GenericFormula::from_a1_at(cell.formula, r, c);
            if (!first) {
                first = std::move(g);
            } else if (!(g == *first)) {
                throw SleuthError(ErrorCode::NotUniform,
                                  "cell " + format_location(CellAddr{wb.id(), sheet.name(), r, c}) +
                                      " differs from the area's generic formula " + first->r1c1_text);
            }
        }
    }
    return *first;
}

GenericFormula generic_formula(const WorkbookSet& set, const AreaExtent& extent) {
    return generic_formula(set.get(extent.workbook), extent);
}

std::vector<Area> find_unwatched_formulas(const WorkbookSet& set, const Registry& reg) {
    std::vector<Area> out;
    for (const Workbook* wb : set.workbooks()) {
        for (const Sheet* sheet : wb->sheets()) {
            std::vector<AreaExtent> watched;
            for (const auto& [id, e] : reg.entries())
                if (!e.extent_lost && iequals(e.extent.workbook, wb->id()) && iequals(e.extent.sheet, sheet->name()))
                    watched.push_back(e.extent);
            auto areas = infer_areas(*wb, sheet->name(), [&](int r, int c, const CellContent& content) {
                if (!content.is_formula()) return false;
                for (const auto& w : watched)
                    if (w.contains(r, c)) return false;
                return true;
            });
            out.insert(out.end(), areas.begin(), areas.end());
        }
    }
    return out;
}

DataKind classify_data_area(const Workbook& wb, const AreaExtent& extent) {
    const Sheet& sheet = wb.sheet(extent.sheet);
    std::size_t numbers = 0, texts = 0;
    for (int r = extent.top; r <= extent.bottom; ++r)
        for (int c = extent.left; c <= extent.right; ++c) {
            const CellContent& cell = sheet.get(r, c);
            if (cell.kind == CellKind::Number) ++numbers;
            if (cell.kind == CellKind::Text) ++texts;
        }
    if (numbers == 0 && texts == 0)
        throw SleuthError(ErrorCode::Unclassifiable, "extent " + format_location(extent) + " holds no data");
    return texts > numbers ? DataKind::Textual : DataKind::Numeric;
}

std::vector<AreaExtent> cover_rectangles(const std::set<GridKey>& cells, const std::string& workbook,
                                         const std::string& sheet) {
    std::map<GridKey, std::string> keys;
    for (const auto& c : cells) keys.emplace(c, std::string());
    return grow_rectangles(keys, workbook, sheet);
}

}  // namespace sleuth
