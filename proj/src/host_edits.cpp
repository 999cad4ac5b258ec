#include "sleuth/host_edits.hpp"

#include "sleuth/error.hpp"

namespace sleuth {

namespace {

bool on_sheet(const std::string& wb, const std::string& sheet, const std::string& wb2, const std::string& sheet2) {
    return iequals(wb, wb2) && iequals(sheet, sheet2);
}

int limit(Axis axis) { return axis == Axis::Row ? kMaxRows : kMaxCols; }

int& coord(CellAddr& a, Axis axis) { return axis == Axis::Row ? a.row : a.col; }

void set_span(AreaExtent& e, Axis axis, int lo, int hi) {
    if (axis == Axis::Row) {
        e.top = lo;
        e.bottom = hi;
    } else {
        e.left = lo;
        e.right = hi;
    }
}

const char* line_word(Axis axis, int count) {
    if (axis == Axis::Row) return count == 1 ? "row" : "rows";
    return count == 1 ? "column" : "columns";
}

std::string line_label(Axis axis, int i) { return axis == Axis::Row ? std::to_string(i) : column_letters(i); }

void check_lines(const WorkbookSet& set, const std::string& wb, const std::string& sheet, Axis axis, int at,
                 int count) {
    set.get(wb).sheet(sheet);
    if (count < 1) throw SleuthError(ErrorCode::Usage, "line count must be at least 1");
    if (at < 1 || at + count - 1 > limit(axis))
        throw SleuthError(ErrorCode::OutOfGrid, std::string(line_word(axis, count)) + " starting at " +
                                                    line_label(axis, at) + " fall outside the grid");
}

}  // namespace

LineInsertMap::LineInsertMap(std::string workbook, std::string sheet, Axis axis, int at, int count)
    : workbook_(std::move(workbook)), sheet_(std::move(sheet)), axis_(axis), at_(at), count_(count) {}

std::optional<CellAddr> LineInsertMap::map_cell(const CellAddr& a) const {
    if (!on_sheet(a.workbook, a.sheet, workbook_, sheet_)) return a;
    CellAddr out = a;
    int& i = coord(out, axis_);
    if (i >= at_) i += count_;
    if (i > limit(axis_)) return std::nullopt;
    return out;
}

std::optional<AreaExtent> LineInsertMap::map_extent(const AreaExtent& e) const {
    if (!on_sheet(e.workbook, e.sheet, workbook_, sheet_)) return e;
    int lo = e.first(axis_), hi = e.last(axis_);
    if (lo >= at_) lo += count_;
    if (hi >= at_) hi += count_;
    if (hi > limit(axis_)) return std::nullopt;
    AreaExtent out = e;
    set_span(out, axis_, lo, hi);
    return out;
}

std::string LineInsertMap::describe() const {
    return "insert " + std::to_string(count_) + " " + line_word(axis_, count_) + " at " + line_label(axis_, at_) +
           " on " + sheet_;
}

LineDeleteMap::LineDeleteMap(std::string workbook, std::string sheet, Axis axis, int at, int count)
    : workbook_(std::move(workbook)), sheet_(std::move(sheet)), axis_(axis), at_(at), count_(count) {}

std::optional<CellAddr> LineDeleteMap::map_cell(const CellAddr& a) const {
    if (!on_sheet(a.workbook, a.sheet, workbook_, sheet_)) return a;
    CellAddr out = a;
    int& i = coord(out, axis_);
    int last = at_ + count_ - 1;
    if (i >= at_ && i <= last) return std::nullopt;
    if (i > last) i -= count_;
    return out;
}

std::optional<AreaExtent> LineDeleteMap::map_extent(const AreaExtent& e) const {
    if (!on_sheet(e.workbook, e.sheet, workbook_, sheet_)) return e;
    int last = at_ + count_ - 1;
    int lo = e.first(axis_), hi = e.last(axis_);
    if (lo > last) lo -= count_;
    else if (lo >= at_) lo = at_;
    if (hi > last) hi -= count_;
    else if (hi >= at_) hi = at_ - 1;
    if (lo > hi) return std::nullopt;
    AreaExtent out = e;
    set_span(out, axis_, lo, hi);
    return out;
}

std::string LineDeleteMap::describe() const {
    return "delete " + std::to_string(count_) + " " + line_word(axis_, count_) + " at " + line_label(axis_, at_) +
           " on " + sheet_;
}

CutPasteMap::CutPasteMap(AreaExtent source, CellAddr dest) : source_(std::move(source)) {
    dest_ = {dest.workbook, dest.sheet, dest.row, dest.col, dest.row + source_.height() - 1,
             dest.col + source_.width() - 1};
    if (!dest_.valid())
        throw SleuthError(ErrorCode::OutOfGrid, "paste at " + format_location(dest) + " runs off the grid");
}

std::optional<CellAddr> CutPasteMap::map_cell(const CellAddr& a) const {
    if (source_.contains(a))
        return CellAddr{dest_.workbook, dest_.sheet, a.row - source_.top + dest_.top, a.col - source_.left + dest_.left};
    if (dest_.contains(a)) return std::nullopt;
    return a;
}

std::optional<AreaExtent> CutPasteMap::map_extent(const AreaExtent& e) const {
    if (auto w = map_watched(e); !(*w == e)) return w;
    if (dest_.contains(e)) return std::nullopt;
    return e;
}

std::optional<AreaExtent> CutPasteMap::map_watched(const AreaExtent& e) const {
    if (!source_.contains(e)) return e;
    int dr = dest_.top - source_.top, dc = dest_.left - source_.left;
    return AreaExtent{dest_.workbook, dest_.sheet, e.top + dr, e.left + dc, e.bottom + dr, e.right + dc};
}

std::string CutPasteMap::describe() const {
    return "cut " + format_location(source_) + " to " + format_location(dest_);
}

LineMoveMap::LineMoveMap(std::string workbook, std::string sheet, Axis axis, int first, int last, int before)
    : workbook_(std::move(workbook)), sheet_(std::move(sheet)), axis_(axis), first_(first), last_(last),
      before_(before) {
    if (first < 1 || last < first || last > limit(axis) || before < 1 || before > limit(axis) + 1)
        throw SleuthError(ErrorCode::OutOfGrid, "line move outside the grid");
    if (before >= first && before <= last + 1)
        throw SleuthError(ErrorCode::Usage, "lines cannot be moved onto themselves");
}

int LineMoveMap::permute(int i) const {
    int k = last_ - first_ + 1;
    if (before_ > last_) {
        if (i >= first_ && i <= last_) return before_ - k + (i - first_);
        if (i > last_ && i < before_) return i - k;
        return i;
    }
    if (i >= first_ && i <= last_) return before_ + (i - first_);
    if (i >= before_ && i < first_) return i + k;
    return i;
}

std::optional<CellAddr> LineMoveMap::map_cell(const CellAddr& a) const {
    if (!on_sheet(a.workbook, a.sheet, workbook_, sheet_)) return a;
    CellAddr out = a;
    coord(out, axis_) = permute(coord(out, axis_));
    return out;
}

std::optional<AreaExtent> LineMoveMap::map_extent(const AreaExtent& e) const {
    if (!on_sheet(e.workbook, e.sheet, workbook_, sheet_)) return e;
    int lo = e.first(axis_), hi = e.last(axis_);
    if (lo >= first_ && hi <= last_) {
        AreaExtent out = e;
        set_span(out, axis_, permute(lo), permute(hi));
        return out;
    }
    // Anything not wholly inside the moved block sees a delete then an insert.
    int k = last_ - first_ + 1;
    auto removed = LineDeleteMap(workbook_, sheet_, axis_, first_, k).map_extent(e);
    if (!removed) return std::nullopt;
    return LineInsertMap(workbook_, sheet_, axis_, before_ > last_ ? before_ - k : before_, k).map_extent(*removed);
}

std::string LineMoveMap::describe() const {
    return "move " + std::string(line_word(axis_, last_ - first_ + 1)) + " " + line_label(axis_, first_) + ":" +
           line_label(axis_, last_) + " before " + line_label(axis_, before_) + " on " + sheet_;
}

FormulaAst adjust_formula(const WorkbookSet& set, const FormulaAst& a1, const CellAddr& old_host,
                          const CellAddr& new_host, const ReferenceMap& map) {
    FormulaAst out = a1;
    visit_nodes(out.root, [&](Node& n) {
        if (n.kind != NodeKind::Ref || n.ref.kind == RefKind::Name) return;
        Reference& r = n.ref;
        const Workbook* wb = set.find(r.workbook ? *r.workbook : old_host.workbook);
        if (!wb) return;
        const Sheet* sheet = wb->find_sheet(r.sheet ? *r.sheet : old_host.sheet);
        if (!sheet) return;
        const RefEnd& last = r.kind == RefKind::Range ? r.last : r.first;
        AreaExtent e{wb->id(),
                     sheet->name(),
                     std::min(r.first.row.value, last.row.value),
                     std::min(r.first.col.value, last.col.value),
                     std::max(r.first.row.value, last.row.value),
                     std::max(r.first.col.value, last.col.value)};
        auto m = map.map_extent(e);
        if (!m) {
            Span span = n.span;
            n = Node::make_error("#REF!");
            n.span = span;
            return;
        }
        r.first.row.value = m->top;
        r.first.col.value = m->left;
        if (r.kind == RefKind::Range) {
            r.last.row.value = m->bottom;
            r.last.col.value = m->right;
        }
        bool other_wb = !iequals(m->workbook, new_host.workbook);
        bool other_sheet = other_wb || !iequals(m->sheet, new_host.sheet);
        if (other_wb || r.workbook) r.workbook = m->workbook;
        if (other_sheet || r.sheet) r.sheet = m->sheet;
    });
    return out;
}

std::string translate_formula(std::string_view a1_source, int from_row, int from_col, int to_row, int to_col) {
    FormulaAst ast = parse(a1_source, Notation::A1);
    int dr = to_row - from_row, dc = to_col - from_col;
    visit_nodes(ast.root, [&](Node& n) {
        if (n.kind != NodeKind::Ref || n.ref.kind == RefKind::Name) return;
        bool ok = true;
        auto shift = [&](RefEnd& end) {
            if (!end.row.absolute) end.row.value += dr;
            if (!end.col.absolute) end.col.value += dc;
            ok = ok && end.row.value >= 1 && end.row.value <= kMaxRows && end.col.value >= 1 &&
                 end.col.value <= kMaxCols;
        };
        shift(n.ref.first);
        if (n.ref.kind == RefKind::Range) shift(n.ref.last);
        if (!ok) {
            Span span = n.span;
            n = Node::make_error("#REF!");
            n.span = span;
        }
    });
    return render(ast);
}

std::vector<std::string> apply_reference_map(WorkbookSet& set, Registry* reg, const ReferenceMap& map,
                                             bool track_generics) {
    using SheetKey = std::pair<std::string, std::string>;
    auto key_of = [](const std::string& wb, const std::string& sheet) {
        return SheetKey{to_lower(wb), to_lower(sheet)};
    };
    std::map<SheetKey, std::map<GridKey, CellContent>> fresh;
    for (const Workbook* wb : std::as_const(set).workbooks())
        for (const Sheet* sheet : wb->sheets()) {
            fresh[key_of(wb->id(), sheet->name())];
            for (const auto& [pos, cell] : sheet->cells()) {
                CellAddr old{wb->id(), sheet->name(), pos.first, pos.second};
                auto moved = map.map_cell(old);
                if (!moved) continue;
                CellContent content = cell;
                if (content.is_formula()) {
                    try {
                        content.formula =
                            render(adjust_formula(set, parse(content.formula, Notation::A1), old, *moved, map));
                    } catch (const SleuthError&) {
                        // Text that does not parse travels unchanged.
                    }
                }
                fresh[key_of(moved->workbook, moved->sheet)][{moved->row, moved->col}] = std::move(content);
            }
        }
    for (Workbook* wb : set.workbooks()) {
        for (Sheet* sheet : wb->sheets()) {
            Sheet rebuilt(sheet->name());
            for (auto& [pos, content] : fresh[key_of(wb->id(), sheet->name())])
                rebuilt.set(pos.first, pos.second, std::move(content));
            *sheet = std::move(rebuilt);
        }
        auto& names = wb->mutable_names();
        for (auto it = names.begin(); it != names.end();) {
            if (auto t = map.map_watched(it->target)) {
                it->target = *t;
                ++it;
            } else {
                it = names.erase(it);
            }
        }
    }

    std::vector<std::string> touched;
    if (!reg) return touched;
    std::vector<std::string> ids;
    for (const auto& [id, e] : reg->entries()) ids.push_back(id);
    for (const auto& id : ids) {
        WatchEntry& e = reg->mutable_entry(id);
        if (e.extent_lost) continue;
        WatchEntry before = e;
        if (track_generics && e.is_formula()) {
            std::optional<CellAddr> host, moved;
            for (int r = e.extent.top; r <= e.extent.bottom && !moved; ++r)
                for (int c = e.extent.left; c <= e.extent.right && !moved; ++c) {
                    host = CellAddr{e.extent.workbook, e.extent.sheet, r, c};
                    moved = map.map_cell(*host);
                }
            if (moved) {
                for (AreaState* state : {&e.current, &e.last_watched}) {
                    auto* g = std::get_if<GenericFormula>(state);
                    if (!g) continue;
                    try {
                        FormulaAst a1 = r1c1_to_a1(g->ast, host->row, host->col);
                        FormulaAst adjusted = adjust_formula(set, a1, *host, *moved, map);
                        *g = GenericFormula::from_ast(a1_to_r1c1(adjusted, moved->row, moved->col));
                    } catch (const SleuthError&) {
                    }
                }
            }
        }
        if (auto m = map.map_watched(e.extent)) e.extent = *m;
        else e.extent_lost = true;
        e.names = names_covering(set, e.extent);
        refresh_derived(e);
        if (!(e == before) || !(e.names == before.names)) {
            e.modified_at = reg->now();
            touched.push_back(id);
        }
    }
    return touched;
}

namespace {

void run_raw(WorkbookSet& set, Registry* reg, const ReferenceMap& map) {
    auto touched = apply_reference_map(set, reg, map, false);
    if (reg) reg->log(AuditVerb::Edit, "host edit: " + map.describe(), touched);
}

}  // namespace

void raw_insert_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                      Axis axis, int at, int count) {
    check_lines(set, workbook, sheet, axis, at, 1);
    if (count < 1) throw SleuthError(ErrorCode::Usage, "line count must be at least 1");
    run_raw(set, reg, LineInsertMap(set.get(workbook).id(), set.get(workbook).sheet(sheet).name(), axis, at, count));
}

void raw_delete_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                      Axis axis, int at, int count) {
    check_lines(set, workbook, sheet, axis, at, count);
    run_raw(set, reg, LineDeleteMap(set.get(workbook).id(), set.get(workbook).sheet(sheet).name(), axis, at, count));
}

void raw_cut_paste(WorkbookSet& set, Registry* reg, const AreaExtent& source, const CellAddr& dest) {
    const Workbook& swb = set.get(source.workbook);
    const Workbook& dwb = set.get(dest.workbook);
    AreaExtent src = source;
    src.workbook = swb.id();
    src.sheet = swb.sheet(source.sheet).name();
    CellAddr dst{dwb.id(), dwb.sheet(dest.sheet).name(), dest.row, dest.col};
    if (!src.valid()) throw SleuthError(ErrorCode::OutOfGrid, "cut source " + format_location(src) + " is invalid");
    run_raw(set, reg, CutPasteMap(src, dst));
}

void raw_move_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                    Axis axis, int first, int last, int before) {
    run_raw(set, reg,
            LineMoveMap(set.get(workbook).id(), set.get(workbook).sheet(sheet).name(), axis, first, last, before));
}

void raw_fill(WorkbookSet& set, const CellAddr& source, const AreaExtent& target) {
    CellContent content = set.cell(source);
    for (int r = target.top; r <= target.bottom; ++r)
        for (int c = target.left; c <= target.right; ++c) {
            CellAddr to{target.workbook, target.sheet, r, c};
            if (to == source) continue;
            CellContent copy = content;
            if (copy.is_formula()) {
                try {
                    copy.formula = translate_formula(content.formula, source.row, source.col, r, c);
                } catch (const ParseError&) {
                }
            }
            set.set_cell(to, std::move(copy));
        }
}

}  // namespace sleuth

namespace sleuth {

namespace {

// Applies `fn` to every cell/range reference of an A1 formula read at `host`.
bool rewrite_ast(const WorkbookSet& set, FormulaAst& ast, const CellAddr& host, const ExtentRewrite& fn) {
    bool changed = false;
    visit_nodes(ast.root, [&](Node& n) {
        if (n.kind != NodeKind::Ref || n.ref.kind == RefKind::Name) return;
        Reference& r = n.ref;
        const Workbook* wb = set.find(r.workbook ? *r.workbook : host.workbook);
        if (!wb) return;
        const Sheet* sheet = wb->find_sheet(r.sheet ? *r.sheet : host.sheet);
        if (!sheet) return;
        RefEnd& last = r.kind == RefKind::Range ? r.last : r.first;
        AreaExtent e{wb->id(),
                     sheet->name(),
                     std::min(r.first.row.value, last.row.value),
                     std::min(r.first.col.value, last.col.value),
                     std::max(r.first.row.value, last.row.value),
                     std::max(r.first.col.value, last.col.value)};
        auto m = fn(e, host);
        if (!m || *m == e) return;
        if (r.kind == RefKind::Cell && !m->single_cell()) return;
        r.first.row.value = m->top;
        r.first.col.value = m->left;
        if (r.kind == RefKind::Range) {
            r.last.row.value = m->bottom;
            r.last.col.value = m->right;
        }
        changed = true;
    });
    return changed;
}

}  // namespace

std::vector<std::string> rewrite_references(WorkbookSet& set, Registry* reg, const ExtentRewrite& fn) {
    std::vector<std::pair<CellAddr, std::string>> updates;
    for (const Workbook* wb : std::as_const(set).workbooks())
        for (const Sheet* sheet : wb->sheets())
            for (const auto& [pos, cell] : sheet->cells()) {
                if (!cell.is_formula()) continue;
                CellAddr host{wb->id(), sheet->name(), pos.first, pos.second};
                try {
                    FormulaAst ast = parse(cell.formula, Notation::A1);
                    if (rewrite_ast(set, ast, host, fn)) updates.emplace_back(host, render(ast));
                } catch (const SleuthError&) {
                }
            }
    for (auto& [host, text] : updates) set.set_cell(host, CellContent::of_formula(std::move(text)));

    std::vector<std::string> touched;
    if (!reg) return touched;
    std::vector<std::string> ids;
    for (const auto& [id, e] : reg->entries()) ids.push_back(id);
    for (const auto& id : ids) {
        WatchEntry& e = reg->mutable_entry(id);
        if (e.extent_lost || !e.is_formula()) continue;
        CellAddr host = e.extent.top_left();
        bool changed = false;
        for (AreaState* state : {&e.current, &e.last_watched}) {
            auto* g = std::get_if<GenericFormula>(state);
            if (!g) continue;
            try {
                FormulaAst a1 = r1c1_to_a1(g->ast, host.row, host.col);
                if (rewrite_ast(set, a1, host, fn)) {
                    *g = GenericFormula::from_ast(a1_to_r1c1(a1, host.row, host.col));
                    changed = true;
                }
            } catch (const SleuthError&) {
            }
        }
        if (changed) {
            refresh_derived(e);
            e.modified_at = reg->now();
            touched.push_back(id);
        }
    }
    return touched;
}

}  // namespace sleuth
