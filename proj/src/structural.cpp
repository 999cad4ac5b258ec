#include "sleuth/structural.hpp"

#include <algorithm>
#include <set>

#include "sleuth/error.hpp"

namespace sleuth {

void require_development(const Registry& reg, std::string_view verb) {
    if (reg.mode() != Mode::Development)
        throw SleuthError(ErrorCode::Mode, std::string(verb) + " is not available in Operational mode");
}

namespace {

Axis cross_of(Axis a) { return a == Axis::Row ? Axis::Column : Axis::Row; }

AreaExtent with_span(AreaExtent e, Axis axis, int lo, int hi) {
    if (axis == Axis::Row) {
        e.top = lo;
        e.bottom = hi;
    } else {
        e.left = lo;
        e.right = hi;
    }
    return e;
}

CellAddr cell_at(const AreaExtent& e, Axis axis, int line, int cross) {
    return axis == Axis::Row ? CellAddr{e.workbook, e.sheet, line, cross} : CellAddr{e.workbook, e.sheet, cross, line};
}

int line_of(const CellAddr& a, Axis axis) { return axis == Axis::Row ? a.row : a.col; }

bool spans_overlap(int a0, int a1, int b0, int b1) { return a0 <= b1 && b0 <= a1; }

void add_unique(std::vector<std::string>& out, const std::vector<std::string>& ids) {
    for (const auto& id : ids)
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
}

std::vector<std::string> sorted_ids(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), IdLess());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

const WatchEntry* guard_for(const Registry& reg, const std::string& id) {
    for (const auto& [gid, g] : reg.entries())
        if (g.kind == AreaKind::GuardArea && g.guard_of == id && !g.extent_lost) return &g;
    return nullptr;
}

// Stretches ranges that end on the member's last line so they take in
// `count` more lines; ranges read from inside the member are left alone.
std::vector<std::string> extend_trailing(WorkbookSet& set, Registry& reg, const AreaExtent& member, Axis axis,
                                         int count) {
    Axis cross = cross_of(axis);
    return rewrite_references(set, &reg, [&](const AreaExtent& t, const CellAddr& host) -> std::optional<AreaExtent> {
        if (!same_sheet(t, member)) return std::nullopt;
        if (t.last(axis) != member.last(axis) || t.first(axis) > member.first(axis)) return std::nullopt;
        if (!spans_overlap(t.first(cross), t.last(cross), member.first(cross), member.last(cross))) return std::nullopt;
        if (iequals(host.workbook, member.workbook) && iequals(host.sheet, member.sheet) &&
            line_of(host, axis) >= member.first(axis) && line_of(host, axis) <= member.last(axis) + count)
            return std::nullopt;
        return with_span(t, axis, t.first(axis), t.last(axis) + count);
    });
}

// Mirror of extend_trailing for ranges that start on the member's first line.
std::vector<std::string> extend_leading(WorkbookSet& set, Registry& reg, const AreaExtent& member, Axis axis,
                                        int count) {
    Axis cross = cross_of(axis);
    return rewrite_references(set, &reg, [&](const AreaExtent& t, const CellAddr& host) -> std::optional<AreaExtent> {
        if (!same_sheet(t, member)) return std::nullopt;
        if (t.first(axis) != member.first(axis) || t.last(axis) < member.last(axis)) return std::nullopt;
        if (!spans_overlap(t.first(cross), t.last(cross), member.first(cross), member.last(cross))) return std::nullopt;
        if (iequals(host.workbook, member.workbook) && iequals(host.sheet, member.sheet) &&
            line_of(host, axis) >= member.first(axis) - count && line_of(host, axis) <= member.last(axis))
            return std::nullopt;
        return with_span(t, axis, t.first(axis) - count, t.last(axis));
    });
}

// A formula on the line after the member whose range ends on the member's
// last line and starts at or before its first line.
bool has_adjacent_aggregate(const WorkbookSet& set, const AreaExtent& member, Axis axis) {
    Axis cross = cross_of(axis);
    int line = member.last(axis) + 1;
    if (line > (axis == Axis::Row ? kMaxRows : kMaxCols)) return false;
    for (int c = member.first(cross); c <= member.last(cross); ++c) {
        CellAddr host = cell_at(member, axis, line, c);
        const CellContent& cell = set.cell(host);
        if (!cell.is_formula()) continue;
        std::vector<Reference> refs;
        try {
            refs = extract_references(parse(cell.formula, Notation::A1));
        } catch (const SleuthError&) {
            continue;
        }
        for (const auto& ref : refs) {
            if (ref.kind != RefKind::Range) continue;
            auto t = resolve_reference(set, ref, host);
            if (!t || !same_sheet(*t, member)) continue;
            if (t->last(axis) == member.last(axis) && t->first(axis) <= member.first(axis) &&
                spans_overlap(t->first(cross), t->last(cross), member.first(cross), member.last(cross)))
                return true;
        }
    }
    return false;
}

struct Members {
    std::vector<std::string> ids;
    Axis axis = Axis::Row;
};

// Offset of the anchor line inside the first member containing it.
int anchor_offset(const Registry& reg, const Members& m, int anchor) {
    for (const auto& id : m.ids) {
        const WatchEntry& e = reg.entry(id);
        if (e.extent_lost) throw SleuthError(ErrorCode::Irreparable, "entry " + id + " lost its extent");
        if (anchor >= e.extent.first(m.axis) && anchor <= e.extent.last(m.axis)) return anchor - e.extent.first(m.axis);
    }
    throw SleuthError(ErrorCode::AnchorOutside, std::string(m.axis == Axis::Row ? "row " : "column ") +
                                                    (m.axis == Axis::Row ? std::to_string(anchor) : column_letters(anchor)) +
                                                    " lies in no member");
}

std::string sheet_id(const AreaExtent& e) { return to_lower(e.workbook) + '\x1f' + to_lower(e.sheet); }

WatchEntry make_guard(Registry& reg, const WorkbookSet& set, const AreaExtent& extent, const std::string& of) {
    if (reg.size() >= reg.capacity())
        throw SleuthError(ErrorCode::Capacity,
                          "registry is full: at most " + std::to_string(reg.capacity()) + " watched areas");
    WatchEntry g;
    g.id = reg.allocate_id();
    g.extent = extent;
    g.kind = AreaKind::GuardArea;
    g.status = EntryStatus::Guard;
    g.current = DataDescriptor{};
    g.last_watched = DataDescriptor{};
    g.guard_of = of;
    g.modified_at = reg.now();
    g.names = names_covering(set, extent);
    return g;
}

EditResult insert_core(WorkbookSet& set, Registry& reg, const Members& m, int anchor, int count, InsertSide side,
                       const std::string& label) {
    require_development(reg, "insert");
    if (count < 1) throw SleuthError(ErrorCode::Usage, "insert count must be at least 1");
    const Axis axis = m.axis;
    const int k = anchor_offset(reg, m, anchor);
    const int offset = side == InsertSide::After ? k + 1 : k;
    for (const auto& id : m.ids)
        if (k >= reg.entry(id).extent.extent_along(axis))
            throw SleuthError(ErrorCode::AnchorOutside, "anchor offset falls outside member " + id);

    EditResult result;
    std::vector<std::string> pending = m.ids;
    while (!pending.empty()) {
        // Lowest insertion point first; later points are recomputed from live extents.
        auto at_of = [&](const std::string& id) { return reg.entry(id).extent.first(axis) + offset; };
        auto lowest = *std::min_element(pending.begin(), pending.end(), [&](const auto& a, const auto& b) {
            return std::make_pair(at_of(a), sheet_id(reg.entry(a).extent)) <
                   std::make_pair(at_of(b), sheet_id(reg.entry(b).extent));
        });
        const AreaExtent ref_extent = reg.entry(lowest).extent;
        const int at = at_of(lowest);
        std::vector<std::string> here;
        for (const auto& id : pending)
            if (sheet_id(reg.entry(id).extent) == sheet_id(ref_extent) && at_of(id) == at) here.push_back(id);
        std::erase_if(pending, [&](const auto& id) { return std::find(here.begin(), here.end(), id) != here.end(); });

        std::map<std::string, AreaExtent> prior;
        for (const auto& id : here) prior[id] = reg.entry(id).extent;
        LineInsertMap map(ref_extent.workbook, ref_extent.sheet, axis, at, count);
        add_unique(result.touched, apply_reference_map(set, &reg, map, true));
        for (const auto& id : here) {
            const AreaExtent& before = prior[id];
            if (side == InsertSide::After && before.last(axis) == at - 1) {
                add_unique(result.touched, extend_trailing(set, reg, before, axis, count));
                WatchEntry& e = reg.mutable_entry(id);
                e.extent = with_span(e.extent, axis, before.first(axis), before.last(axis) + count);
            } else if (side == InsertSide::Before && before.first(axis) == at) {
                AreaExtent shifted = with_span(before, axis, at + count, before.last(axis) + count);
                add_unique(result.touched, extend_leading(set, reg, shifted, axis, count));
                WatchEntry& e = reg.mutable_entry(id);
                e.extent = with_span(e.extent, axis, at, before.last(axis) + count);
            }
            WatchEntry& e = reg.mutable_entry(id);
            e.names = names_covering(set, e.extent);
            e.modified_at = reg.now();
            add_unique(result.touched, {id});
        }
    }

    // Guard lines between members and the aggregates that sum them.
    std::set<std::string> guarded;
    for (const auto& id : m.ids) {
        if (guarded.count(id) || guard_for(reg, id)) continue;
        const AreaExtent member = reg.entry(id).extent;
        if (!has_adjacent_aggregate(set, member, axis)) continue;
        std::vector<std::string> abutting;
        for (const auto& [oid, o] : reg.entries())
            if (o.kind != AreaKind::GuardArea && !o.extent_lost && same_sheet(o.extent, member) &&
                o.extent.last(axis) == member.last(axis) && !guard_for(reg, oid) &&
                std::find(m.ids.begin(), m.ids.end(), oid) != m.ids.end())
                abutting.push_back(oid);
        const int line = member.last(axis) + 1;
        LineInsertMap map(member.workbook, member.sheet, axis, line, 1);
        add_unique(result.touched, apply_reference_map(set, &reg, map, true));
        for (const auto& oid : abutting) {
            const AreaExtent o = reg.entry(oid).extent;
            add_unique(result.touched, extend_trailing(set, reg, o, axis, 1));
            Axis cross = cross_of(axis);
            AreaExtent gx = with_span(with_span(o, axis, line, line), cross, o.first(cross), o.last(cross));
            WatchEntry g = make_guard(reg, set, gx, oid);
            std::string gid = g.id;
            reg.upsert(std::move(g));
            add_unique(result.touched, {gid});
            guarded.insert(oid);
        }
    }

    // New member cells take the member's master formula.
    for (const auto& id : m.ids) {
        const WatchEntry& e = reg.entry(id);
        if (!e.is_formula()) continue;
        const GenericFormula* master = e.master_generic();
        Axis cross = cross_of(axis);
        int first = e.extent.first(axis) + offset;
        for (int line = first; line < first + count; ++line)
            for (int c = e.extent.first(cross); c <= e.extent.last(cross); ++c) {
                CellAddr a = cell_at(e.extent, axis, line, c);
                set.set_cell(a, CellContent::of_formula(master->a1_at(a.row, a.col)));
            }
    }

    result.touched = sorted_ids(result.touched);
    result.summary = "inserted " + std::to_string(count) + (axis == Axis::Row ? " row(s)" : " column(s)") + " in " + label;
    reg.log(AuditVerb::Insert, result.summary, result.touched);
    return result;
}

EditResult delete_core(WorkbookSet& set, Registry& reg, const Members& m, int anchor, int count,
                       const std::string& label) {
    require_development(reg, "delete");
    if (count < 1) throw SleuthError(ErrorCode::Usage, "delete count must be at least 1");
    const Axis axis = m.axis;
    const int k = anchor_offset(reg, m, anchor);
    for (const auto& id : m.ids) {
        const WatchEntry& e = reg.entry(id);
        int n = e.extent.extent_along(axis);
        if (count >= n)
            throw SleuthError(ErrorCode::WouldEmpty, "deleting " + std::to_string(count) + " of " + std::to_string(n) +
                                                         " lines would empty member " + id);
        if (k + count > n) {
            if (guard_for(reg, id))
                throw SleuthError(ErrorCode::GuardDeletion, "deletion runs into the guard of member " + id);
            throw SleuthError(ErrorCode::AnchorOutside, "deletion runs past the end of member " + id);
        }
    }
    EditResult result;
    std::vector<std::string> pending = m.ids;
    while (!pending.empty()) {
        auto at_of = [&](const std::string& id) { return reg.entry(id).extent.first(axis) + k; };
        auto highest = *std::max_element(pending.begin(), pending.end(), [&](const auto& a, const auto& b) {
            return std::make_pair(at_of(a), sheet_id(reg.entry(a).extent)) <
                   std::make_pair(at_of(b), sheet_id(reg.entry(b).extent));
        });
        const AreaExtent ref_extent = reg.entry(highest).extent;
        const int at = at_of(highest);
        std::erase_if(pending, [&](const auto& id) {
            return sheet_id(reg.entry(id).extent) == sheet_id(ref_extent) && at_of(id) == at;
        });
        LineDeleteMap map(ref_extent.workbook, ref_extent.sheet, axis, at, count);
        add_unique(result.touched, apply_reference_map(set, &reg, map, true));
    }
    for (const auto& id : m.ids) {
        WatchEntry& e = reg.mutable_entry(id);
        e.modified_at = reg.now();
        add_unique(result.touched, {id});
    }
    result.touched = sorted_ids(result.touched);
    result.summary = "deleted " + std::to_string(count) + (axis == Axis::Row ? " row(s)" : " column(s)") + " in " + label;
    reg.log(AuditVerb::Delete, result.summary, result.touched);
    return result;
}

Members group_members(const Registry& reg, const std::string& group) {
    const GroupDef& g = reg.group(group);
    return {g.ids, g.axis};
}

}  // namespace

EditResult insert_in_group(WorkbookSet& set, Registry& reg, const std::string& group, int anchor, int count,
                           InsertSide side) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        return insert_core(s, r, group_members(r, group), anchor, count, side, "group " + group);
    });
}

EditResult insert_in_area(WorkbookSet& set, Registry& reg, const std::string& id, Axis axis, int anchor, int count,
                          InsertSide side) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        r.entry(id);
        return insert_core(s, r, Members{{id}, axis}, anchor, count, side, "entry " + id);
    });
}

EditResult delete_in_group(WorkbookSet& set, Registry& reg, const std::string& group, int anchor, int count) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        return delete_core(s, r, group_members(r, group), anchor, count, "group " + group);
    });
}

EditResult move_area(WorkbookSet& set, Registry& reg, const AreaExtent& source, const CellAddr& dest) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        require_development(r, "move");
        const WatchEntry* owner = r.find_exact(source);
        if (!owner)
            throw SleuthError(ErrorCode::UnwatchedSource, format_location(source) + " is not a watched area");
        const AreaExtent src = owner->extent;
        const std::string id = owner->id;
        const Workbook& dwb = s.get(dest.workbook);
        CellAddr dst{dwb.id(), dwb.sheet(dest.sheet).name(), dest.row, dest.col};
        CutPasteMap map(src, dst);
        const AreaExtent& target = map.destination();
        for (const WatchEntry* o : r.overlapping(target))
            if (o->id != id)
                throw SleuthError(ErrorCode::DestinationCollision,
                                  format_location(target) + " overlaps watched entry " + o->id);
        const Sheet& dsheet = dwb.sheet(dst.sheet);
        for (int row = target.top; row <= target.bottom; ++row)
            for (int col = target.left; col <= target.right; ++col)
                if (!src.contains(CellAddr{dst.workbook, dst.sheet, row, col}) && !dsheet.get(row, col).is_blank())
                    throw SleuthError(ErrorCode::DestinationCollision,
                                      format_location(CellAddr{dst.workbook, dst.sheet, row, col}) + " is not blank");
        // A range that straddles the source edge cannot follow a cut.
        for (const Workbook* wb : std::as_const(s).workbooks()) {
            for (const auto& n : wb->names())
                if (n.target.intersects(src) && !src.contains(n.target))
                    throw SleuthError(ErrorCode::SplitRange, "name " + n.name + " covers part of " + format_location(src));
            for (const Sheet* sheet : wb->sheets())
                for (const auto& [pos, cell] : sheet->cells()) {
                    if (!cell.is_formula()) continue;
                    CellAddr host{wb->id(), sheet->name(), pos.first, pos.second};
                    std::vector<Reference> refs;
                    try {
                        refs = extract_references(parse(cell.formula, Notation::A1));
                    } catch (const SleuthError&) {
                        continue;
                    }
                    for (const auto& ref : refs) {
                        if (ref.kind != RefKind::Range) continue;
                        auto t = resolve_reference(s, ref, host);
                        if (t && t->intersects(src) && !src.contains(*t))
                            throw SleuthError(ErrorCode::SplitRange,
                                              "formula at " + format_location(host) + " reads " + format_location(*t) +
                                                  " which straddles " + format_location(src));
                    }
                }
        }
        EditResult result;
        result.touched = sorted_ids(apply_reference_map(s, &r, map, true));
        WatchEntry& moved = r.mutable_entry(id);
        moved.modified_at = r.now();
        add_unique(result.touched, {id});
        result.touched = sorted_ids(result.touched);
        result.summary = "moved " + id + " from " + format_location(src) + " to " + format_location(moved.extent);
        r.log(AuditVerb::Move, result.summary, result.touched);
        return result;
    });
}

namespace {

struct Placement {
    const WatchEntry* source;
    AreaExtent target;
};

// Maps an extent read by a replicated formula onto the copies when every
// source it touches moves by the same offset and together they cover it.
std::optional<AreaExtent> replicated_extent(const AreaExtent& x, const std::vector<Placement>& plan) {
    const Placement* first = nullptr;
    long long covered = 0;
    for (const auto& p : plan) {
        const AreaExtent& src = p.source->extent;
        if (!src.intersects(x)) continue;
        if (first && !(same_sheet(first->target, p.target) &&
                       first->target.top - first->source->extent.top == p.target.top - src.top &&
                       first->target.left - first->source->extent.left == p.target.left - src.left))
            return std::nullopt;
        if (!first) first = &p;
        covered += intersection(src, x).size();
    }
    if (!first || covered != x.size()) return std::nullopt;
    int dr = first->target.top - first->source->extent.top;
    int dc = first->target.left - first->source->extent.left;
    return AreaExtent{first->target.workbook, first->target.sheet, x.top + dr, x.left + dc, x.bottom + dr,
                      x.right + dc};
}

std::string replicate_formula(const WorkbookSet& set, const std::string& a1, const CellAddr& from, const CellAddr& to,
                              const std::vector<Placement>& plan) {
    FormulaAst ast = parse(a1, Notation::A1);
    visit_nodes(ast.root, [&](Node& n) {
        if (n.kind != NodeKind::Ref) return;
        Reference& r = n.ref;
        if (r.kind == RefKind::Name) {
            if (!r.workbook && !iequals(from.workbook, to.workbook)) r.workbook = from.workbook;
            return;
        }
        auto x = resolve_reference(set, r, from);
        if (!x) return;
        AreaExtent t = replicated_extent(*x, plan).value_or(*x);
        r.first.row.value = t.top;
        r.first.col.value = t.left;
        if (r.kind == RefKind::Range) {
            r.last.row.value = t.bottom;
            r.last.col.value = t.right;
        }
        bool other_wb = !iequals(t.workbook, to.workbook);
        bool other_sheet = other_wb || !iequals(t.sheet, to.sheet);
        r.workbook = other_wb ? std::optional(t.workbook) : std::nullopt;
        r.sheet = other_sheet ? std::optional(t.sheet) : std::nullopt;
    });
    return render(ast);
}

}  // namespace

EditResult replicate(WorkbookSet& set, Registry& reg, const std::vector<std::string>& sources,
                     const std::vector<CellAddr>& destinations) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        require_development(r, "replicate");
        if (sources.empty() || sources.size() != destinations.size())
            throw SleuthError(ErrorCode::Usage, "replicate needs one destination per source");
        std::vector<Placement> plan;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            if (!r.has(sources[i]))
                throw SleuthError(ErrorCode::UnwatchedSource, "entry " + sources[i] + " is not watched");
            const WatchEntry& e = r.entry(sources[i]);
            if (e.extent_lost) throw SleuthError(ErrorCode::Irreparable, "entry " + e.id + " lost its extent");
            const Workbook& wb = s.get(destinations[i].workbook);
            const Sheet& sheet = wb.sheet(destinations[i].sheet);
            AreaExtent t{wb.id(), sheet.name(), destinations[i].row, destinations[i].col,
                         destinations[i].row + e.extent.height() - 1, destinations[i].col + e.extent.width() - 1};
            if (!t.valid()) throw SleuthError(ErrorCode::OutOfGrid, "copy of " + e.id + " runs off the grid");
            for (const auto& p : plan)
                if (p.target.intersects(t))
                    throw SleuthError(ErrorCode::DestinationCollision,
                                      "copies of " + p.source->id + " and " + e.id + " overlap");
            if (auto hits = r.overlapping(t); !hits.empty())
                throw SleuthError(ErrorCode::DestinationCollision,
                                  format_location(t) + " overlaps watched entry " + hits.front()->id);
            for (int row = t.top; row <= t.bottom; ++row)
                for (int col = t.left; col <= t.right; ++col)
                    if (!sheet.get(row, col).is_blank())
                        throw SleuthError(ErrorCode::DestinationCollision,
                                          format_location(CellAddr{t.workbook, t.sheet, row, col}) + " is not blank");
            plan.push_back({&e, t});
        }
        if (r.size() + plan.size() > r.capacity())
            throw SleuthError(ErrorCode::Capacity,
                              "registry is full: at most " + std::to_string(r.capacity()) + " watched areas");

        std::vector<std::pair<CellAddr, CellContent>> writes;
        for (const auto& p : plan) {
            const AreaExtent& src = p.source->extent;
            for (int row = src.top; row <= src.bottom; ++row)
                for (int col = src.left; col <= src.right; ++col) {
                    CellAddr from{src.workbook, src.sheet, row, col};
                    CellAddr to{p.target.workbook, p.target.sheet, row - src.top + p.target.top,
                                col - src.left + p.target.left};
                    CellContent c = s.cell(from);
                    if (c.is_formula()) {
                        try {
                            c.formula = replicate_formula(s, c.formula, from, to, plan);
                        } catch (const ParseError&) {
                        }
                    }
                    writes.emplace_back(to, std::move(c));
                }
        }
        for (auto& [a, c] : writes) s.set_cell(a, std::move(c));

        EditResult result;
        for (const auto& p : plan) {
            WatchEntry copy;
            copy.id = r.allocate_id();
            copy.extent = p.target;
            copy.kind = p.source->kind;
            copy.status = p.source->status;
            copy.modified_at = r.now();
            copy.names = names_covering(s, p.target);
            if (copy.kind == AreaKind::FormulaArea) {
                const CellContent& tl = s.cell(p.target.top_left());
                GenericFormula g = GenericFormula::from_a1_at(tl.formula, p.target.top, p.target.left);
                copy.current = g;
                copy.last_watched = g;
            } else {
                copy.current = p.source->current;
                copy.last_watched = p.source->last_watched;
            }
            result.touched.push_back(copy.id);
            r.upsert(std::move(copy));
        }
        // Guards follow the areas they protect when both were replicated.
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (plan[i].source->kind != AreaKind::GuardArea) continue;
            for (std::size_t j = 0; j < plan.size(); ++j)
                if (plan[j].source->id == plan[i].source->guard_of)
                    r.mutable_entry(result.touched[i]).guard_of = result.touched[j];
        }
        result.summary = "replicated " + std::to_string(plan.size()) + " area(s)";
        r.log(AuditVerb::Replicate, result.summary, result.touched);
        return result;
    });
}

EditResult fix_area(WorkbookSet& set, Registry& reg, const std::string& id, bool accept) {
    return transact(set, reg, [&](WorkbookSet& s, Registry& r) {
        WatchEntry& e = r.mutable_entry(id);
        if (e.extent_lost)
            throw SleuthError(ErrorCode::Irreparable, "entry " + id + " lost its cells to an untracked delete; repair by hand and watch again");
        const Workbook* wb = s.find(e.extent.workbook);
        if (!wb || !wb->find_sheet(e.extent.sheet) || !e.extent.valid())
            throw SleuthError(ErrorCode::Irreparable, "entry " + id + " no longer maps onto the grid");
        EditResult result;
        std::string what;
        if (e.kind == AreaKind::FormulaArea) {
            if (accept) {
                const CellContent& tl = s.cell(e.extent.top_left());
                if (tl.is_formula()) e.current = GenericFormula::from_a1_at(tl.formula, e.extent.top, e.extent.left);
                e.last_watched = e.current;
                what = "accepted current formula";
            } else {
                const GenericFormula* master = e.master_generic();
                std::vector<std::pair<CellAddr, std::string>> cells;
                try {
                    for (int row = e.extent.top; row <= e.extent.bottom; ++row)
                        for (int col = e.extent.left; col <= e.extent.right; ++col)
                            cells.emplace_back(CellAddr{e.extent.workbook, e.extent.sheet, row, col},
                                               master->a1_at(row, col));
                } catch (const SleuthError& ex) {
                    throw SleuthError(ErrorCode::Irreparable, "master formula of " + id + " cannot be applied: " + ex.what());
                }
                for (auto& [a, f] : cells) s.set_cell(a, CellContent::of_formula(std::move(f)));
                e.current = e.last_watched;
                what = "regenerated from master formula";
            }
        } else if (e.kind == AreaKind::DataArea) {
            if (accept) {
                const Workbook& book = s.get(e.extent.workbook);
                DataDescriptor d = e.data() ? *e.data() : DataDescriptor{};
                std::vector<double> numbers;
                bool any = false;
                const Sheet& sheet = book.sheet(e.extent.sheet);
                for (int row = e.extent.top; row <= e.extent.bottom; ++row)
                    for (int col = e.extent.left; col <= e.extent.right; ++col) {
                        const CellContent& c = sheet.get(row, col);
                        any = any || c.is_data();
                        if (c.kind == CellKind::Number) numbers.push_back(c.number);
                    }
                if (any) d.data_kind = classify_data_area(book, e.extent);
                d.bounds = d.data_kind == DataKind::Numeric && !numbers.empty() ? std::optional(compute_bounds(numbers))
                                                                                 : std::nullopt;
                e.current = d;
                e.last_watched = d;
                what = "accepted data";
            } else {
                what = "reported data findings";
            }
        } else {
            if (accept) {
                e.kind = AreaKind::DataArea;
                e.status = EntryStatus::Normal;
                e.guard_of.clear();
                const Workbook& book = s.get(e.extent.workbook);
                DataDescriptor d;
                std::vector<double> numbers;
                const Sheet& sheet = book.sheet(e.extent.sheet);
                bool any = false;
                for (int row = e.extent.top; row <= e.extent.bottom; ++row)
                    for (int col = e.extent.left; col <= e.extent.right; ++col) {
                        const CellContent& c = sheet.get(row, col);
                        any = any || c.is_data();
                        if (c.kind == CellKind::Number) numbers.push_back(c.number);
                    }
                if (any) d.data_kind = classify_data_area(book, e.extent);
                if (!numbers.empty() && d.data_kind == DataKind::Numeric) d.bounds = compute_bounds(numbers);
                e.current = d;
                e.last_watched = d;
                what = "guard converted to data area";
            } else {
                for (int row = e.extent.top; row <= e.extent.bottom; ++row)
                    for (int col = e.extent.left; col <= e.extent.right; ++col)
                        s.set_cell(CellAddr{e.extent.workbook, e.extent.sheet, row, col}, CellContent::blank());
                what = "guard blanked";
            }
        }
        refresh_derived(e);
        e.change_flag = !(e.current == e.last_watched);
        e.modified_at = r.now();
        result.findings = check_entry(s, r, r.entry(id));
        WatchEntry& after = r.mutable_entry(id);
        after.error_flag = std::any_of(result.findings.begin(), result.findings.end(),
                                       [](const Finding& f) { return f.severity == Severity::Error; });
        result.touched = {id};
        result.summary = "fix " + id + ": " + what;
        r.log(AuditVerb::Fix, result.summary, result.touched);
        return result;
    });
}

}  // namespace sleuth
