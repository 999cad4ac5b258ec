#include "sleuth/checker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "sleuth/error.hpp"

namespace sleuth {

std::string canonical_message(FindingCode code) {
    switch (code) {
        case FindingCode::ErrorInFormula: return "<Error in Formula.>";
        case FindingCode::NotWatched: return "<Formula refers to a Cell/Area that is NOT Watched.>";
        case FindingCode::DataOverBlank: return "<Data entered over Blank.>";
        case FindingCode::DataNotReferred: return "<Data is NOT referred to by a Watched Formula.>";
        case FindingCode::CandidateFinalResult:
            return "<Formula is NOT referred to by a Watched Formula; mark as Final Result?>";
        case FindingCode::UnwatchedDependent: return "<Referred to only by Formulas that are NOT Watched.>";
        case FindingCode::InconsistentDependent: return "<Referred to inconsistently by a Watched Formula.>";
        case FindingCode::VulnerableDollaring: return "<Vulnerable reference dollaring.>";
        case FindingCode::BlankInData: return "<Blank in Data Area.>";
        case FindingCode::FormulaInData: return "<Formula in Data Area.>";
        case FindingCode::TypeMismatch: return "<Data type does NOT match the Area.>";
        case FindingCode::OutOfBounds: return "<Data out of Bounds.>";
    }
    return "<?>";
}

const char* to_string(FindingCode code) {
    switch (code) {
        case FindingCode::ErrorInFormula: return "error-in-formula";
        case FindingCode::NotWatched: return "not-watched";
        case FindingCode::DataOverBlank: return "data-over-blank";
        case FindingCode::DataNotReferred: return "data-not-referred";
        case FindingCode::CandidateFinalResult: return "candidate-final-result";
        case FindingCode::UnwatchedDependent: return "unwatched-dependent";
        case FindingCode::InconsistentDependent: return "inconsistent-dependent";
        case FindingCode::VulnerableDollaring: return "vulnerable-dollaring";
        case FindingCode::BlankInData: return "blank-in-data";
        case FindingCode::FormulaInData: return "formula-in-data";
        case FindingCode::TypeMismatch: return "type-mismatch";
        case FindingCode::OutOfBounds: return "out-of-bounds";
    }
    return "?";
}

const char* to_string(Severity s) { return s == Severity::Error ? "Error" : "Warning"; }

Severity default_severity(FindingCode code) {
    switch (code) {
        case FindingCode::CandidateFinalResult:
        case FindingCode::UnwatchedDependent:
        case FindingCode::VulnerableDollaring: return Severity::Warning;
        default: return Severity::Error;
    }
}

std::vector<FindingCode> all_finding_codes() {
    return {FindingCode::ErrorInFormula,       FindingCode::NotWatched,         FindingCode::DataOverBlank,
            FindingCode::DataNotReferred,      FindingCode::CandidateFinalResult, FindingCode::UnwatchedDependent,
            FindingCode::InconsistentDependent, FindingCode::VulnerableDollaring, FindingCode::BlankInData,
            FindingCode::FormulaInData,        FindingCode::TypeMismatch,       FindingCode::OutOfBounds};
}

std::size_t Report::error_count() const {
    return std::count_if(findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::Error; });
}

std::size_t Report::warning_count() const { return findings.size() - error_count(); }

std::vector<Finding> Report::findings_for(const std::string& entry_id) const {
    std::vector<Finding> out;
    for (const auto& f : findings)
        if (f.entry_id == entry_id) out.push_back(f);
    return out;
}

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Finding make_finding(const WatchEntry& e, const AreaExtent& where, FindingCode code, std::string detail = {}) {
    Finding f;
    f.entry_id = e.id;
    f.location = where;
    f.code = code;
    f.severity = default_severity(code);
    f.message = canonical_message(code);
    f.detail = std::move(detail);
    return f;
}

std::string sheet_key(const std::string& wb, const std::string& sheet) { return to_lower(wb) + '\x1f' + to_lower(sheet); }

// Rectangles bucketed by sheet and by blocks of rows.
template <typename T>
class RectIndex {
public:
    struct Item {
        AreaExtent extent;
        T value;
    };

    void add(const AreaExtent& e, T value) {
        std::size_t idx = items_.size();
        items_.push_back({e, std::move(value)});
        auto& sheet = buckets_[sheet_key(e.workbook, e.sheet)];
        for (int b = e.top / kBlock; b <= e.bottom / kBlock; ++b) sheet[b].push_back(idx);
    }

    template <typename F>
    void query(const AreaExtent& e, F&& fn) const {
        auto it = buckets_.find(sheet_key(e.workbook, e.sheet));
        if (it == buckets_.end()) return;
        std::vector<std::size_t> hits;
        auto lo = it->second.lower_bound(e.top / kBlock);
        auto hi = it->second.upper_bound(e.bottom / kBlock);
        for (auto b = lo; b != hi; ++b)
            for (std::size_t idx : b->second)
                if (items_[idx].extent.intersects(e)) hits.push_back(idx);
        std::sort(hits.begin(), hits.end());
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        for (std::size_t idx : hits) fn(items_[idx]);
    }

private:
    static constexpr int kBlock = 64;
    std::vector<Item> items_;
    std::unordered_map<std::string, std::map<int, std::vector<std::size_t>>> buckets_;
};

long long overlap_size(const AreaExtent& a, const AreaExtent& b) {
    if (!a.intersects(b)) return 0;
    return intersection(a, b).size();
}

// Workbook and sheet a reference reads from, in canonical casing.
std::optional<std::pair<std::string, std::string>> target_sheet(const WorkbookSet& set, const Reference& ref,
                                                               const std::string& host_wb,
                                                               const std::string& host_sheet) {
    const Workbook* wb = set.find(ref.workbook ? *ref.workbook : host_wb);
    if (!wb) return std::nullopt;
    const Sheet* sheet = wb->find_sheet(ref.sheet ? *ref.sheet : host_sheet);
    if (!sheet) return std::nullopt;
    return std::make_pair(wb->id(), sheet->name());
}

std::optional<AreaExtent> resolve_name_ref(const WorkbookSet& set, const Reference& ref, const std::string& host_wb) {
    const Workbook* wb = set.find(ref.workbook ? *ref.workbook : host_wb);
    if (!wb) return std::nullopt;
    try {
        AreaExtent t = resolve_name(*wb, ref.name);
        const Workbook* twb = set.find(t.workbook);
        if (!twb || !twb->find_sheet(t.sheet)) return std::nullopt;
        return t;
    } catch (const SleuthError&) {
        return std::nullopt;
    }
}

struct Interval {
    int lo;
    int hi;
};

// Union over host positions [from, to] of the span between two endpoint coordinates.
std::optional<Interval> sweep_axis(const Coord& a, const Coord& b, int from, int to, int limit) {
    auto at = [](const Coord& c, int host) { return c.absolute ? c.value : host + c.value; };
    int v[] = {at(a, from), at(a, to), at(b, from), at(b, to)};
    int lo = *std::min_element(std::begin(v), std::end(v));
    int hi = *std::max_element(std::begin(v), std::end(v));
    if (lo < 1 || hi > limit) return std::nullopt;
    return Interval{lo, hi};
}

bool holds_ref_error(const GenericFormula& g) {
    bool found = false;
    visit_nodes(g.ast.root, [&](const Node& n) {
        if (n.kind == NodeKind::Error && n.text == "#REF!") found = true;
    });
    return found;
}

}  // namespace

std::optional<std::vector<AreaExtent>> sweep_reference(const WorkbookSet& set, const Reference& ref,
                                                       const AreaExtent& area) {
    if (ref.kind == RefKind::Name) {
        auto t = resolve_name_ref(set, ref, area.workbook);
        if (!t) return std::nullopt;
        return std::vector<AreaExtent>{*t};
    }
    auto target = target_sheet(set, ref, area.workbook, area.sheet);
    if (!target) return std::nullopt;
    const RefEnd& last = ref.kind == RefKind::Range ? ref.last : ref.first;
    auto rows = sweep_axis(ref.first.row, last.row, area.top, area.bottom, kMaxRows);
    auto cols = sweep_axis(ref.first.col, last.col, area.left, area.right, kMaxCols);
    if (!rows || !cols) return std::nullopt;
    return std::vector<AreaExtent>{{target->first, target->second, rows->lo, cols->lo, rows->hi, cols->hi}};
}

std::optional<AreaExtent> resolve_reference(const WorkbookSet& set, const Reference& ref, const CellAddr& host) {
    if (ref.kind == RefKind::Name) return resolve_name_ref(set, ref, host.workbook);
    auto target = target_sheet(set, ref, host.workbook, host.sheet);
    if (!target) return std::nullopt;
    const RefEnd& last = ref.kind == RefKind::Range ? ref.last : ref.first;
    AreaExtent e{target->first,
                 target->second,
                 std::min(ref.first.row.value, last.row.value),
                 std::min(ref.first.col.value, last.col.value),
                 std::max(ref.first.row.value, last.row.value),
                 std::max(ref.first.col.value, last.col.value)};
    if (!e.valid()) return std::nullopt;
    return e;
}

Bounds compute_bounds(std::span<const double> values) {
    if (values.empty()) throw SleuthError(ErrorCode::Usage, "bounds need at least one value");
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (values.size() < 3) return {*mn - 0.5 * (std::fabs(*mn) + 1.0), *mx + 0.5 * (std::fabs(*mx) + 1.0)};
    double n = static_cast<double>(values.size());
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    return {mean - 3.0 * sd, mean + 3.0 * sd};
}

struct ReconciliationIndex::Impl {
    struct Slot {
        Reference ref;
        std::optional<AreaExtent> region;
    };
    struct Region {
        std::string entry_id;
        AreaExtent extent;
    };

    const WorkbookSet& set;
    const Registry& reg;
    RectIndex<std::string> owners;
    std::unordered_map<std::string, std::vector<Slot>> slots;
    RectIndex<Region> watched_regions;
    RectIndex<int> unwatched_regions;

    Impl(const WorkbookSet& s, const Registry& r) : set(s), reg(r) {
        for (const auto& [id, e] : reg.entries()) {
            if (e.extent_lost) continue;
            owners.add(e.extent, id);
        }
        for (const auto& [id, e] : reg.entries()) {
            if (e.extent_lost || !e.is_formula()) continue;
            const GenericFormula* g = e.current_generic();
            if (!g) continue;
            auto& list = slots[id];
            for (const auto& ref : extract_references(g->ast)) {
                Slot slot{ref, std::nullopt};
                if (auto regions = sweep_reference(set, ref, e.extent)) {
                    slot.region = regions->front();
                    watched_regions.add(*slot.region, Region{id, *slot.region});
                }
                list.push_back(std::move(slot));
            }
        }
        for (const Workbook* wb : set.workbooks())
            for (const Sheet* sheet : wb->sheets())
                for (const auto& [pos, cell] : sheet->cells()) {
                    if (!cell.is_formula()) continue;
                    CellAddr host{wb->id(), sheet->name(), pos.first, pos.second};
                    if (owner_of(host)) continue;
                    std::vector<Reference> refs;
                    try {
                        refs = extract_references(parse(cell.formula, Notation::A1));
                    } catch (const SleuthError&) {
                        continue;
                    }
                    for (const auto& ref : refs)
                        if (auto x = resolve_reference(set, ref, host)) unwatched_regions.add(*x, 0);
                }
    }

    const WatchEntry* owner_of(const CellAddr& a) const {
        const WatchEntry* found = nullptr;
        owners.query(AreaExtent::cell(a), [&](const auto& item) { found = &reg.entry(item.value); });
        return found;
    }
};

ReconciliationIndex::ReconciliationIndex(const WorkbookSet& set, const Registry& reg)
    : impl_(std::make_unique<Impl>(set, reg)) {}

ReconciliationIndex::~ReconciliationIndex() = default;

std::vector<Finding> check_damage(const WorkbookSet& set, const WatchEntry& entry) {
    std::vector<Finding> out;
    if (!entry.is_formula()) return out;
    const GenericFormula* master = entry.master_generic();
    auto hint_at = [&](const AreaExtent& x) -> std::optional<std::string> {
        if (!master) return std::nullopt;
        try {
            return master->a1_at(x.top, x.left);
        } catch (const SleuthError&) {
            return std::nullopt;
        }
    };
    if (entry.extent_lost) {
        Finding f = make_finding(entry, entry.extent, FindingCode::ErrorInFormula, "area deleted by an untracked edit");
        out.push_back(std::move(f));
        return out;
    }
    const GenericFormula* current = entry.current_generic();
    const Workbook* wb = set.find(entry.extent.workbook);
    const Sheet* sheet = wb ? wb->find_sheet(entry.extent.sheet) : nullptr;
    if (!sheet || !current) {
        out.push_back(make_finding(entry, entry.extent, FindingCode::ErrorInFormula, "sheet is missing"));
        return out;
    }
    std::set<GridKey> damaged;
    for (int r = entry.extent.top; r <= entry.extent.bottom; ++r)
        for (int c = entry.extent.left; c <= entry.extent.right; ++c) {
            const CellContent& cell = sheet->get(r, c);
            bool ok = false;
            if (cell.is_formula()) {
                try {
                    ok = a1_text_to_r1c1(cell.formula, r, c) == current->r1c1_text;
                } catch (const SleuthError&) {
                    ok = false;
                }
            }
            if (!ok) damaged.insert({r, c});
        }
    for (const auto& x : cover_rectangles(damaged, entry.extent.workbook, entry.extent.sheet)) {
        Finding f = make_finding(entry, x, FindingCode::ErrorInFormula,
                                 "cells differ from the area formula " + current->r1c1_text);
        f.fix_hint = hint_at(x);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Finding> check_precedents(const ReconciliationIndex& index, const WatchEntry& entry) {
    std::vector<Finding> out;
    if (!entry.is_formula() || entry.extent_lost) return out;
    const auto& impl = index.impl();
    const GenericFormula* g = entry.current_generic();
    if (!g) return out;
    if (holds_ref_error(*g)) out.push_back(make_finding(entry, entry.extent, FindingCode::NotWatched, "formula holds #REF!"));
    auto it = impl.slots.find(entry.id);
    if (it == impl.slots.end()) return out;
    for (const auto& slot : it->second) {
        std::string text;
        try {
            Reference a1 = r1c1_to_a1(FormulaAst{Notation::R1C1, Node::make_ref(slot.ref)}, entry.extent.top,
                                      entry.extent.left)
                               .root.ref;
            text = render_reference(a1, Notation::A1);
        } catch (const SleuthError&) {
            text = render_reference(slot.ref, Notation::R1C1);
        }
        if (!slot.region) {
            out.push_back(make_finding(entry, entry.extent, FindingCode::NotWatched,
                                       "reference " + text + " cannot be resolved"));
            continue;
        }
        const AreaExtent& region = *slot.region;
        if (entry.extent.contains(region)) continue;
        long long remainder = region.size() - overlap_size(region, entry.extent);
        long long covered = 0;
        std::string partial;
        impl.owners.query(region, [&](const auto& item) {
            if (item.value == entry.id) return;
            if (!region.contains(item.extent)) partial = item.value;
            covered += overlap_size(region, item.extent);
        });
        if (!partial.empty())
            out.push_back(make_finding(entry, entry.extent, FindingCode::NotWatched,
                                       "reference " + text + " reads " + format_location(region) +
                                           " which covers part of watched entry " + partial));
        else if (covered < remainder)
            out.push_back(make_finding(entry, entry.extent, FindingCode::NotWatched,
                                       "reference " + text + " reads " + format_location(region) +
                                           " which is not fully watched"));
    }
    return out;
}

std::vector<Finding> check_dependents(const ReconciliationIndex& index, const WatchEntry& entry) {
    std::vector<Finding> out;
    if (entry.kind == AreaKind::GuardArea || entry.extent_lost) return out;
    const auto& impl = index.impl();
    bool matched = false;
    std::string inconsistent;
    impl.watched_regions.query(entry.extent, [&](const auto& item) {
        if (item.value.entry_id == entry.id) return;
        if (item.value.extent.contains(entry.extent)) matched = true;
        else if (inconsistent.empty()) inconsistent = item.value.entry_id;
    });
    bool unwatched = false;
    impl.unwatched_regions.query(entry.extent, [&](const auto&) { unwatched = true; });

    if (!matched && inconsistent.empty() && !unwatched) {
        if (entry.kind == AreaKind::DataArea)
            out.push_back(make_finding(entry, entry.extent, FindingCode::DataNotReferred));
        else if (entry.status != EntryStatus::FinalResult)
            out.push_back(make_finding(entry, entry.extent, FindingCode::CandidateFinalResult));
    } else if (!inconsistent.empty()) {
        out.push_back(make_finding(entry, entry.extent, FindingCode::InconsistentDependent,
                                   "watched entry " + inconsistent + " reads only part of this area"));
    } else if (!matched) {
        out.push_back(make_finding(entry, entry.extent, FindingCode::UnwatchedDependent));
    }
    return out;
}

std::vector<Finding> check_dollaring(const ReconciliationIndex& index, const WatchEntry& entry) {
    std::vector<Finding> out;
    if (!entry.is_formula() || entry.extent_lost) return out;
    const GenericFormula* g = entry.current_generic();
    if (!g) return out;
    const auto& impl = index.impl();
    const int h = entry.extent.height();
    const int w = entry.extent.width();
    if (h == 1 && w == 1) return out;
    FormulaAst a1;
    try {
        a1 = r1c1_to_a1(g->ast, entry.extent.top, entry.extent.left);
    } catch (const SleuthError&) {
        return out;
    }
    for (const auto& ref : extract_references(a1)) {
        if (ref.kind != RefKind::Cell) continue;
        auto target = target_sheet(impl.set, ref, entry.extent.workbook, entry.extent.sheet);
        if (!target) continue;
        const WatchEntry* owner = impl.owner_of({target->first, target->second, ref.first.row.value, ref.first.col.value});
        if (!owner || owner->id == entry.id) continue;
        const AreaExtent& o = owner->extent;
        bool need_row = false, need_col = false;
        if (o.single_cell()) {
            need_row = h > 1;
            need_col = w > 1;
        } else if (o.height() == 1) {
            need_row = h > 1;
        } else if (o.width() == 1) {
            need_col = w > 1;
        }
        std::string missing;
        if (need_row && !ref.first.row.absolute) missing = "row";
        if (need_col && !ref.first.col.absolute) missing += missing.empty() ? "column" : " and column";
        if (!missing.empty())
            out.push_back(make_finding(entry, entry.extent, FindingCode::VulnerableDollaring,
                                       "reference " + render_reference(ref, Notation::A1) + " to " +
                                           format_location(o) + " needs an absolute " + missing));
    }
    return out;
}

std::vector<Finding> check_precedents(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry) {
    return check_precedents(ReconciliationIndex(set, reg), entry);
}

std::vector<Finding> check_dependents(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry) {
    return check_dependents(ReconciliationIndex(set, reg), entry);
}

std::vector<Finding> check_dollaring(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry) {
    return check_dollaring(ReconciliationIndex(set, reg), entry);
}

std::vector<Finding> check_data(const WorkbookSet& set, const WatchEntry& entry) {
    std::vector<Finding> out;
    if (entry.is_formula()) return out;
    if (entry.extent_lost) {
        if (entry.kind == AreaKind::DataArea)
            out.push_back(make_finding(entry, entry.extent, FindingCode::BlankInData, "area deleted by an untracked edit"));
        return out;
    }
    const Workbook* wb = set.find(entry.extent.workbook);
    const Sheet* sheet = wb ? wb->find_sheet(entry.extent.sheet) : nullptr;
    if (!sheet) return out;
    const DataDescriptor* d = entry.data();
    std::map<FindingCode, std::set<GridKey>> cells;
    for (int r = entry.extent.top; r <= entry.extent.bottom; ++r)
        for (int c = entry.extent.left; c <= entry.extent.right; ++c) {
            const CellContent& cell = sheet->get(r, c);
            if (entry.kind == AreaKind::GuardArea) {
                if (!cell.is_blank()) cells[FindingCode::DataOverBlank].insert({r, c});
                continue;
            }
            if (cell.is_blank()) {
                if (!d || !d->accept_blank_as_zero) cells[FindingCode::BlankInData].insert({r, c});
            } else if (cell.is_formula()) {
                cells[FindingCode::FormulaInData].insert({r, c});
            } else if (d && (cell.kind == CellKind::Number) != (d->data_kind == DataKind::Numeric)) {
                cells[FindingCode::TypeMismatch].insert({r, c});
            } else if (d && d->bounds && cell.kind == CellKind::Number &&
                       (cell.number < d->bounds->lower || cell.number > d->bounds->upper)) {
                cells[FindingCode::OutOfBounds].insert({r, c});
            }
        }
    for (const auto& [code, set_cells] : cells)
        for (const auto& x : cover_rectangles(set_cells, entry.extent.workbook, entry.extent.sheet)) {
            Finding f = make_finding(entry, x, code);
            if (code == FindingCode::OutOfBounds)
                f.message = "<Data out of Bounds: lower " + short_number(d->bounds->lower) + ", upper " +
                            short_number(d->bounds->upper) + ".>";
            out.push_back(std::move(f));
        }
    return out;
}

namespace {

std::vector<Finding> run_checks(const WorkbookSet& set, const ReconciliationIndex& index, const WatchEntry& e) {
    std::vector<Finding> out;
    auto append = [&](std::vector<Finding> v) { out.insert(out.end(), v.begin(), v.end()); };
    if (e.is_formula()) {
        append(check_damage(set, e));
        append(check_precedents(index, e));
        append(check_dollaring(index, e));
    } else {
        append(check_data(set, e));
    }
    append(check_dependents(index, e));
    return out;
}

}  // namespace

std::vector<Finding> check_entry(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry) {
    ReconciliationIndex index(set, reg);
    return run_checks(set, index, entry);
}

Report check_all(const WorkbookSet& set, Registry& reg) {
    std::vector<std::string> touched;
    std::vector<std::string> ids;
    for (const auto& [id, e] : reg.entries()) ids.push_back(id);

    // The grid is the truth for the current generic: take it from each top-left cell.
    for (const auto& id : ids) {
        WatchEntry& e = reg.mutable_entry(id);
        if (!e.is_formula() || e.extent_lost) continue;
        const CellContent& tl = set.cell(e.extent.top_left());
        if (!tl.is_formula()) continue;
        try {
            GenericFormula g = GenericFormula::from_a1_at(tl.formula, e.extent.top, e.extent.left);
            if (!(AreaState(g) == e.current)) {
                e.current = std::move(g);
                e.modified_at = reg.now();
                refresh_derived(e);
                touched.push_back(id);
            }
        } catch (const SleuthError&) {
        }
        bool changed = !(e.current == e.last_watched);
        if (changed != e.change_flag) {
            e.change_flag = changed;
            touched.push_back(id);
        }
    }

    std::vector<Finding> findings;
    {
        ReconciliationIndex index(set, reg);
        for (const auto& [id, e] : reg.entries()) {
            auto f = run_checks(set, index, e);
            findings.insert(findings.end(), f.begin(), f.end());
        }
    }
    for (const auto& id : ids) {
        WatchEntry& e = reg.mutable_entry(id);
        bool err = std::any_of(findings.begin(), findings.end(),
                               [&](const Finding& f) { return f.entry_id == id && f.severity == Severity::Error; });
        if (err != e.error_flag) {
            e.error_flag = err;
            touched.push_back(id);
        }
    }
    std::sort(touched.begin(), touched.end(), IdLess());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    std::size_t errors = std::count_if(findings.begin(), findings.end(),
                                       [](const Finding& f) { return f.severity == Severity::Error; });
    reg.log(AuditVerb::Check,
            "check: " + std::to_string(errors) + " errors, " + std::to_string(findings.size() - errors) + " warnings",
            touched);
    return build_report(reg, std::move(findings), reg.now());
}

Report build_report(const Registry& reg, std::vector<Finding> findings, std::int64_t generated_at) {
    Report report;
    report.generated_at = generated_at;
    std::vector<const WatchEntry*> entries;
    for (const auto& [id, e] : reg.entries()) entries.push_back(&e);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const WatchEntry* a, const WatchEntry* b) { return extent_less(a->extent, b->extent); });
    for (const WatchEntry* e : entries) {
        ReportRow row;
        row.entry_id = e->id;
        row.modified_at = e->modified_at;
        row.error_flag = e->error_flag;
        row.change_flag = e->change_flag;
        row.extent = e->extent;
        row.location = format_location(e->extent);
        std::vector<std::string> seen;
        for (const auto& f : findings) {
            if (f.entry_id != e->id || std::find(seen.begin(), seen.end(), f.message) != seen.end()) continue;
            seen.push_back(f.message);
            if (!row.indications.empty()) row.indications += ' ';
            row.indications += f.message;
        }
        switch (e->kind) {
            case AreaKind::FormulaArea:
                if (const GenericFormula* g = e->current_generic()) {
                    try {
                        row.formula_string = g->a1_at(e->extent.top, e->extent.left);
                    } catch (const SleuthError&) {
                        row.formula_string = g->r1c1_text;
                    }
                }
                break;
            case AreaKind::DataArea:
                row.formula_string = e->extent.single_cell() ? "----- Data Cell -----" : "----- Data Area -----";
                break;
            case AreaKind::GuardArea: row.formula_string = "----- Guard Area -----"; break;
        }
        report.rows.push_back(std::move(row));
    }
    report.findings = std::move(findings);
    return report;
}

}  // namespace sleuth
