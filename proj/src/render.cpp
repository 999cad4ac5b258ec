#include "sleuth/render.hpp"

#include <ctime>
#include <set>

#include "sleuth/error.hpp"

namespace sleuth {

namespace {

std::string table(const std::vector<std::vector<std::string>>& rows, const std::string& indent = "") {
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (width.size() <= i) width.push_back(0);
            width[i] = std::max(width[i], r[i].size());
        }
    std::string out;
    for (const auto& r : rows) {
        std::string line = indent;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

const char* kColumns[] = {"Date Modified", "Error Found", "Error Indications", "Change Detected", "Location",
                          "Formula String"};

std::string cell_text(const CellContent& c) {
    return c.is_formula() ? c.formula : format_payload(c);
}

}  // namespace

std::string format_timestamp(std::int64_t unix_seconds) {
    if (unix_seconds == 0) return "-";
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%d/%m/%y %H:%M", &tm);
    return buf;
}

std::string render_check_report(const Report& report, ReportFormat format) {
    std::string out;
    out += "# Sleuth check report, generated " + format_timestamp(report.generated_at) + " UTC\n";
    out += "# Indications:\n";
    for (FindingCode code : all_finding_codes())
        out += std::string("#   ") + canonical_message(code) + "  " + to_string(code) + ", " +
               to_string(default_severity(code)) + "\n";
    std::vector<std::vector<std::string>> rows;
    rows.emplace_back(std::begin(kColumns), std::end(kColumns));
    for (const auto& r : report.rows)
        rows.push_back({format_timestamp(r.modified_at), r.error_flag ? "ERROR" : "OK", r.indications,
                        r.change_flag ? "CHANGED" : "OK", r.location, r.formula_string});
    if (format == ReportFormat::Table) {
        out += table(rows);
    } else {
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "\t" : "") + r[i];
            out += "\n";
        }
    }
    out += "# " + std::to_string(report.error_count()) + " error(s), " + std::to_string(report.warning_count()) +
           " warning(s)\n";
    out += "# A reference is valid only when its extent coincides exactly with watched extents; "
           "a dependent reading part of a watched area is inconsistent.\n";
    return out;
}

std::string render_findings(const Report& report) {
    std::string out;
    for (const auto& f : report.findings) {
        out += std::string(to_string(f.severity)) + " " + f.entry_id + " " + format_location(f.location) + " " +
               f.message;
        if (!f.detail.empty()) out += " " + f.detail;
        if (f.fix_hint) out += " [master " + *f.fix_hint + "]";
        out += "\n";
    }
    return out;
}

namespace {

using CellKey = std::tuple<std::string, std::string, int, int>;

CellKey key_of(const CellAddr& a) { return {to_lower(a.workbook), to_lower(a.sheet), a.row, a.col}; }

// Formula cells inside a resolved reference, in row-major order.
std::vector<CellAddr> formula_cells(const WorkbookSet& set, const AreaExtent& x) {
    std::vector<CellAddr> out;
    const Workbook* wb = set.find(x.workbook);
    const Sheet* sheet = wb ? wb->find_sheet(x.sheet) : nullptr;
    if (!sheet) return out;
    for (auto it = sheet->cells().lower_bound({x.top, 0}); it != sheet->cells().end(); ++it) {
        auto [r, c] = it->first;
        if (r > x.bottom) break;
        if (c >= x.left && c <= x.right && it->second.is_formula()) out.push_back({x.workbook, x.sheet, r, c});
    }
    return out;
}

void trace_into(const WorkbookSet& set, const CellAddr& addr, int level, int depth, std::set<CellKey>& seen,
                std::string& out) {
    const CellContent& c = set.cell(addr);
    std::string indent(static_cast<std::size_t>(level) * 4, ' ');
    out += indent + format_location(addr) + "  " + c.formula + "\n";
    FormulaAst ast = parse(c.formula, Notation::A1);
    std::vector<std::vector<std::string>> rows{{"Level", "Reference Type", "Value"}};
    for (const auto& row : breakdown(ast, c.formula))
        rows.push_back({std::to_string(row.nesting_level), row.ref_type, row.value_text});
    out += table(rows, indent + "  ");
    if (level >= depth) return;
    for (const auto& ref : extract_references(ast)) {
        auto x = resolve_reference(set, ref, addr);
        if (!x) continue;
        for (const auto& next : formula_cells(set, *x))
            if (seen.insert(key_of(next)).second) trace_into(set, next, level + 1, depth, seen, out);
    }
}

}  // namespace

std::string render_trace(const WorkbookSet& set, const CellAddr& addr, int depth) {
    if (!set.cell(addr).is_formula())
        throw SleuthError(ErrorCode::NonFormulaCell, format_location(addr) + " does not hold a formula");
    std::set<CellKey> seen{key_of(addr)};
    std::string out;
    trace_into(set, addr, 0, std::max(depth, 0), seen, out);
    return out;
}

AreaExtent with_context(const AreaExtent& extent, int context) {
    AreaExtent e = extent;
    e.top = std::max(1, e.top - context);
    e.left = std::max(1, e.left - context);
    e.bottom = std::min(kMaxRows, e.bottom + context);
    e.right = std::min(kMaxCols, e.right + context);
    return e;
}

std::string render_grid(const WorkbookSet& set, const AreaExtent& region, const Report* annotate) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{""};
    for (int c = region.left; c <= region.right; ++c) header.push_back(column_letters(c));
    rows.push_back(header);
    for (int r = region.top; r <= region.bottom; ++r) {
        std::vector<std::string> line{std::to_string(r)};
        for (int c = region.left; c <= region.right; ++c) {
            CellAddr a{region.workbook, region.sheet, r, c};
            std::string text = cell_text(set.cell(a));
            if (annotate) {
                bool err = false, chg = false;
                for (const auto& f : annotate->findings)
                    if (f.severity == Severity::Error && f.location.contains(a)) err = true;
                for (const auto& row : annotate->rows)
                    if (row.change_flag && row.extent.contains(a)) chg = true;
                if (err) text += "!err";
                if (chg) text += "~chg";
            }
            line.push_back(text.empty() ? "." : text);
        }
        rows.push_back(std::move(line));
    }
    return format_location(region) + "\n" + table(rows);
}

}  // namespace sleuth
