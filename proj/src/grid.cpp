#include "sleuth/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sleuth/error.hpp"

namespace sleuth {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number_literal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string number_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

const CellContent kBlank{};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SleuthError(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SleuthError(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw SleuthError(ErrorCode::Io, "write failed for " + path.string());
}

// Splits `<location> := <payload>`; the location may hold a quoted sheet name.
std::pair<std::string_view, std::string_view> split_record(std::string_view line, std::size_t lineno) {
    std::size_t i = 0;
    if (!line.empty() && line[0] == '\'') {
        i = 1;
        while (i < line.size()) {
            if (line[i] == '\'') {
                if (i + 1 < line.size() && line[i + 1] == '\'') {
                    i += 2;
                    continue;
                }
                break;
            }
            ++i;
        }
    }
    std::size_t sep = line.find(":=", i);
    if (sep == std::string_view::npos) throw ParseError("SWT record lacks ':='", lineno);
    return {trim(line.substr(0, sep)), trim(line.substr(sep + 2))};
}

}  // namespace

bool operator==(const CellContent& a, const CellContent& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case CellKind::Blank: return true;
        case CellKind::Number: return a.number == b.number;
        case CellKind::Text: return a.text == b.text;
        case CellKind::Formula: return a.formula == b.formula;
    }
    return false;
}

CellContent parse_payload(std::string_view payload) {
    payload = trim(payload);
    if (payload.empty()) throw SleuthError(ErrorCode::Parse, "empty payload");
    if (payload.front() == '=') return CellContent::of_formula(std::string(payload));
    if (payload.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (;;) {
            if (i >= payload.size()) throw SleuthError(ErrorCode::Parse, "unterminated string payload");
            char c = payload[i++];
            if (c == '"') {
                if (i < payload.size() && payload[i] == '"') {
                    out += '"';
                    ++i;
                    continue;
                }
                break;
            }
            out += c;
        }
        if (i != payload.size()) throw SleuthError(ErrorCode::Parse, "trailing text after string payload");
        return CellContent::of_text(std::move(out));
    }
    if (auto v = parse_number_literal(payload)) return CellContent::of_number(*v);
    throw SleuthError(ErrorCode::Parse, "payload '" + std::string(payload) + "' is not a number, string or formula");
}

std::string format_payload(const CellContent& c) {
    switch (c.kind) {
        case CellKind::Number: return number_text(c.number);
        case CellKind::Text: {
            std::string out = "\"";
            for (char ch : c.text) {
                if (ch == '"') out += '"';
                out += ch;
            }
            return out + "\"";
        }
        case CellKind::Formula: return c.formula;
        case CellKind::Blank: return {};
    }
    return {};
}

const CellContent& Sheet::get(int row, int col) const {
    auto it = cells_.find({row, col});
    return it == cells_.end() ? kBlank : it->second;
}

void Sheet::set(int row, int col, CellContent content) {
    if (content.is_blank()) {
        cells_.erase({row, col});
        return;
    }
    cells_[{row, col}] = std::move(content);
}

bool Workbook::has_sheet(std::string_view name) const { return sheets_.count(to_lower(name)) > 0; }

Sheet* Workbook::find_sheet(std::string_view name) {
    auto it = sheets_.find(to_lower(name));
    return it == sheets_.end() ? nullptr : &it->second;
}

const Sheet* Workbook::find_sheet(std::string_view name) const {
    auto it = sheets_.find(to_lower(name));
    return it == sheets_.end() ? nullptr : &it->second;
}

Sheet& Workbook::sheet(std::string_view name) {
    if (auto* s = find_sheet(name)) return *s;
    throw SleuthError(ErrorCode::UnknownSheet, "no sheet '" + std::string(name) + "' in workbook " + id_);
}

const Sheet& Workbook::sheet(std::string_view name) const {
    if (const auto* s = find_sheet(name)) return *s;
    throw SleuthError(ErrorCode::UnknownSheet, "no sheet '" + std::string(name) + "' in workbook " + id_);
}

Sheet& Workbook::add_sheet(std::string name) {
    auto key = to_lower(name);
    if (sheets_.count(key)) throw SleuthError(ErrorCode::SheetExists, "sheet '" + name + "' already exists");
    return sheets_.emplace(key, Sheet(std::move(name))).first->second;
}

Sheet& Workbook::ensure_sheet(std::string_view name) {
    if (auto* s = find_sheet(name)) return *s;
    return add_sheet(std::string(name));
}

std::vector<const Sheet*> Workbook::sheets() const {
    std::vector<const Sheet*> out;
    for (const auto& [k, s] : sheets_) out.push_back(&s);
    return out;
}

std::vector<Sheet*> Workbook::sheets() {
    std::vector<Sheet*> out;
    for (auto& [k, s] : sheets_) out.push_back(&s);
    return out;
}

void Workbook::define_name(NameDef def) {
    for (const auto& n : names_)
        if (iequals(n.name, def.name))
            throw SleuthError(ErrorCode::Parse, "name '" + def.name + "' defined twice");
    if (def.target.workbook.empty()) def.target.workbook = id_;
    names_.push_back(std::move(def));
    std::sort(names_.begin(), names_.end(),
              [](const NameDef& a, const NameDef& b) { return to_lower(a.name) < to_lower(b.name); });
}

bool operator==(const Workbook& a, const Workbook& b) {
    return a.id_ == b.id_ && a.sheets_ == b.sheets_ && a.names_ == b.names_;
}

AreaExtent resolve_name(const Workbook& wb, std::string_view name) {
    for (const auto& n : wb.names())
        if (iequals(n.name, name)) return n.target;
    throw SleuthError(ErrorCode::UnknownName, "unknown name '" + std::string(name) + "'");
}

Workbook& WorkbookSet::add(Workbook wb) {
    auto key = to_lower(wb.id());
    books_.erase(key);
    return books_.emplace(key, std::move(wb)).first->second;
}

bool WorkbookSet::has(std::string_view id) const { return books_.count(to_lower(id)) > 0; }

Workbook* WorkbookSet::find(std::string_view id) {
    auto it = books_.find(to_lower(id));
    return it == books_.end() ? nullptr : &it->second;
}

const Workbook* WorkbookSet::find(std::string_view id) const {
    auto it = books_.find(to_lower(id));
    return it == books_.end() ? nullptr : &it->second;
}

Workbook& WorkbookSet::get(std::string_view id) {
    if (auto* w = find(id)) return *w;
    throw SleuthError(ErrorCode::UnknownSheet, "no workbook '" + std::string(id) + "' in the set");
}

const Workbook& WorkbookSet::get(std::string_view id) const {
    if (const auto* w = find(id)) return *w;
    throw SleuthError(ErrorCode::UnknownSheet, "no workbook '" + std::string(id) + "' in the set");
}

std::vector<const Workbook*> WorkbookSet::workbooks() const {
    std::vector<const Workbook*> out;
    for (const auto& [k, w] : books_) out.push_back(&w);
    return out;
}

std::vector<Workbook*> WorkbookSet::workbooks() {
    std::vector<Workbook*> out;
    for (auto& [k, w] : books_) out.push_back(&w);
    return out;
}

std::string WorkbookSet::default_id() const { return books_.empty() ? std::string() : books_.begin()->second.id(); }

const CellContent& WorkbookSet::cell(const CellAddr& a) const {
    const Workbook* wb = find(a.workbook);
    if (!wb) return kBlank;
    const Sheet* s = wb->find_sheet(a.sheet);
    if (!s) return kBlank;
    return s->get(a.row, a.col);
}

void WorkbookSet::set_cell(const CellAddr& a, CellContent c) {
    if (!a.valid()) throw SleuthError(ErrorCode::OutOfGrid, "cell outside the grid");
    Workbook* wb = find(a.workbook);
    if (!wb) wb = &add(Workbook(a.workbook));
    wb->ensure_sheet(a.sheet).set(a.row, a.col, std::move(c));
}

Workbook parse_swt(std::string_view text, std::string id) {
    Workbook wb(std::move(id));
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        try {
            if (line.rfind("@sheet ", 0) == 0) {
                std::string_view name = trim(line.substr(7));
                if (!name.empty() && name.front() == '\'') {
                    std::string unq;
                    for (std::size_t i = 1; i + 1 < name.size(); ++i) {
                        unq += name[i];
                        if (name[i] == '\'') ++i;
                    }
                    wb.ensure_sheet(unq);
                } else {
                    wb.ensure_sheet(name);
                }
                continue;
            }
            if (line.rfind("@name ", 0) == 0) {
                auto [lhs, rhs] = split_record(line.substr(6), lineno);
                NameDef def;
                def.name = std::string(lhs);
                def.target = parse_extent(rhs, wb.id(), {});
                def.target.workbook = wb.id();
                wb.define_name(std::move(def));
                continue;
            }
            auto [lhs, rhs] = split_record(line, lineno);
            CellAddr addr = parse_cell(lhs, wb.id(), {});
            CellContent content = parse_payload(rhs);
            Sheet& sheet = wb.ensure_sheet(addr.sheet);
            if (!sheet.get(addr.row, addr.col).is_blank())
                throw SleuthError(ErrorCode::DuplicateCell,
                                  "line " + std::to_string(lineno) + ": cell " + format_location(addr) + " defined twice");
            sheet.set(addr.row, addr.col, std::move(content));
        } catch (const SleuthError& e) {
            if (e.code() == ErrorCode::DuplicateCell) throw;
            throw SleuthError(ErrorCode::Parse, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return wb;
}

std::string to_swt(const Workbook& wb) {
    std::string out;
    for (const auto& n : wb.names()) out += "@name " + n.name + " := " + format_location(n.target) + "\n";
    for (const Sheet* s : wb.sheets()) {
        if (s->cells().empty()) {
            out += "@sheet " + quote_sheet(s->name()) + "\n";
            continue;
        }
        std::string prefix = quote_sheet(s->name()) + "!";
        for (const auto& [key, content] : s->cells())
            out += prefix + format_a1(key.first, key.second) + " := " + format_payload(content) + "\n";
    }
    return out;
}

Workbook load_workbook(const std::filesystem::path& path) {
    return parse_swt(read_file(path), path.stem().string());
}

void save_workbook(const Workbook& wb, const std::filesystem::path& path) { write_file(path, to_swt(wb)); }

WorkbookSet load_workbook_set(const std::filesystem::path& dir) {
    WorkbookSet set;
    if (std::filesystem::is_regular_file(dir)) {
        set.add(load_workbook(dir));
        return set;
    }
    if (!std::filesystem::is_directory(dir)) throw SleuthError(ErrorCode::Io, "no workbook set at " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".swt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) set.add(load_workbook(f));
    return set;
}

void save_workbook_set(const WorkbookSet& set, const std::filesystem::path& dir) {
    if (std::filesystem::is_regular_file(dir)) {
        auto books = set.workbooks();
        if (books.size() != 1) throw SleuthError(ErrorCode::Io, "a single file can hold only one workbook");
        save_workbook(*books.front(), dir);
        return;
    }
    std::filesystem::create_directories(dir);
    for (const Workbook* wb : set.workbooks()) save_workbook(*wb, dir / (wb->id() + ".swt"));
}

Workbook ingest_csv_text(std::string_view csv, std::string_view sheet_name, Workbook wb) {
    if (wb.has_sheet(sheet_name))
        throw SleuthError(ErrorCode::SheetExists, "sheet '" + std::string(sheet_name) + "' already exists");
    Sheet& sheet = wb.add_sheet(std::string(sheet_name));
    int row = 1, col = 1;
    std::string field;
    bool quoted = false, was_quoted = false;
    auto flush = [&] {
        if (!field.empty() || was_quoted) {
            CellContent c;
            if (was_quoted) c = CellContent::of_text(field);
            else if (field.front() == '=') c = CellContent::of_formula(field);
            else if (auto v = parse_number_literal(trim(field))) c = CellContent::of_number(*v);
            else c = CellContent::of_text(field);
            sheet.set(row, col, std::move(c));
        }
        field.clear();
        was_quoted = false;
    };
    for (std::size_t i = 0; i < csv.size(); ++i) {
        char c = csv[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < csv.size() && csv[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            flush();
            ++col;
        } else if (c == '\n') {
            flush();
            ++row;
            col = 1;
        } else if (c != '\r') {
            field += c;
        }
    }
    flush();
    return wb;
}

Workbook ingest_csv(const std::filesystem::path& path, std::string_view sheet, Workbook wb) {
    return ingest_csv_text(read_file(path), sheet, std::move(wb));
}

}  // namespace sleuth
