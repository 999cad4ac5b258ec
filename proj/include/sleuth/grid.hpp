#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sleuth/address.hpp"

namespace sleuth {

enum class CellKind { Blank, Number, Text, Formula };

struct CellContent {
    CellKind kind = CellKind::Blank;
    double number = 0.0;
    std::string text;     // Text payload
    std::string formula;  // A1 source including the leading '='

    static CellContent blank() { return {}; }
    static CellContent of_number(double v) { return {CellKind::Number, v, {}, {}}; }
    static CellContent of_text(std::string s) { return {CellKind::Text, 0.0, std::move(s), {}}; }
    static CellContent of_formula(std::string f) { return {CellKind::Formula, 0.0, {}, std::move(f)}; }

    bool is_blank() const { return kind == CellKind::Blank; }
    bool is_formula() const { return kind == CellKind::Formula; }
    bool is_data() const { return kind == CellKind::Number || kind == CellKind::Text; }

    friend bool operator==(const CellContent& a, const CellContent& b);
};

// Payload syntax shared by SWT records and edit scripts.
CellContent parse_payload(std::string_view payload);
std::string format_payload(const CellContent& c);

struct NameDef {
    std::string name;
    AreaExtent target;

    friend bool operator==(const NameDef& a, const NameDef& b) {
        return a.name == b.name && a.target == b.target;
    }
};

using GridKey = std::pair<int, int>;  // (row, col)

class Sheet {
public:
    Sheet() = default;
    explicit Sheet(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    void rename(std::string name) { name_ = std::move(name); }

    const CellContent& get(int row, int col) const;
    // Setting Blank erases the cell.
    void set(int row, int col, CellContent content);
    void erase(int row, int col) { cells_.erase({row, col}); }

    const std::map<GridKey, CellContent>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    friend bool operator==(const Sheet& a, const Sheet& b) {
        return a.name_ == b.name_ && a.cells_ == b.cells_;
    }

private:
    std::string name_;
    std::map<GridKey, CellContent> cells_;
};

class Workbook {
public:
    Workbook() = default;
    explicit Workbook(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }

    bool has_sheet(std::string_view name) const;
    Sheet& sheet(std::string_view name);
    const Sheet& sheet(std::string_view name) const;
    Sheet* find_sheet(std::string_view name);
    const Sheet* find_sheet(std::string_view name) const;
    Sheet& add_sheet(std::string name);
    Sheet& ensure_sheet(std::string_view name);

    // Sheets in canonical (case-insensitive name) order.
    std::vector<const Sheet*> sheets() const;
    std::vector<Sheet*> sheets();

    const std::vector<NameDef>& names() const { return names_; }
    void define_name(NameDef def);
    std::vector<NameDef>& mutable_names() { return names_; }

    friend bool operator==(const Workbook& a, const Workbook& b);

private:
    std::string id_;
    std::map<std::string, Sheet> sheets_;  // keyed by lowercase name
    std::vector<NameDef> names_;
};

AreaExtent resolve_name(const Workbook& wb, std::string_view name);

// Several workbooks loaded together; inter-workbook links resolve by id.
class WorkbookSet {
public:
    Workbook& add(Workbook wb);
    bool has(std::string_view id) const;
    Workbook& get(std::string_view id);
    const Workbook& get(std::string_view id) const;
    Workbook* find(std::string_view id);
    const Workbook* find(std::string_view id) const;

    std::vector<const Workbook*> workbooks() const;
    std::vector<Workbook*> workbooks();
    bool empty() const { return books_.empty(); }
    // The id used for unqualified locations on the command line.
    std::string default_id() const;

    const CellContent& cell(const CellAddr& a) const;
    void set_cell(const CellAddr& a, CellContent c);

    friend bool operator==(const WorkbookSet& a, const WorkbookSet& b) { return a.books_ == b.books_; }

private:
    std::map<std::string, Workbook> books_;  // keyed by lowercase id
};

// SWT text codec.
Workbook parse_swt(std::string_view text, std::string id);
std::string to_swt(const Workbook& wb);

Workbook load_workbook(const std::filesystem::path& path);
void save_workbook(const Workbook& wb, const std::filesystem::path& path);

// A workbook set is a directory of `<id>.swt` files.
WorkbookSet load_workbook_set(const std::filesystem::path& dir);
void save_workbook_set(const WorkbookSet& set, const std::filesystem::path& dir);

Workbook ingest_csv(const std::filesystem::path& path, std::string_view sheet, Workbook wb);
Workbook ingest_csv_text(std::string_view csv, std::string_view sheet, Workbook wb);

}  // namespace sleuth
