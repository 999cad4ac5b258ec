#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sleuth/registry.hpp"

namespace sleuth {

// How a structural edit relocates cells and the rectangles that references
// and watched extents denote. Coordinates are those before the edit.
class ReferenceMap {
public:
    virtual ~ReferenceMap() = default;
    // Where a cell's content ends up; empty when it is deleted or overwritten.
    virtual std::optional<CellAddr> map_cell(const CellAddr& a) const = 0;
    // New rectangle for a formula reference; empty means #REF!.
    virtual std::optional<AreaExtent> map_extent(const AreaExtent& e) const = 0;
    // New rectangle for a watched extent or defined name; empty means lost.
    virtual std::optional<AreaExtent> map_watched(const AreaExtent& e) const { return map_extent(e); }
    virtual std::string describe() const = 0;
};

class LineInsertMap : public ReferenceMap {
public:
    LineInsertMap(std::string workbook, std::string sheet, Axis axis, int at, int count);
    std::optional<CellAddr> map_cell(const CellAddr& a) const override;
    std::optional<AreaExtent> map_extent(const AreaExtent& e) const override;
    std::string describe() const override;

private:
    std::string workbook_, sheet_;
    Axis axis_;
    int at_, count_;
};

class LineDeleteMap : public ReferenceMap {
public:
    LineDeleteMap(std::string workbook, std::string sheet, Axis axis, int at, int count);
    std::optional<CellAddr> map_cell(const CellAddr& a) const override;
    std::optional<AreaExtent> map_extent(const AreaExtent& e) const override;
    std::string describe() const override;

private:
    std::string workbook_, sheet_;
    Axis axis_;
    int at_, count_;
};

// Cut a rectangle and paste it with its top-left at `dest`.
class CutPasteMap : public ReferenceMap {
public:
    CutPasteMap(AreaExtent source, CellAddr dest);
    std::optional<CellAddr> map_cell(const CellAddr& a) const override;
    std::optional<AreaExtent> map_extent(const AreaExtent& e) const override;
    std::optional<AreaExtent> map_watched(const AreaExtent& e) const override;
    std::string describe() const override;

    const AreaExtent& destination() const { return dest_; }

private:
    AreaExtent source_;
    AreaExtent dest_;
};

// Cut whole lines [first, last] and insert them before line `before`.
class LineMoveMap : public ReferenceMap {
public:
    LineMoveMap(std::string workbook, std::string sheet, Axis axis, int first, int last, int before);
    std::optional<CellAddr> map_cell(const CellAddr& a) const override;
    std::optional<AreaExtent> map_extent(const AreaExtent& e) const override;
    std::string describe() const override;

private:
    int permute(int i) const;

    std::string workbook_, sheet_;
    Axis axis_;
    int first_, last_, before_;
};

// Rewrites every reference of an A1 formula read at `old_host` for a cell
// that now lives at `new_host`.
FormulaAst adjust_formula(const WorkbookSet& set, const FormulaAst& a1, const CellAddr& old_host,
                          const CellAddr& new_host, const ReferenceMap& map);

// Relative copy of an A1 formula from one cell to another; refs pushed off
// the grid become #REF!.
std::string translate_formula(std::string_view a1_source, int from_row, int from_col, int to_row, int to_col);

// Applies the map to every cell, formula and defined name of the set, and to
// the extents of `reg` when given. With `track_generics` the stored generic
// formulas are transformed too. Returns the ids of entries that changed.
// Does not log.
std::vector<std::string> apply_reference_map(WorkbookSet& set, Registry* reg, const ReferenceMap& map,
                                             bool track_generics);

// Rewrites references in place, cells staying where they are: `fn` gets
// each resolved reference and its host cell and returns a replacement.
// Entry generics are rewritten with the entry's top-left cell as host.
// Returns the ids of entries whose generics changed. Does not log.
using ExtentRewrite = std::function<std::optional<AreaExtent>(const AreaExtent& target, const CellAddr& host)>;
std::vector<std::string> rewrite_references(WorkbookSet& set, Registry* reg, const ExtentRewrite& fn);

// Untracked edits as a spreadsheet host performs them. Registered extents
// follow the host's range tracking; stored generics do not change.
void raw_insert_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                      Axis axis, int at, int count);
void raw_delete_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                      Axis axis, int at, int count);
void raw_cut_paste(WorkbookSet& set, Registry* reg, const AreaExtent& source, const CellAddr& dest);
void raw_move_lines(WorkbookSet& set, Registry* reg, const std::string& workbook, const std::string& sheet,
                    Axis axis, int first, int last, int before);
// Copies the source cell over every cell of target, formulas relatively.
void raw_fill(WorkbookSet& set, const CellAddr& source, const AreaExtent& target);

}  // namespace sleuth
