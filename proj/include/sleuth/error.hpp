#pragma once

#include <stdexcept>
#include <string>

namespace sleuth {

enum class ErrorCode {
    Parse,
    DuplicateCell,
    Io,
    UnknownName,
    UnknownSheet,
    SheetExists,
    OutOfGrid,
    NotUniform,
    NonFormulaCell,
    Unclassifiable,
    Overlap,
    Capacity,
    ReferenceLimit,
    MixedContent,
    UnknownId,
    ShapeMismatch,
    UnknownGroup,
    AnchorOutside,
    WouldEmpty,
    GuardDeletion,
    DestinationCollision,
    UnwatchedSource,
    SplitRange,
    Irreparable,
    Mode,
    Version,
    Corrupt,
    Locked,
    Usage,
    Cycle,
    Unsupported,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
class SleuthError : public std::runtime_error {
public:
    SleuthError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Parse failures carry the character offset (formulas) or line number (files).
class ParseError : public SleuthError {
public:
    ParseError(const std::string& what, std::size_t position)
        : SleuthError(ErrorCode::Parse, what + " at " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace sleuth
