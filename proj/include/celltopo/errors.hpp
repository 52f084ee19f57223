#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace celltopo {

enum class Category {
    InvalidArgument,
    InvalidConfig,
    TooManyPoints,
    LargeInput,
    EmptyInput,
    MissingColumns,
    MalformedInput,
    IoError,
    MissingArtifact,
    TooFewPoints,
    DuplicatePoint,
    DegenerateAllCollinear,
    Collinear,
    TooLarge,
    CurveTooShort,
    SeriesTooShort,
    AllBlocksZeroVariance,
    IndexOutOfRange,
    InsufficientData,
    NoPositiveSamples,
    TooFewSamples,
    NonPositiveSample,
    NoConvergence,
};

constexpr std::string_view category_name(Category c) noexcept {
    switch (c) {
    case Category::InvalidArgument: return "InvalidArgument";
    case Category::InvalidConfig: return "InvalidConfig";
    case Category::TooManyPoints: return "TooManyPoints";
    case Category::LargeInput: return "LargeInput";
    case Category::EmptyInput: return "EmptyInput";
    case Category::MissingColumns: return "MissingColumns";
    case Category::MalformedInput: return "MalformedInput";
    case Category::IoError: return "IoError";
    case Category::MissingArtifact: return "MissingArtifact";
    case Category::TooFewPoints: return "TooFewPoints";
    case Category::DuplicatePoint: return "DuplicatePoint";
    case Category::DegenerateAllCollinear: return "DegenerateAllCollinear";
    case Category::Collinear: return "Collinear";
    case Category::TooLarge: return "TooLarge";
    case Category::CurveTooShort: return "CurveTooShort";
    case Category::SeriesTooShort: return "SeriesTooShort";
    case Category::AllBlocksZeroVariance: return "AllBlocksZeroVariance";
    case Category::IndexOutOfRange: return "IndexOutOfRange";
    case Category::InsufficientData: return "InsufficientData";
    case Category::NoPositiveSamples: return "NoPositiveSamples";
    case Category::TooFewSamples: return "TooFewSamples";
    case Category::NonPositiveSample: return "NonPositiveSample";
    case Category::NoConvergence: return "NoConvergence";
    }
    return "Unknown";
}

// Process exit status used by the CLI: 2 validation, 3 input, 4 geometry, 5 analysis.
constexpr int exit_code(Category c) noexcept {
    switch (c) {
    case Category::InvalidArgument:
    case Category::InvalidConfig:
    case Category::TooManyPoints:
    case Category::LargeInput:
        return 2;
    case Category::EmptyInput:
    case Category::MissingColumns:
    case Category::MalformedInput:
    case Category::IoError:
    case Category::MissingArtifact:
        return 3;
    case Category::TooFewPoints:
    case Category::DuplicatePoint:
    case Category::DegenerateAllCollinear:
    case Category::Collinear:
        return 4;
    default:
        return 5;
    }
}

class Error : public std::runtime_error {
public:
    Error(Category category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    Category category() const noexcept { return category_; }
    std::string_view name() const noexcept { return category_name(category_); }

private:
    Category category_;
};

[[noreturn]] inline void fail(Category c, const std::string& message) { throw Error(c, message); }

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(Category::InvalidArgument, message);
}

} // namespace celltopo
