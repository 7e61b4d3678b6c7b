#pragma once

#include <stdexcept>
#include <string>

namespace infprim {

// Thrown by belief statistics when the elite energy threshold excludes every
// candidate; callers typically respond by raising the threshold.
struct EmptyEliteSetError : std::runtime_error {
    explicit EmptyEliteSetError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when every candidate receives zero weight in a weighted uncertainty sum.
struct DegenerateWeightError : std::runtime_error {
    explicit DegenerateWeightError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a calibration instance lacks a unique ground state.
struct DegenerateInstanceError : std::runtime_error {
    explicit DegenerateInstanceError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace infprim
