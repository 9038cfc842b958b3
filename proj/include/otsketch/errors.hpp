#pragma once

#include <stdexcept>
#include <string>

namespace otsketch {

// Precondition violations throw; recoverable iteration outcomes are reported
// through status fields instead (see SolveReport / DescentReport / AdmmReport).

struct ZeroMassDensity : std::runtime_error {
    explicit ZeroMassDensity(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateSites : std::runtime_error {
    explicit DuplicateSites(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyCellEncountered : std::runtime_error {
    explicit EmptyCellEncountered(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedFormat : std::runtime_error {
    explicit UnsupportedFormat(const std::string& what) : std::runtime_error(what) {}
};

struct SingularKkt : std::runtime_error {
    explicit SingularKkt(const std::string& what) : std::runtime_error(what) {}
};

struct BadInput : std::runtime_error {
    explicit BadInput(const std::string& what) : std::runtime_error(what) {}
};

} // namespace otsketch
