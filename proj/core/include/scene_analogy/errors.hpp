#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace scene_analogy {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An input file could not be parsed. `context` carries the line or field path.
class FormatError : public Error {
public:
    FormatError(const std::string& context, const std::string& what)
        : Error(context.empty() ? what : context + ": " + what), context_(context) {}

    const std::string& context() const noexcept { return context_; }

private:
    std::string context_;
};

struct Diagnostic;

/// A parsed scene violated one or more structural invariants.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Input geometry is too degenerate for the requested fit.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// The planner found no path (or no free cell to snap to).
class UnreachableError : public Error {
public:
    using Error::Error;
};

}  // namespace scene_analogy
