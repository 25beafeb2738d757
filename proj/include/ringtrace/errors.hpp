#pragma once

#include <stdexcept>
#include <string>

namespace ringtrace {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- ledger / ingestion ----

class UnknownOutputRef : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class HeightGap : public Error {
public:
    HeightGap(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateField : public Error {
public:
    DuplicateField(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---- deduction ----

/// The input data admits no consistent spend assignment (e.g. a candidate
/// set would become empty, or a branch has more rings than candidates).
class InconsistentLedger : public Error {
public:
    using Error::Error;
};

class UnknownKeyImage : public Error {
public:
    using Error::Error;
};

// ---- simulator ----

class ExhaustedDecoyPool : public Error {
public:
    using Error::Error;
};

// ---- oracle ----

class TooLarge : public Error {
public:
    using Error::Error;
};

class Unsatisfiable : public Error {
public:
    using Error::Error;
};

// ---- heuristics / reporting ----

class EmptyEvaluation : public Error {
public:
    using Error::Error;
};

class EmptyWindow : public Error {
public:
    using Error::Error;
};

} // namespace ringtrace
