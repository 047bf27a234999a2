#ifndef DEFLAMG_ERRORS_HPP
#define DEFLAMG_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deflamg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
    public:
        using Error::Error;
};

/// A (dense) factorization met a pivot that is zero to working precision.
class SingularMatrixError : public Error {
    public:
        using Error::Error;
};

/// The matrix structure is unusable for the requested operation
/// (zero diagonal, unsorted columns, empty SPAI-0 row, ...).
class StructureError : public Error {
    public:
        using Error::Error;
};

class PartitionError : public Error {
    public:
        using Error::Error;
};

/// Collective called with inconsistent participants or payloads.
class CommunicatorError : public Error {
    public:
        using Error::Error;
};

/// Malformed input file. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
    public:
        ParseError(const std::string &what, std::size_t line = 0)
            : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
              line_(line) {}

        std::size_t line() const { return line_; }

    private:
        std::size_t line_;
};

/// Invalid configuration. path() is the dotted path of the offending key.
class ConfigError : public Error {
    public:
        ConfigError(const std::string &path, const std::string &what)
            : Error(path.empty() ? what : path + ": " + what), path_(path) {}

        const std::string& path() const { return path_; }

    private:
        std::string path_;
};

} // namespace deflamg

#endif
