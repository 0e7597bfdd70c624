#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msou {

/// Malformed formula, tree, valuation or type text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset, std::size_t line, std::size_t column)
        : std::runtime_error(what + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + " (offset " + std::to_string(offset) + ")"),
          offset_(offset), line_(line), column_(column) {}

    std::size_t offset() const { return offset_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t offset_, line_, column_;
};

/// A node address that is not in the tree it is used with.
class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input does not conform to the alphabet / maximal arity in force.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A value does not have the shape its formula requires.
class ShapeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Enumeration cap, state cap, or formula-size budget exceeded.
class ResourceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Context typing: a hole without an assumed type, or a valuation that
/// reaches into a hole.
class HoleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Relabeling undefined at a node: zero or several sentences hold there.
class NotUniqueError : public std::runtime_error {
public:
    NotUniqueError(const std::string& address, std::size_t matches)
        : std::runtime_error("relabeling undefined at node " + address + ": " +
                             std::to_string(matches) + " sentences hold"),
          address_(address), matches_(matches) {}

    const std::string& address() const { return address_; }
    std::size_t matches() const { return matches_; }

private:
    std::string address_;
    std::size_t matches_;
};

} // namespace msou
