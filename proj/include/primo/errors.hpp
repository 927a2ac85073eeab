#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace primo {

// Precondition on an argument was violated (non-cube focus, bad index...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A point or index lies outside the region it must be located in.
class OutOfBoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A well-formed request the domain cannot satisfy (capacity, empty data...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text or bytes. `location` is a 1-based line number for
// text formats and a byte offset for binary ones.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t location)
        : std::runtime_error(what), location_(location) {}

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

// A document or event does not follow the expected schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An internal invariant did not hold (a bug, not bad input).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An event log entry that cannot be replayed; `index` is 0-based.
class ReplayError : public SchemaError {
public:
    ReplayError(const std::string& what, std::size_t index) : SchemaError(what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace primo
