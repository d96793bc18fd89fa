#pragma once

#include <stdexcept>
#include <string>

namespace rtsched {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// config/parse/reference/range -> 2, integrity -> 3.

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A lookup referenced an unknown entity (machine, protocol, course, ...).
struct ReferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A date fell outside the configured calendar span.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An input schedule (or internal state) violates the capacity model.
// Never repaired silently.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric was requested for a course it is not defined on.
struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Oracle instance exceeds the hard size cap.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rtsched
