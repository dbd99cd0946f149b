#pragma once

#include <stdexcept>
#include <string>

namespace uwbdfl {

// Bad argument to a numeric routine (non-positive period, Nyquist violation, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A path would fall outside the synthesized capture window.
class DurationTooShort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Query time outside a trajectory or position log.
class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// No lag reached the correlation threshold.
class NoAlignment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed binary trace or CSV input.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace uwbdfl
