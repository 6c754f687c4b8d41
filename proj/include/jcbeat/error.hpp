#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace jcbeat {

// Invalid input: bad parameters, dimension mismatches, malformed config.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation could not be carried out (step underflow, singular system, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace diag {

using Sink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed (tests capture them).
void warn(const std::string& message);
Sink set_sink(Sink sink);

} // namespace diag
} // namespace jcbeat
