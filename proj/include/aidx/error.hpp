#pragma once

#include <stdexcept>
#include <string>

namespace aidx {

/// Bad input: parameters, configs, shapes or files that fail validation.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A simulation or optimizer run that could not complete.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ValidationError(what);
}

} // namespace aidx
