#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

/// Broken precondition or shape mismatch: a caller bug, not a runtime condition.
class contract_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite values or a numeric tolerance exceeded during computation.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (unknown method, budget mismatch, ...).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw contract_violation(what);
}

} // namespace coevo
