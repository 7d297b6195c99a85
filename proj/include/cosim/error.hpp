#pragma once

#include <stdexcept>
#include <string>

namespace cosim {

/// Root of every error raised by the framework. Each module derives its own
/// named failures from this so callers can catch per category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define COSIM_DEFINE_ERROR(Name, Base)          \
    class Name : public Base {                  \
    public:                                     \
        using Base::Base;                       \
    }

}  // namespace cosim
