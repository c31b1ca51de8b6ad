#pragma once

#include <stdexcept>
#include <string>

namespace tgorder {

// Base for every error the library throws. The CLI maps subclasses onto
// distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class UnknownTaskId : public Error {
public:
    using Error::Error;
};

class UnknownBenchmark : public Error {
public:
    using Error::Error;
};

class UnresolvableDuration : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

}  // namespace tgorder
