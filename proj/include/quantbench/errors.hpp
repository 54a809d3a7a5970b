#pragma once

#include <stdexcept>
#include <string>

namespace quantbench {

// Error class drives the CLI exit code: Usage -> 1, Data -> 2, Model -> 3.
enum class ErrorClass { Usage, Data, Model };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& message)
        : std::runtime_error(message), cls_(cls) {}

    ErrorClass cls() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error(ErrorClass::Usage, message) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error(ErrorClass::Data, message) {}
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& message) : Error(ErrorClass::Model, message) {}
};

inline int exit_code_for(ErrorClass cls) {
    switch (cls) {
        case ErrorClass::Usage: return 1;
        case ErrorClass::Data: return 2;
        case ErrorClass::Model: return 3;
    }
    return 3;
}

} // namespace quantbench
