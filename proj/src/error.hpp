#pragma once

#include <stdexcept>
#include <string>

namespace octo {

enum class ErrorKind {
    InvalidArgument,
    Format,
    Io,
    Runtime,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(std::string msg) { throw Error(ErrorKind::InvalidArgument, std::move(msg)); }
[[noreturn]] inline void throw_format(std::string msg) { throw Error(ErrorKind::Format, std::move(msg)); }
[[noreturn]] inline void throw_io(std::string msg) { throw Error(ErrorKind::Io, std::move(msg)); }
[[noreturn]] inline void throw_runtime(std::string msg) { throw Error(ErrorKind::Runtime, std::move(msg)); }

} // namespace octo
