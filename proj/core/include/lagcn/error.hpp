#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagcn {

/// Error raised by any lagcn module. The message is prefixed with the module
/// name ("graph-core: ...") so failures surfacing through the runner stay
/// attributable.
class Error : public std::runtime_error {
public:
    Error(std::string_view module, const std::string& message)
        : std::runtime_error(std::string(module) + ": " + message), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

[[noreturn]] inline void fail(std::string_view module, const std::string& message) {
    throw Error(module, message);
}

} // namespace lagcn
