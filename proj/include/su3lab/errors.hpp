#pragma once

#include <stdexcept>
#include <string>

namespace su3lab {

// Invalid parameter or option combination. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Allocation or other environment failure. The CLI maps this to exit code 3.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace su3lab
