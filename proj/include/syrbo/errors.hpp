#pragma once

#include <stdexcept>
#include <string>

namespace syrbo {

// Problems with input files or their contents (maps to CLI exit code 2).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace syrbo
