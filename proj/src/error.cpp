#include "emosig/error.hpp"

#include <fmt/format.h>

namespace emosig {

FormatError::FormatError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
    : Error(fmt::format("{}:{}:{}: {}", source, line, column, what)),
      source_(source),
      line_(line),
      column_(column) {}

}  // namespace emosig
