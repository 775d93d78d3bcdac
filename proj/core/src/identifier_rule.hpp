#pragma once

#include <span>

#include "sp/grammar.hpp"

namespace sp::detail {

IdentifierInfo computeIdentifier(std::span<const Pattern> patterns, const ServiceRule& rule,
                                 std::size_t ordinal);

}  // namespace sp::detail
