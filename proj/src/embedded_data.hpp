#pragma once

#include <string_view>

#include "mdaudit/types.hpp"

namespace mdaudit::embedded {

std::string_view registry_csv(SchemaId id);
// Empty for datacite-4.6.
std::string_view crosswalk_csv(SchemaId id);

}  // namespace mdaudit::embedded
