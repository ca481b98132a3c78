#pragma once

#include <string>

namespace placeorigin {

/// UTC timestamp "YYYY-MM-DDTHH:MM:SSZ". When SOURCE_DATE_EPOCH is set, that
/// instant is used instead of the wall clock so repeated runs are
/// byte-identical.
std::string utc_timestamp();

}  // namespace placeorigin
