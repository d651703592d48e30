#pragma once

#include <string_view>

// Generated at configure time from assets/colormaps/*.csv.
namespace resp::assets {
extern const std::string_view kParulaCsv;
extern const std::string_view kHsvCsv;
extern const std::string_view kJetCsv;
extern const std::string_view kHotCsv;
}  // namespace resp::assets
