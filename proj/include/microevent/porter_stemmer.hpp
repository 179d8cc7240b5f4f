#pragma once

#include <string>
#include <string_view>

namespace microevent {

// Porter's original suffix-stripping algorithm (1980) for lowercase ASCII
// words. Words of two letters or fewer are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace microevent
