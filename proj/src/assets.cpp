#include "microevent/assets.hpp"

#include "microevent/error.hpp"

namespace microevent::assets {

std::string load(std::string_view name) {
  auto data = find(name);
  if (!data) throw InputError("unknown embedded asset: " + std::string(name));
  return std::string(*data);
}

}  // namespace microevent::assets
