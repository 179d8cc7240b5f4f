#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace microevent::assets {

// Compiled-in copy of a file from assets/ or config/ (stopwords.txt,
// sentiment_lexicon.tsv, seed_lexicon.json, schema.json).
std::optional<std::string_view> find(std::string_view name);

// Same as find() but throws InputError when the asset is unknown.
std::string load(std::string_view name);

}  // namespace microevent::assets
