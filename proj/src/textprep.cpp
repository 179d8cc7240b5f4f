#include "microevent/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include "microevent/assets.hpp"
#include "microevent/error.hpp"
#include "microevent/porter_stemmer.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

bool iequal_at(std::string_view text, std::size_t pos, std::string_view lower) {
  if (pos + lower.size() > text.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != lower[i]) return false;
  }
  return true;
}

// Opening tag named `name` at pos ("<name>", "<name attr...>").
bool opens_tag(std::string_view text, std::size_t pos, std::string_view name) {
  if (text[pos] != '<' || !iequal_at(text, pos + 1, name)) return false;
  const std::size_t after = pos + 1 + name.size();
  if (after >= text.size()) return true;
  const char c = text[after];
  return c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c));
}

std::size_t find_close(std::string_view text, std::size_t from, std::string_view name) {
  const std::string closing = "</" + std::string(name);
  for (std::size_t i = from; i < text.size(); ++i) {
    if (text[i] == '<' && iequal_at(text, i, closing)) {
      const std::size_t gt = text.find('>', i);
      return gt == std::string_view::npos ? text.size() : gt + 1;
    }
  }
  return text.size();
}

std::string remove_blocks(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      std::string_view block;
      if (opens_tag(text, i, "code")) block = "code";
      else if (opens_tag(text, i, "pre")) block = "pre";
      if (!block.empty()) {
        i = find_close(text, i + 1, block);
        out.push_back(' ');
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string remove_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<' && i + 1 < text.size()) {
      const char c = text[i + 1];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '/' || c == '!' || c == '?') {
        const std::size_t gt = text.find('>', i);
        if (gt != std::string_view::npos) {
          out.push_back(' ');
          i = gt + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    bool space = std::isspace(c) != 0;
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      space = true;
      ++i;
    }
    if (space) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string strip_markup(std::string_view body_raw) {
  std::string text = remove_tags(remove_blocks(body_raw));
  for (;;) {
    std::string decoded = decode_entities(text);
    if (decoded == text) break;
    text = std::move(decoded);
  }
  std::replace(text.begin(), text.end(), '<', ' ');
  std::replace(text.begin(), text.end(), '>', ' ');
  return collapse_whitespace(text);
}

Stopwords read_stopwords(std::istream& in) {
  Stopwords words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(to_lower_ascii(t));
  }
  return words;
}

const Stopwords& default_stopwords() {
  static const Stopwords words = [] {
    std::istringstream in(assets::load("stopwords.txt"));
    return read_stopwords(in);
  }();
  return words;
}

std::vector<std::string> tokenize_normalize(std::string_view clean_text, const Stopwords& stopwords) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 3 && !all_digits(current) && !stopwords.count(current)) {
      out.push_back(porter_stem(current));
    }
    current.clear();
  };
  for (char ch : clean_text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

PhraseModel PhraseModel::fit(std::span<const std::vector<std::string>> streams, std::size_t min_count,
                             double threshold) {
  if (min_count < 1) throw Error("collocations: min_count must be >= 1");
  PhraseModel model;
  model.min_count_ = min_count;
  for (const auto& s : streams) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      ++model.unigram_[s[i]];
      if (i + 1 < s.size()) ++model.bigram_[{s[i], s[i + 1]}];
    }
  }
  for (const auto& [pair, count] : model.bigram_) {
    if (count < min_count) continue;
    if (model.score(pair.first, pair.second) >= threshold) model.pairs_.insert(pair);
  }
  return model;
}

double PhraseModel::score(const std::string& a, const std::string& b) const {
  auto it = bigram_.find({a, b});
  if (it == bigram_.end()) return 0.0;
  const double ca = static_cast<double>(unigram_.at(a));
  const double cb = static_cast<double>(unigram_.at(b));
  const double n = static_cast<double>(unigram_.size());
  return (static_cast<double>(it->second) - static_cast<double>(min_count_)) * n / (ca * cb);
}

std::vector<std::string> PhraseModel::apply(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 1 < tokens.size() && pairs_.count({tokens[i], tokens[i + 1]})) {
      out.push_back(tokens[i] + "_" + tokens[i + 1]);
      i += 2;
    } else {
      out.push_back(tokens[i++]);
    }
  }
  return out;
}

std::vector<std::string> Collocations::apply(std::span<const std::string> tokens) const {
  auto first = bigrams.apply(tokens);
  return trigrams.apply(first);
}

Collocations detect_collocations(std::span<const std::vector<std::string>> streams, std::size_t min_count,
                                 double threshold) {
  Collocations c;
  c.bigrams = PhraseModel::fit(streams, min_count, threshold);
  std::vector<std::vector<std::string>> joined;
  joined.reserve(streams.size());
  for (const auto& s : streams) joined.push_back(c.bigrams.apply(s));
  c.trigrams = PhraseModel::fit(joined, min_count, threshold);
  return c;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df)
    : tokens_(std::move(tokens)), df_(std::move(df)) {
  if (tokens_.size() != df_.size()) throw Error("vocabulary: token/df size mismatch");
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw InputError("vocabulary: duplicate token " + tokens_[i]);
  }
}

std::optional<std::uint32_t> Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\t' << df_[i] << '\n';
}

Vocabulary Vocabulary::read_tsv(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<std::size_t> df;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 3) throw InputError("vocabulary TSV: expected 3 fields");
    if (std::stoul(f[1]) != tokens.size()) throw InputError("vocabulary TSV: ids not contiguous");
    tokens.push_back(f[0]);
    df.push_back(std::stoul(f[2]));
  }
  return Vocabulary(std::move(tokens), std::move(df));
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> train_streams, std::size_t min_df,
                            double max_df_fraction) {
  std::map<std::string, std::size_t> df;
  for (const auto& s : train_streams) {
    std::set<std::string_view> seen(s.begin(), s.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  const double docs = static_cast<double>(train_streams.size());
  std::vector<std::string> tokens;
  std::vector<std::size_t> counts;
  for (const auto& [token, n] : df) {
    if (n < min_df || static_cast<double>(n) / docs > max_df_fraction) continue;
    tokens.push_back(token);
    counts.push_back(n);
  }
  if (tokens.empty()) throw Error("empty vocabulary");
  return Vocabulary(std::move(tokens), std::move(counts));
}

BowVector encode_bow(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (auto id = vocab.id(t)) ++counts[*id];
  }
  return BowVector(counts.begin(), counts.end());
}

std::vector<std::uint32_t> encode_ids(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = vocab.id(t)) ids.push_back(*id);
  }
  return ids;
}

}  // namespace microevent
