#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace microevent {

// Removes <code>/<pre> blocks with their content (an unclosed block runs to
// the end of the text), replaces other tags by a space, decodes entities and
// collapses whitespace. strip_markup(strip_markup(x)) == strip_markup(x).
std::string strip_markup(std::string_view body_raw);

struct TokenStream {
  std::string message_id;
  std::vector<std::string> tokens;
};

using Stopwords = std::unordered_set<std::string>;

// One token per line; blank lines and lines starting with '#' are ignored.
Stopwords read_stopwords(std::istream& in);
const Stopwords& default_stopwords();

// Lowercase, split on non-alphanumerics, drop tokens shorter than 3 chars,
// pure numbers and stopwords, then Porter-stem. Stopwords are checked before
// stemming.
std::vector<std::string> tokenize_normalize(std::string_view clean_text, const Stopwords& stopwords);

// Adjacent-pair joiner. A pair (a, b) scores
//   (count(a,b) - min_count) * N / (count(a) * count(b))
// where N is the number of distinct token types seen at fit time.
class PhraseModel {
 public:
  PhraseModel() = default;

  static PhraseModel fit(std::span<const std::vector<std::string>> streams, std::size_t min_count, double threshold);

  // Greedy left-to-right join of accepted pairs into "a_b".
  std::vector<std::string> apply(std::span<const std::string> tokens) const;

  const std::set<std::pair<std::string, std::string>>& pairs() const { return pairs_; }
  double score(const std::string& a, const std::string& b) const;

 private:
  std::unordered_map<std::string, std::size_t> unigram_;
  std::map<std::pair<std::string, std::string>, std::size_t> bigram_;
  std::size_t min_count_ = 1;
  std::set<std::pair<std::string, std::string>> pairs_;
};

// Two stacked phrase models: the second one is fitted on the output of the
// first and so can form tri-grams ("a_b_c") and longer joins.
struct Collocations {
  PhraseModel bigrams;
  PhraseModel trigrams;

  std::vector<std::string> apply(std::span<const std::string> tokens) const;
};

Collocations detect_collocations(std::span<const std::vector<std::string>> streams, std::size_t min_count = 20,
                                 double threshold = 10.0);

// Sparse bag of words: (token id, count) sorted by id.
using BowVector = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

class Vocabulary {
 public:
  Vocabulary() = default;
  // Tokens and document frequencies; ids follow the given order.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df);

  std::size_t size() const { return tokens_.size(); }
  std::optional<std::uint32_t> id(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t df(std::uint32_t id) const { return df_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // token<TAB>id<TAB>df, one line per token in id order.
  void write_tsv(std::ostream& out) const;
  static Vocabulary read_tsv(std::istream& in);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Keeps tokens with df >= min_df and df / D <= max_df_fraction. Ids are
// assigned in lexicographic token order. Throws when nothing survives.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> train_streams, std::size_t min_df = 5,
                            double max_df_fraction = 0.5);

BowVector encode_bow(std::span<const std::string> tokens, const Vocabulary& vocab);

// Token ids in stream order with out-of-vocabulary tokens dropped.
std::vector<std::uint32_t> encode_ids(std::span<const std::string> tokens, const Vocabulary& vocab);

}  // namespace microevent
