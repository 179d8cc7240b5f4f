#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace microevent {

struct SentimentScore {
  double negative = 0.0;
  double neutral = 0.0;
  double positive = 0.0;
  double compound = 0.0;
};

class SentimentLexicon {
 public:
  SentimentLexicon() = default;
  explicit SentimentLexicon(std::unordered_map<std::string, double> valences);

  // token<TAB>valence per line; '#' comments and blank lines skipped. Extra
  // columns after the valence are ignored.
  static SentimentLexicon read_tsv(std::istream& in);
  static const SentimentLexicon& builtin();

  double valence(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return valences_.size(); }
  std::vector<std::string> words() const;

 private:
  std::unordered_map<std::string, double> valences_;
};

inline constexpr double kNegationScale = -0.74;
inline constexpr double kCompoundAlpha = 15.0;

// Lowercased word tokens; apostrophes inside a word are kept ("don't").
std::vector<std::string> sentiment_tokens(std::string_view text);

bool is_negator(std::string_view token);

// Lexicon valence per token, flipped and scaled by 0.74 when a negator sits in
// the 3 preceding tokens. compound = s / sqrt(s^2 + 15) with s the valence
// sum; the three shares follow the usual convention (v + 1 for positive
// tokens, |v - 1| for negative ones, 1 for every zero-valence token).
SentimentScore score_sentiment(std::string_view clean_text, const SentimentLexicon& lexicon);

}  // namespace microevent
