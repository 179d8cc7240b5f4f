#include "microevent/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <sstream>

#include "microevent/assets.hpp"
#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {

SentimentLexicon::SentimentLexicon(std::unordered_map<std::string, double> valences)
    : valences_(std::move(valences)) {}

SentimentLexicon SentimentLexicon::read_tsv(std::istream& in) {
  std::unordered_map<std::string, double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(t, '\t');
    if (f.size() < 2) throw InputError("sentiment lexicon line " + std::to_string(lineno) + ": expected token<TAB>valence");
    double val = 0.0;
    try {
      val = std::stod(f[1]);
    } catch (const std::exception&) {
      throw InputError("sentiment lexicon line " + std::to_string(lineno) + ": bad valence");
    }
    if (val < -4.0 || val > 4.0) throw InputError("sentiment lexicon line " + std::to_string(lineno) + ": valence outside [-4, 4]");
    v[to_lower_ascii(f[0])] = val;
  }
  return SentimentLexicon(std::move(v));
}

const SentimentLexicon& SentimentLexicon::builtin() {
  static const SentimentLexicon lex = [] {
    std::istringstream in(assets::load("sentiment_lexicon.tsv"));
    return read_tsv(in);
  }();
  return lex;
}

double SentimentLexicon::valence(std::string_view token) const {
  auto it = valences_.find(std::string(token));
  return it == valences_.end() ? 0.0 : it->second;
}

bool SentimentLexicon::contains(std::string_view token) const { return valences_.count(std::string(token)) > 0; }

std::vector<std::string> SentimentLexicon::words() const {
  std::vector<std::string> w;
  for (const auto& [k, v] : valences_) w.push_back(k);
  std::sort(w.begin(), w.end());
  return w;
}

std::vector<std::string> sentiment_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
               std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      cur.push_back('\'');
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_negator(std::string_view t) {
  static const char* const kWords[] = {"not",     "no",     "never",   "none",   "nobody", "nothing", "neither",
                                       "nor",     "nowhere", "cannot", "without", "dont",  "doesnt",  "didnt",
                                       "isnt",    "arent",  "wasnt",   "werent", "wont",   "cant",    "couldnt",
                                       "shouldnt", "wouldnt", "aint",  "hasnt",  "havent", "hadnt",   "neednt"};
  for (const char* w : kWords) {
    if (t == w) return true;
  }
  return t.size() > 3 && t.substr(t.size() - 3) == "n't";
}

SentimentScore score_sentiment(std::string_view clean_text, const SentimentLexicon& lexicon) {
  const auto tokens = sentiment_tokens(clean_text);
  SentimentScore score;
  if (tokens.empty()) return score;
  double sum = 0.0, pos = 0.0, neg = 0.0, neu = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double v = lexicon.valence(tokens[i]);
    if (v != 0.0) {
      for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
        if (is_negator(tokens[i - back])) {
          v *= kNegationScale;
          break;
        }
      }
    }
    sum += v;
    if (v > 0) pos += v + 1.0;
    else if (v < 0) neg += 1.0 - v;
    else neu += 1.0;
  }
  const double total = pos + neg + neu;
  score.positive = pos / total;
  score.negative = neg / total;
  score.neutral = neu / total;
  score.compound = sum / std::sqrt(sum * sum + kCompoundAlpha);
  return score;
}

}  // namespace microevent
