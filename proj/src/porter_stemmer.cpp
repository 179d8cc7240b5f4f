#include "microevent/porter_stemmer.hpp"

#include <array>
#include <utility>

namespace microevent {
namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

class Word {
 public:
  explicit Word(std::string_view w) : s_(w) {}

  const std::string& str() const { return s_; }

  bool consonant(std::size_t i) const {
    switch (s_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !consonant(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in s_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && s_[len - 1] == s_[len - 2] && consonant(len - 1);
  }

  // cvc where the final c is not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 3) || consonant(len - 2) || !consonant(len - 1)) return false;
    const char c = s_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view suffix) const {
    return s_.size() >= suffix.size() && std::string_view(s_).substr(s_.size() - suffix.size()) == suffix;
  }

  std::size_t stem_len(std::string_view suffix) const { return s_.size() - suffix.size(); }

  void replace(std::string_view suffix, std::string_view replacement) {
    s_.resize(stem_len(suffix));
    s_.append(replacement);
  }

  void chop(std::size_t n) { s_.resize(s_.size() - n); }

  char back() const { return s_.back(); }
  std::size_t size() const { return s_.size(); }

 private:
  std::string s_;
};

template <std::size_t N>
const Rule* longest_match(const Word& w, const std::array<Rule, N>& rules) {
  const Rule* best = nullptr;
  for (const auto& r : rules) {
    if (w.ends_with(r.suffix) && (!best || r.suffix.size() > best->suffix.size())) best = &r;
  }
  return best;
}

void step1a(Word& w) {
  if (w.ends_with("sses")) w.replace("sses", "ss");
  else if (w.ends_with("ies")) w.replace("ies", "i");
  else if (w.ends_with("ss")) return;
  else if (w.ends_with("s")) w.chop(1);
}

void step1b(Word& w) {
  bool cleanup = false;
  if (w.ends_with("eed")) {
    if (w.measure(w.stem_len("eed")) > 0) w.chop(1);
    return;
  }
  if (w.ends_with("ed") && w.has_vowel(w.stem_len("ed"))) {
    w.chop(2);
    cleanup = true;
  } else if (w.ends_with("ing") && w.has_vowel(w.stem_len("ing"))) {
    w.chop(3);
    cleanup = true;
  }
  if (!cleanup) return;
  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.replace("", "e");
  } else if (w.double_consonant(w.size())) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.chop(1);
  } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
    w.replace("", "e");
  }
}

void step1c(Word& w) {
  if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace("y", "i");
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"}, {"izer", "ize"},
    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"}, {"eli", "e"},     {"ousli", "ous"},
    {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},  {"alism", "al"},  {"iveness", "ive"},
    {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},  {"iviti", "ive"}, {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
}};

constexpr std::array<Rule, 19> kStep4{{
    {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},  {"able", ""}, {"ible", ""},
    {"ant", ""}, {"ement", ""}, {"ment", ""}, {"ent", ""}, {"ion", ""}, {"ou", ""},   {"ism", ""},
    {"ate", ""}, {"iti", ""},  {"ous", ""},  {"ive", ""}, {"ize", ""},
}};

template <std::size_t N>
void apply_measured(Word& w, const std::array<Rule, N>& rules, int min_measure) {
  const Rule* r = longest_match(w, rules);
  if (r && w.measure(w.stem_len(r->suffix)) > min_measure) w.replace(r->suffix, r->replacement);
}

void step4(Word& w) {
  const Rule* r = longest_match(w, kStep4);
  if (!r) return;
  const std::size_t len = w.stem_len(r->suffix);
  if (w.measure(len) <= 1) return;
  if (r->suffix == "ion") {
    if (len == 0) return;
    const char c = w.str()[len - 1];
    if (c != 's' && c != 't') return;
  }
  w.replace(r->suffix, "");
}

void step5(Word& w) {
  if (w.ends_with("e")) {
    const std::size_t len = w.size() - 1;
    const int m = w.measure(len);
    if (m > 1 || (m == 1 && !w.cvc(len))) w.chop(1);
  }
  if (w.measure(w.size()) > 1 && w.double_consonant(w.size()) && w.back() == 'l') w.chop(1);
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  Word w(word);
  step1a(w);
  step1b(w);
  step1c(w);
  apply_measured(w, kStep2, 0);
  apply_measured(w, kStep3, 0);
  step4(w);
  step5(w);
  return w.str();
}

}  // namespace microevent
