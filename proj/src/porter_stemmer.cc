#include "nnq/stemmer.h"

#include <algorithm>

namespace nnq {
namespace {

// Working state for one word. `end_` is the index of the last letter of the
// current stem, `mark_` the offset set by ends() (the letter before the
// matched suffix). Both may go to -1 transiently.
class Stemmer {
 public:
  explicit Stemmer(std::string_view word)
      : b_(word), end_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (end_ <= 1) return b_;
    step1ab();
    if (end_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, end_ + 1);
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0..mark_].
  int measure() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > mark_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > mark_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > mark_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= mark_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_cons(int j) const {
    if (j < 1) return false;
    if (b_[j] != b_[j - 1]) return false;
    return cons(j);
  }

  // consonant-vowel-consonant ending at i, where the final consonant is not
  // w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view suffix) {
    const int len = static_cast<int>(suffix.size());
    if (len > end_ + 1) return false;
    if (std::string_view(b_).substr(end_ - len + 1, len) != suffix) {
      return false;
    }
    mark_ = end_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(mark_ + 1, end_ - mark_, s);
    end_ = mark_ + static_cast<int>(s.size());
  }

  void replace_if_measured(std::string_view s) {
    if (measure() > 0) set_to(s);
  }

  void step1ab() {
    if (b_[end_] == 's') {
      if (ends("sses")) {
        end_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_[end_ - 1] != 's') {
        --end_;
      }
    }
    if (ends("eed")) {
      if (measure() > 0) --end_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      end_ = mark_;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_cons(end_)) {
        --end_;
        const char ch = b_[end_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++end_;
      } else {
        mark_ = end_;
        if (measure() == 1 && cvc(end_)) set_to("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[end_] = 'i';
  }

  void step2() {
    if (end_ < 1) return;
    switch (b_[end_ - 1]) {
      case 'a':
        if (ends("ational")) { replace_if_measured("ate"); break; }
        if (ends("tional")) { replace_if_measured("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { replace_if_measured("ence"); break; }
        if (ends("anci")) { replace_if_measured("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { replace_if_measured("ize"); break; }
        break;
      case 'l':
        if (ends("bli")) { replace_if_measured("ble"); break; }
        if (ends("alli")) { replace_if_measured("al"); break; }
        if (ends("entli")) { replace_if_measured("ent"); break; }
        if (ends("eli")) { replace_if_measured("e"); break; }
        if (ends("ousli")) { replace_if_measured("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { replace_if_measured("ize"); break; }
        if (ends("ation")) { replace_if_measured("ate"); break; }
        if (ends("ator")) { replace_if_measured("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { replace_if_measured("al"); break; }
        if (ends("iveness")) { replace_if_measured("ive"); break; }
        if (ends("fulness")) { replace_if_measured("ful"); break; }
        if (ends("ousness")) { replace_if_measured("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { replace_if_measured("al"); break; }
        if (ends("iviti")) { replace_if_measured("ive"); break; }
        if (ends("biliti")) { replace_if_measured("ble"); break; }
        break;
      case 'g':
        if (ends("logi")) { replace_if_measured("log"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[end_]) {
      case 'e':
        if (ends("icate")) { replace_if_measured("ic"); break; }
        if (ends("ative")) { replace_if_measured(""); break; }
        if (ends("alize")) { replace_if_measured("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { replace_if_measured("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { replace_if_measured("ic"); break; }
        if (ends("ful")) { replace_if_measured(""); break; }
        break;
      case 's':
        if (ends("ness")) { replace_if_measured(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (end_ < 1) return;
    switch (b_[end_ - 1]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance")) break;
        if (ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able")) break;
        if (ends("ible")) break;
        return;
      case 'n':
        if (ends("ant")) break;
        if (ends("ement")) break;
        if (ends("ment")) break;
        if (ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && mark_ >= 0 &&
            (b_[mark_] == 's' || b_[mark_] == 't')) {
          break;
        }
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate")) break;
        if (ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (measure() > 1) end_ = mark_;
  }

  void step5() {
    mark_ = end_;
    if (b_[end_] == 'e') {
      const int m = measure();
      if (m > 1 || (m == 1 && !cvc(end_ - 1))) --end_;
    }
    if (b_[end_] == 'l' && double_cons(end_) && measure() > 1) --end_;
  }

  std::string b_;
  int end_;
  int mark_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
  const bool alphabetic = std::all_of(word.begin(), word.end(), [](char c) {
    return c >= 'a' && c <= 'z';
  });
  if (!alphabetic) return std::string(word);
  return Stemmer(word).run();
}

}  // namespace nnq
