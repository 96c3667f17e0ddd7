#include "dsentinel/langdetect.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace dsentinel::lang {

namespace {

// --- UTF-8 ----------------------------------------------------------------

// Decodes one codepoint at `i`, advancing it. Invalid sequences yield
// U+FFFD and advance one byte, so garbage cannot stall the scan.
std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

// --- script classes --------------------------------------------------------

enum class Script : std::uint8_t {
  none,
  latin,
  kana,
  han,
  hangul,
  cyrillic,
  arabic,
  thai,
  greek,
  hebrew,
  devanagari,
};

Script script_of(std::uint32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return Script::latin;
  if ((cp >= 0x00C0 && cp <= 0x024F) && cp != 0x00D7 && cp != 0x00F7)
    return Script::latin; // Latin-1 supplement + Extended-A/B letters
  if ((cp >= 0x3040 && cp <= 0x309F) || (cp >= 0x30A0 && cp <= 0x30FF))
    return Script::kana;
  if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF))
    return Script::han;
  if ((cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x1100 && cp <= 0x11FF) ||
      (cp >= 0x3130 && cp <= 0x318F))
    return Script::hangul;
  if (cp >= 0x0400 && cp <= 0x04FF) return Script::cyrillic;
  if ((cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0x0750 && cp <= 0x077F))
    return Script::arabic;
  if (cp >= 0x0E00 && cp <= 0x0E7F) return Script::thai;
  if (cp >= 0x0370 && cp <= 0x03FF) return Script::greek;
  if (cp >= 0x0590 && cp <= 0x05FF) return Script::hebrew;
  if (cp >= 0x0900 && cp <= 0x097F) return Script::devanagari;
  return Script::none;
}

struct ScriptCounts {
  std::size_t latin = 0, kana = 0, han = 0, hangul = 0, cyrillic = 0,
              arabic = 0, thai = 0, greek = 0, hebrew = 0, devanagari = 0;

  std::size_t total() const {
    return latin + kana + han + hangul + cyrillic + arabic + thai + greek +
           hebrew + devanagari;
  }
};

ScriptCounts count_scripts(std::string_view text) {
  ScriptCounts c;
  std::size_t i = 0;
  while (i < text.size()) {
    switch (script_of(next_codepoint(text, i))) {
      case Script::latin: ++c.latin; break;
      case Script::kana: ++c.kana; break;
      case Script::han: ++c.han; break;
      case Script::hangul: ++c.hangul; break;
      case Script::cyrillic: ++c.cyrillic; break;
      case Script::arabic: ++c.arabic; break;
      case Script::thai: ++c.thai; break;
      case Script::greek: ++c.greek; break;
      case Script::hebrew: ++c.hebrew; break;
      case Script::devanagari: ++c.devanagari; break;
      case Script::none: break;
    }
  }
  return c;
}

// --- Latin trigram profiles -------------------------------------------------

// Each profile is a list of that language's most common words; matching
// happens on padded trigrams, so inflected forms still hit their stems'
// edges (" te", "ter", …).
struct Profile {
  const char* tag;
  const char* words; // space-separated
};

constexpr Profile kProfiles[] = {
    {"en",
     "the of and to in is was for that it with as his on be at by had not are "
     "but from or have an they which one you were her all she there would "
     "their we him been has when who will more no if out so said what up its "
     "about into than them can only other new some could time these two may "
     "then do first any my now such like our over man me even most made after "
     "also did many before must through years where much your way well down "
     "should because each just those people how too little good very make "
     "world still own see work long get here between both life being under "
     "never day same another know while last might great old year off come "
     "since against go came right used take three"},
    {"id",
     "yang dan di itu dengan untuk tidak ini dari dalam akan pada juga saya "
     "ke karena tersebut bisa ada mereka lebih kata tahun sudah atau saat "
     "oleh menjadi orang ia telah adalah seperti sebagai bahwa dapat para "
     "harus namun kami kita anda masih hanya banyak baru baik secara terhadap "
     "salah sangat hari besar hingga melakukan belum lain tentang setelah "
     "bagi serta memiliki yaitu jika sehingga ketika semua setiap sendiri "
     "saja tempat sekarang percaya main daftar agen situs resmi uang menang "
     "mudah bermain permainan memberikan menggunakan melalui paling terbaik "
     "terpercaya"},
    {"es",
     "de la que el en y a los del se las por un para con no una su al lo "
     "como mas pero sus le ya o este si porque esta entre cuando muy sin "
     "sobre tambien me hasta hay donde quien desde todo nos durante todos "
     "uno les ni contra otros ese eso ante ellos e esto antes algunos que "
     "unos yo otro otras otra tanto esa estos mucho quienes nada muchos cual "
     "poco ella estar estas algunas algo nosotros ser son tiene fue habia "
     "era siempre ahora despues vida anos hacer estaba tiempo"},
    {"fr",
     "le de un etre et a il avoir ne je son que se qui ce dans en du elle au "
     "pour pas vous par sur faire plus dire me on mon lui nous comme mais "
     "avec tout y aller voir bien ou sans tu leur si deux meme notre votre "
     "quand aussi chez dont encore toujours jamais cette ces ses ete tres "
     "apres autre entre contre tous cela ils peut fait ans sont était la les "
     "des une est aux moins peu donc alors chose"},
    {"de",
     "der die und in den von zu das mit sich des auf fur ist im dem nicht "
     "ein eine als auch es an werden aus er hat dass sie nach wird bei einer "
     "um am sind noch wie einem uber einen so zum war haben nur oder aber "
     "vor zur bis mehr durch man sein wurde sei konnen ihre dann unter wir "
     "soll ich eines jahr zwei diese dieser wieder keine uns viele schon "
     "hier alle wenn also neue seine ihren jahren damit etwa heute"},
    {"pt",
     "de a o que e do da em um para com nao uma os no se na por mais as dos "
     "como mas foi ao ele das tem seu sua ou ser quando muito nos ja esta eu "
     "tambem so pelo pela ate isso ela entre era depois sem mesmo aos ter "
     "seus quem nas me esse eles estao voce tinha foram essa num nem suas "
     "meu minha tem numa pelos elas havia seja qual sera nos tenho lhe deles "
     "essas esses pelas este fosse dele anos sobre"},
};

// ASCII-folds one lowercase-ish Latin codepoint for trigram purposes:
// accented letters map to their base letter so "também" hits "tambem".
char fold_latin(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return static_cast<char>(cp - 'A' + 'a');
  if (cp >= 'a' && cp <= 'z') return static_cast<char>(cp);
  struct Range {
    std::uint32_t lo, hi;
    char base;
  };
  static constexpr Range kFolds[] = {
      {0x00C0, 0x00C5, 'a'}, {0x00E0, 0x00E5, 'a'}, {0x00C7, 0x00C7, 'c'},
      {0x00E7, 0x00E7, 'c'}, {0x00C8, 0x00CB, 'e'}, {0x00E8, 0x00EB, 'e'},
      {0x00CC, 0x00CF, 'i'}, {0x00EC, 0x00EF, 'i'}, {0x00D1, 0x00D1, 'n'},
      {0x00F1, 0x00F1, 'n'}, {0x00D2, 0x00D6, 'o'}, {0x00F2, 0x00F6, 'o'},
      {0x00D8, 0x00D8, 'o'}, {0x00F8, 0x00F8, 'o'}, {0x00D9, 0x00DC, 'u'},
      {0x00F9, 0x00FC, 'u'}, {0x00DD, 0x00DD, 'y'}, {0x00FD, 0x00FD, 'y'},
      {0x00FF, 0x00FF, 'y'}, {0x00DF, 0x00DF, 's'},
  };
  for (const auto& r : kFolds) {
    if (cp >= r.lo && cp <= r.hi) return r.base;
  }
  return 0; // other Latin extended: treated as a word boundary
}

// Splits Latin text into folded lowercase words.
std::vector<std::string> fold_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    std::uint32_t cp = next_codepoint(text, i);
    char c = script_of(cp) == Script::latin ? fold_latin(cp) : 0;
    if (c) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

using TrigramSet = std::set<std::string>;

void add_word_trigrams(TrigramSet& out, std::string_view word) {
  std::string padded = " " + std::string(word) + " ";
  if (padded.size() < 3) return;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
    out.insert(padded.substr(i, 3));
}

const std::map<std::string, TrigramSet>& profiles() {
  static const std::map<std::string, TrigramSet> table = [] {
    std::map<std::string, TrigramSet> t;
    for (const auto& p : kProfiles) {
      TrigramSet set;
      std::string_view words = p.words;
      std::size_t pos = 0;
      while (pos < words.size()) {
        auto space = words.find(' ', pos);
        if (space == std::string_view::npos) space = words.size();
        if (space > pos) add_word_trigrams(set, words.substr(pos, space - pos));
        pos = space + 1;
      }
      t.emplace(p.tag, std::move(set));
    }
    return t;
  }();
  return table;
}

double score_against(const std::vector<std::string>& words,
                     const TrigramSet& profile) {
  std::size_t total = 0, hits = 0;
  for (const auto& w : words) {
    std::string padded = " " + w + " ";
    if (padded.size() < 3) continue;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      ++total;
      if (profile.contains(padded.substr(i, 3))) ++hits;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Below this hit fraction no Latin language is claimed.
constexpr double kConfidenceFloor = 0.32;

// A decided-by-sight script must supply at least this share of the page's
// letters (and at least a few characters) before it names the language.
constexpr double kScriptShare = 0.30;
constexpr std::size_t kScriptMinChars = 3;

} // namespace

double trigram_score(std::string_view text, std::string_view tag) {
  const auto& table = profiles();
  auto it = table.find(std::string(tag));
  if (it == table.end()) return 0.0;
  return score_against(fold_words(text), it->second);
}

std::string detect(std::string_view text) {
  ScriptCounts c = count_scripts(text);
  std::size_t total = c.total();
  if (total == 0) return "und";

  struct Candidate {
    std::size_t count;
    const char* tag;
  };
  std::size_t cjk = c.kana + c.han;
  const Candidate by_script[] = {
      {cjk, c.kana >= kScriptMinChars ? "ja" : "zh"},
      {c.hangul, "ko"},   {c.cyrillic, "ru"}, {c.arabic, "ar"},
      {c.thai, "th"},     {c.greek, "el"},    {c.hebrew, "he"},
      {c.devanagari, "hi"},
  };
  const Candidate* best = nullptr;
  for (const auto& cand : by_script) {
    if (!best || cand.count > best->count) best = &cand;
  }
  if (best->count >= kScriptMinChars &&
      static_cast<double>(best->count) >=
          kScriptShare * static_cast<double>(total)) {
    return best->tag;
  }

  // Latin path.
  auto words = fold_words(text);
  if (words.empty()) return "und";
  const char* best_tag = nullptr;
  double best_score = 0.0;
  for (const auto& p : kProfiles) {
    double s = score_against(words, profiles().at(p.tag));
    if (!best_tag || s > best_score) {
      best_tag = p.tag;
      best_score = s;
    }
  }
  if (best_score < kConfidenceFloor) return "und";
  return best_tag;
}

} // namespace dsentinel::lang
