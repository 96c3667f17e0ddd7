// Lightweight language identification for page text. Two stages: writing
// systems that identify a language on sight (kana, hangul, …) are decided
// by character class; Latin-script text is scored against embedded trigram
// profiles of common words. Returns BCP-47-style primary tags, or "und"
// when no evidence clears the confidence floor.
#pragma once

#include <string>
#include <string_view>

namespace dsentinel::lang {

// Deterministic for fixed input. Never throws; malformed UTF-8 bytes are
// skipped.
std::string detect(std::string_view text);

// The Latin-script trigram score for one language tag ("en", "id", "es",
// "fr", "de", "pt"): fraction of the text's word trigrams found in that
// language's profile. Exposed for threshold tests; unknown tags score 0.
double trigram_score(std::string_view text, std::string_view tag);

} // namespace dsentinel::lang
