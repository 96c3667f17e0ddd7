// Deterministic page generators shared by the detector tests and the
// acceptance suite: a varied benign corpus with deliberate near-misses
// (a slot-machine museum, a correctly spelled "coming soon" page, an
// Indonesian travel agency) and abusive pages modeled on hijack content.
#pragma once

#include "dsentinel/sitemap.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

struct GeneratedPage {
  std::string id;     // file name, e.g. "benign-0001.html"
  std::string source; // "alexa" | "fortune500" | "university"
  std::string html;
};

// `count` distinct benign pages, deterministic in `seed`. Always includes
// the near-miss specials regardless of count (count must be >= 16).
std::vector<GeneratedPage> benign_corpus(std::size_t count,
                                         std::uint32_t seed);

// Writes pages + manifest.csv into `dir` (created if missing) in the
// layout load_benign_corpus expects.
void write_benign_corpus(const std::string& dir,
                         const std::vector<GeneratedPage>& pages);

// One benign page whose keywords collide with naive single-term
// signatures: a museum page about antique slot machines.
std::string slot_museum_page();

// --- abusive fixtures ------------------------------------------------------

// Indonesian gambling landing page: stuffed meta keywords, gambling title
// and headings, a popunder script, messaging-app referral links.
std::string gambling_page(std::mt19937& rng);

// The takeover placeholder with the telltale typo.
std::string comming_soon_page(std::mt19937& rng);

// Adult-content landing page.
std::string adult_page(std::mt19937& rng);

// SEO doorway page: link-network vocabulary plus gambling referrals.
std::string doorway_page(std::mt19937& rng);

// Japanese cloaking page and the generated sitemap that goes with it.
std::string japanese_hack_page(std::mt19937& rng);
dsentinel::sitemap::Stats japanese_hack_sitemap(std::mt19937& rng);

struct AbusivePage {
  std::string kind; // "gambling" | "comming-soon" | "adult" | "doorway" | "japanese"
  std::string html;
};

// `per_kind` pages of each abusive family, deterministic in `seed`.
std::vector<AbusivePage> abusive_pages(std::size_t per_kind,
                                       std::uint32_t seed);

} // namespace fixtures
