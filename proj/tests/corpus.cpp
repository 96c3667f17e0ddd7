#include "corpus.hpp"

#include "dsentinel/util.hpp"

#include <filesystem>
#include <fstream>

namespace fixtures {

namespace {

using dsentinel::util::csv_row;

std::string pick(std::mt19937& rng, const std::vector<std::string>& pool) {
  return pool[rng() % pool.size()];
}

const std::vector<std::string> kCompanyParts = {
    "North", "Blue", "Iron", "Summit", "Clear", "Atlas",  "Harbor",
    "Oak",   "Vertex", "Crest", "Delta", "Nova", "Quill", "Stone",
};

const std::vector<std::string> kCompanyTails = {
    "Systems", "Industries", "Analytics", "Logistics", "Partners",
    "Dynamics", "Manufacturing", "Consulting", "Software", "Energy",
};

const std::vector<std::string> kProse = {
    "Our team has decades of combined experience across the industry.",
    "We partner with customers to deliver measurable results.",
    "The quarterly report highlights steady growth in every region.",
    "Employees volunteer thousands of hours in their communities each year.",
    "Sustainability is central to how we design our products.",
    "The engineering group published several peer-reviewed studies.",
    "Customer support is available around the clock in nine languages.",
    "The new facility reduces energy consumption by a third.",
    "We invest heavily in training and professional development.",
    "Independent audits confirm our compliance with industry standards.",
    "The board announced a renewed focus on long-term research.",
    "Our logistics network spans forty countries on five continents.",
    "Product reliability remains the top priority for the platform team.",
    "The annual conference drew a record number of attendees.",
    "Grant funding supports laboratory work across three campuses.",
    "Alumni mentor current students through a structured program.",
    "The library extended its weekend opening hours this semester.",
    "Researchers presented findings on renewable storage materials.",
    "The festival celebrates regional music and local food producers.",
    "City officials approved the riverside restoration project.",
    "A new bus line connects the science park with the old town.",
    "The museum acquired a collection of early printing equipment.",
    "Season tickets for the concert hall go on sale next month.",
    "Volunteers planted two thousand trees along the floodplain.",
};

const std::vector<std::string> kHeadlines = {
    "Council Debates Transit Expansion", "Harvest Festival Returns Downtown",
    "Local Team Advances to Finals",     "New Bridge Opens Ahead of Schedule",
    "University Lab Wins Research Grant", "Startups Flock to Riverside Hub",
    "Historic Theater Reopens",           "Recycling Program Expands Citywide",
};

std::string page_shell(const std::string& title, const std::string& meta,
                       const std::string& body) {
  return "<!DOCTYPE html>\n<html>\n<head>\n<title>" + title + "</title>\n" +
         meta + "</head>\n<body>\n" + body + "</body>\n</html>\n";
}

std::string prose_block(std::mt19937& rng, int sentences) {
  std::string out = "<p>";
  for (int i = 0; i < sentences; ++i) {
    if (i) out += ' ';
    out += pick(rng, kProse);
  }
  out += " Reference " + std::to_string(rng() % 100000) + ".</p>\n";
  return out;
}

std::string corporate_page(std::mt19937& rng) {
  auto name = pick(rng, kCompanyParts) + " " + pick(rng, kCompanyTails);
  std::string body = "<h1>" + name + "</h1>\n";
  body += "<h2>About us</h2>\n" + prose_block(rng, 3);
  body += "<h2>Products</h2>\n" + prose_block(rng, 3);
  body += "<h2>Careers</h2>\n" + prose_block(rng, 2);
  body += "<a href=\"/contact\">Contact our sales team</a>\n";
  body += "<script src=\"/static/js/main.js\"></script>\n";
  return page_shell(name,
                    "<meta name=\"description\" content=\"" + name +
                        " builds dependable products for demanding "
                        "customers.\">\n",
                    body);
}

std::string university_page(std::mt19937& rng) {
  const std::vector<std::string> depts = {
      "Department of Physics",    "Department of History",
      "School of Engineering",    "Faculty of Medicine",
      "Department of Linguistics", "School of Public Policy",
  };
  auto dept = pick(rng, depts);
  std::string body = "<h1>" + dept + "</h1>\n";
  body += "<h2>Research</h2>\n" + prose_block(rng, 3);
  body += "<h2>Courses</h2>\n" + prose_block(rng, 2);
  body += "<a href=\"/admissions\">Admissions information</a>\n";
  return page_shell(dept + " | State University",
                    "<meta name=\"keywords\" content=\"university, research, "
                    "education, courses\">\n",
                    body);
}

std::string news_page(std::mt19937& rng) {
  auto headline = pick(rng, kHeadlines);
  std::string body = "<h1>" + headline + "</h1>\n" + prose_block(rng, 5);
  body += "<a href=\"/archive\">More from the archive</a>\n";
  return page_shell(headline + " - Daily Gazette",
                    "<meta name=\"description\" content=\"Independent local "
                    "reporting since 1952.\">\n",
                    body);
}

std::string booking_page(std::mt19937& rng) {
  std::string body =
      "<h1>Book an appointment</h1>\n"
      "<p>Choose a convenient time slot from the calendar below. Each "
      "slot lasts thirty minutes.</p>\n" +
      prose_block(rng, 2) + "<a href=\"/calendar\">Open the calendar</a>\n";
  return page_shell("Appointment booking",
                    "<meta name=\"description\" content=\"Reserve a time "
                    "slot with our advisors.\">\n",
                    body);
}

std::string docs_page(std::mt19937& rng) {
  std::string body =
      "<h1>API reference</h1>\n"
      "<h2>Authentication</h2>\n"
      "<p>Every request carries a bearer token in the authorization "
      "header. Tokens expire after " +
      std::to_string(30 + rng() % 60) + " minutes.</p>\n" +
      "<h2>Pagination</h2>\n" + prose_block(rng, 2) +
      "<a href=\"/docs/errors\">Error catalogue</a>\n";
  return page_shell("Developer documentation", "", body);
}

std::string clinic_page(std::mt19937& rng) {
  std::string body =
      "<h1>Community health clinic</h1>\n"
      "<p>Our pharmacy fills prescriptions weekdays until six. Walk-in "
      "vaccinations are available every morning.</p>\n" +
      prose_block(rng, 2);
  return page_shell("Community health services", "", body);
}

std::string sex_ed_page(std::mt19937& rng) {
  std::string body =
      "<h1>Student health resources</h1>\n"
      "<p>The health center offers confidential counselling and evidence-"
      "based sex education workshops every term.</p>\n" +
      prose_block(rng, 2);
  return page_shell("Student health center | State University", "", body);
}

std::string travel_id_page(std::mt19937& rng) {
  std::string body =
      "<h1>Agen perjalanan terpercaya</h1>\n"
      "<p>Paket wisata keluarga ke Bali, Lombok dan Raja Ampat dengan "
      "pemandu berpengalaman. Daftar sekarang untuk harga promo musim "
      "liburan.</p>\n"
      "<p>Kantor kami melayani pelanggan sejak tahun " +
      std::to_string(1995 + rng() % 20) + ".</p>\n";
  return page_shell(
      "Agen perjalanan keluarga",
      "<meta name=\"keywords\" content=\"wisata, liburan, keluarga, "
      "promo\">\n",
      body);
}

std::string coming_soon_correct_page(std::mt19937& rng) {
  std::string body = "<h1>Coming soon</h1>\n<p>Our new storefront launches "
                     "in " +
                     std::to_string(1 + rng() % 12) +
                     " weeks. Leave your address to hear about it.</p>\n";
  return page_shell("Coming soon", "", body);
}

std::string parked_page(std::mt19937& rng) {
  std::string body =
      "<h1>This domain was recently registered</h1>\n"
      "<p>The owner has not published a website yet. Interested in a "
      "similar name? Browse available domains at our marketplace.</p>\n"
      "<p>Listing " + std::to_string(rng() % 100000) + ".</p>\n";
  return page_shell("Domain parking", "", body);
}

} // namespace

std::string slot_museum_page() {
  return page_shell(
      "Museum of Antique Slot Machines",
      "<meta name=\"keywords\" content=\"museum, slot, machines, antique, "
      "history\">\n",
      "<h1>Museum of Antique Slot Machines</h1>\n"
      "<p>Our collection traces the mechanical slot machine from 1895 to "
      "the electromechanical era. Every slot cabinet on display has been "
      "restored to working order by our volunteers.</p>\n"
      "<a href=\"/visit\">Plan your visit</a>\n");
}

std::vector<GeneratedPage> benign_corpus(std::size_t count,
                                         std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<GeneratedPage> pages;
  pages.reserve(count);

  auto add = [&](const std::string& source, std::string html) {
    char name[32];
    std::snprintf(name, sizeof name, "benign-%04zu.html", pages.size());
    pages.push_back({name, source, std::move(html)});
  };

  // The near-misses a sloppy signature would trip over.
  add("alexa", slot_museum_page());
  add("alexa", coming_soon_correct_page(rng));
  add("university", sex_ed_page(rng));
  add("alexa", travel_id_page(rng));
  add("alexa", booking_page(rng));
  add("fortune500", clinic_page(rng));
  add("alexa", parked_page(rng));
  add("alexa", parked_page(rng));

  while (pages.size() < count) {
    switch (rng() % 6) {
      case 0: add("fortune500", corporate_page(rng)); break;
      case 1: add("university", university_page(rng)); break;
      case 2: add("alexa", news_page(rng)); break;
      case 3: add("alexa", docs_page(rng)); break;
      case 4: add("fortune500", corporate_page(rng)); break;
      default: add("university", university_page(rng)); break;
    }
  }
  return pages;
}

void write_benign_corpus(const std::string& dir,
                         const std::vector<GeneratedPage>& pages) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.csv");
  manifest << "file,source\n";
  for (const auto& page : pages) {
    manifest << csv_row({page.id, page.source}) << "\n";
    std::ofstream out(fs::path(dir) / page.id, std::ios::binary);
    out << page.html;
  }
}

std::string gambling_page(std::mt19937& rng) {
  const std::vector<std::string> brands = {"JOKER123", "MPO777", "SLOT88",
                                           "GACOR77", "TOGEL4D"};
  auto brand = pick(rng, brands);
  std::string phone = "628";
  for (int i = 0; i < 10; ++i) phone += static_cast<char>('0' + rng() % 10);

  std::string body =
      "<h1>SITUS JUDI SLOT ONLINE TERPERCAYA " + brand + "</h1>\n"
      "<h2>Daftar slot gacor hari ini</h2>\n"
      "<p>" + brand +
      " adalah situs judi slot online terpercaya dengan bocoran slot "
      "gacor hari ini. Agen judi online resmi menerima deposit pulsa "
      "tanpa potongan.</p>\n"
      "<div class=\"jdslot88-banner\" data-aff=\"" +
      std::to_string(rng() % 100000) + "\"></div>\n"
      "<a href=\"https://wa.me/" + phone + "\">DAFTAR VIA WHATSAPP</a>\n"
      "<a href=\"https://t.me/joinchat/" + brand + "\">JOIN TELEGRAM</a>\n"
      "<script src=\"//cdn.adnet-" + std::to_string(rng() % 90 + 10) +
      ".com/tags/popunder.js?v=" + std::to_string(rng() % 9 + 1) +
      "\"></script>\n";

  return page_shell(
      "SITUS JUDI SLOT ONLINE TERPERCAYA - DAFTAR SLOT GACOR " + brand,
      "<meta name=\"keywords\" content=\"slot, online, judi, situs, "
      "joker123, terpercaya, gacor, agen, daftar, game, bola, pulsa\">\n"
      "<meta name=\"description\" content=\"Situs judi slot online "
      "terpercaya dan agen slot gacor resmi.\">\n",
      body);
}

std::string comming_soon_page(std::mt19937& rng) {
  return page_shell("Comming soon",
                    "",
                    "<h1>Comming soon ...</h1>\n<p>webhost id " +
                        std::to_string(rng() % 100000) + "</p>\n");
}

std::string adult_page(std::mt19937& rng) {
  std::string body =
      "<h1>FREE PORN VIDEOS XXX</h1>\n"
      "<p>Watch new porn and xxx videos updated daily. Channel " +
      std::to_string(rng() % 1000) + ".</p>\n"
      "<a href=\"/videos\">ENTER</a>\n";
  return page_shell("Free Porn XXX Videos",
                    "<meta name=\"keywords\" content=\"porn, xxx, sex, "
                    "videos, free\">\n",
                    body);
}

std::string doorway_page(std::mt19937& rng) {
  std::string body =
      "<h1>Jasa backlink PBN murah</h1>\n"
      "<p>Paket jasa backlink dari jaringan PBN berkualitas untuk "
      "menaikkan ranking website anda. Order " +
      std::to_string(rng() % 10000) + " slot tersedia.</p>\n"
      "<a href=\"https://promo.example-" + std::to_string(rng() % 100) +
      ".net/daftar\">order sekarang</a>\n";
  return page_shell("Jasa Backlink PBN Murah",
                    "<meta name=\"keywords\" content=\"backlink, pbn, jasa "
                    "backlink, seo\">\n",
                    body);
}

std::string japanese_hack_page(std::mt19937& rng) {
  std::string body =
      "<h1>人気ブランドの商品を激安価格で販売しています</h1>\n"
      "<p>最新の入荷情報はこちらをご覧ください。全国送料無料でお届けします。"
      "会員登録で割引クーポンがもらえます。商品番号 " +
      std::to_string(rng() % 100000) + "。</p>\n"
      "<a href=\"/items\">商品一覧はこちら</a>\n";
  return page_shell("激安ブランド通販", "", body);
}

dsentinel::sitemap::Stats japanese_hack_sitemap(std::mt19937& rng) {
  using dsentinel::sitemap::Stats;
  Stats stats;
  stats.well_formed = true;
  stats.url_count = 60000 + rng() % 40000;
  // Each generated page URL is ~70 bytes of XML; thousands of pages put
  // the document well past the multi-megabyte mark.
  stats.total_size_bytes = 5'500'000 + rng() % 2'000'000;

  double entropy_sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::string name;
    for (int j = 0; j < 12; ++j) {
      name += "0123456789abcdefghijklmnopqrstuvwxyz"[rng() % 36];
    }
    std::string path = "/" + name + ".html";
    stats.sample_urls.push_back("http://victim.example.com" + path);
    entropy_sum += dsentinel::util::char_entropy(path);
  }
  stats.name_entropy = entropy_sum / 100.0;
  return stats;
}

std::vector<AbusivePage> abusive_pages(std::size_t per_kind,
                                       std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<AbusivePage> pages;
  for (std::size_t i = 0; i < per_kind; ++i) {
    pages.push_back({"gambling", gambling_page(rng)});
    pages.push_back({"comming-soon", comming_soon_page(rng)});
    pages.push_back({"adult", adult_page(rng)});
    pages.push_back({"doorway", doorway_page(rng)});
    pages.push_back({"japanese", japanese_hack_page(rng)});
  }
  return pages;
}

} // namespace fixtures
