#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "raplyr/csv.hpp"
#include "raplyr/error.hpp"
#include "raplyr/text.hpp"

namespace raplyr {

enum class ProfanityCategory {
  SexualAnatomy,
  BodilyFluids,
  SexualOrientation,
  RacialEthnic,
  MentalDisability,
  PhysicalDisability,
  PhysicalAttributes,
  AnimalReferences,
  ReligiousOffense,
  Political,
  OtherInsult,
};

inline constexpr std::size_t kCategoryCount = 11;

/// Category labels as they appear in the lexicon CSV, indexed by enum value.
inline constexpr std::array<std::string_view, kCategoryCount> kCategoryLabels{
    "sexual anatomy / sexual acts", "bodily fluids / excrement", "sexual orientation / gender",
    "racial / ethnic slurs",        "mental disability",         "physical disability",
    "physical attributes",          "animal references",         "religious offense",
    "political",                    "other / general insult"};

inline std::string_view to_string(ProfanityCategory c) {
  return kCategoryLabels[static_cast<std::size_t>(c)];
}

inline constexpr std::array<ProfanityCategory, kCategoryCount> all_categories() {
  std::array<ProfanityCategory, kCategoryCount> out{};
  for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = static_cast<ProfanityCategory>(i);
  return out;
}

namespace detail {

// "Racial/Ethnic  Slurs" -> "racial / ethnic slurs"
inline std::string canonical_label(std::string_view s) {
  std::string out;
  for (char c : to_lower(trim(s))) {
    if (c == '/') {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += " / ";
    } else if (c == ' ' || c == '\t') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace detail

inline std::optional<ProfanityCategory> category_from_string(std::string_view s) {
  auto label = detail::canonical_label(s);
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (kCategoryLabels[i] == label) return static_cast<ProfanityCategory>(i);
  return std::nullopt;
}

enum class SeverityBucket { Mild, Strong, Severe };

inline std::string_view to_string(SeverityBucket b) {
  switch (b) {
    case SeverityBucket::Mild: return "mild";
    case SeverityBucket::Strong: return "strong";
    case SeverityBucket::Severe: return "severe";
  }
  return "mild";
}

inline constexpr double kMinSeverity = 1.0;
inline constexpr double kMaxSeverity = 3.0;

/// [1, 1.5) mild, [1.5, 2.5) strong, [2.5, 3] severe.
inline SeverityBucket severity_bucket(double rating) {
  if (!(rating >= kMinSeverity && rating <= kMaxSeverity))
    throw SeverityOutOfRange("severity " + std::to_string(rating) + " outside [1, 3]");
  if (rating < 1.5) return SeverityBucket::Mild;
  if (rating < 2.5) return SeverityBucket::Strong;
  return SeverityBucket::Severe;
}

struct ProfanityEntry {
  std::string surface;
  std::string canonical;
  ProfanityCategory category = ProfanityCategory::OtherInsult;
  double severity = kMinSeverity;
  SeverityBucket bucket = SeverityBucket::Mild;
  std::string description;

  friend bool operator==(const ProfanityEntry&, const ProfanityEntry&) = default;
};

inline std::string format_severity(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Immutable after construction; surfaces are unique.
class Lexicon {
 public:
  Lexicon() = default;

  /// Adds an entry, or replaces the held one for the same surface when the new
  /// severity is strictly higher.
  void add(ProfanityEntry entry) {
    if (entry.surface.empty()) throw InvalidArgument("empty profanity surface");
    entry.bucket = severity_bucket(entry.severity);
    auto [it, inserted] = index_.try_emplace(entry.surface, entries_.size());
    if (inserted) {
      entries_.push_back(std::move(entry));
    } else if (entry.severity > entries_[it->second].severity) {
      entries_[it->second] = std::move(entry);
    }
  }

  /// Exact match on the token, then on the lemma.
  const ProfanityEntry* lookup(const std::string& token, const std::string& lemma) const {
    if (auto it = index_.find(token); it != index_.end()) return &entries_[it->second];
    if (auto it = index_.find(lemma); it != index_.end()) return &entries_[it->second];
    return nullptr;
  }

  const ProfanityEntry* find(const std::string& surface) const {
    auto it = index_.find(surface);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  const std::vector<ProfanityEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// CSV with a header row naming at least text, category_1 and
  /// severity_rating; canonical_form_1..3 and severity_description are
  /// optional. Extra columns are ignored. Every non-empty canonical form is
  /// also added as a surface with the row's category and severity.
  static Lexicon parse(std::istream& in) {
    std::size_t lineno = 0;
    auto header = csv::read_record(in, lineno);
    if (!header) throw ParseError("lexicon is empty", 1);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header->size(); ++i) {
      auto name = to_lower(trim((*header)[i]));
      if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
      col.emplace(name, i);
    }
    auto required = [&](const char* name) {
      auto it = col.find(name);
      if (it == col.end()) throw ParseError(std::string("lexicon header lacks column ") + name, 1);
      return it->second;
    };
    auto optional = [&](const char* name) -> std::optional<std::size_t> {
      auto it = col.find(name);
      if (it == col.end()) return std::nullopt;
      return it->second;
    };
    const auto text_col = required("text");
    const auto cat_col = required("category_1");
    const auto sev_col = required("severity_rating");
    const auto desc_col = optional("severity_description");
    const std::array<std::optional<std::size_t>, 3> canon_cols{
        optional("canonical_form_1"), optional("canonical_form_2"), optional("canonical_form_3")};

    Lexicon lex;
    while (true) {
      std::size_t row_line = lineno + 1;
      auto row = csv::read_record(in, lineno);
      if (!row) break;
      if (row->size() == 1 && trim((*row)[0]).empty()) continue;
      auto field = [&](std::optional<std::size_t> c) -> std::string {
        if (!c || *c >= row->size()) return {};
        return std::string(trim((*row)[*c]));
      };
      auto surface = to_lower(field(text_col));
      if (surface.empty()) throw ParseError("lexicon row has empty text", row_line);
      auto category = category_from_string(field(cat_col));
      if (!category) throw ParseError("unknown category '" + field(cat_col) + "'", row_line);
      auto sev_text = field(sev_col);
      double severity = 0;
      auto [ptr, ec] = std::from_chars(sev_text.data(), sev_text.data() + sev_text.size(), severity);
      if (ec != std::errc() || ptr != sev_text.data() + sev_text.size())
        throw ParseError("bad severity '" + sev_text + "'", row_line);
      if (!(severity >= kMinSeverity && severity <= kMaxSeverity))
        throw SeverityOutOfRange("severity " + sev_text + " outside [1, 3] at line " + std::to_string(row_line));
      auto description = field(desc_col);

      std::vector<std::string> canon;
      for (const auto& c : canon_cols) {
        auto v = to_lower(field(c));
        if (!v.empty()) canon.push_back(std::move(v));
      }
      lex.add({surface, canon.empty() ? surface : canon.front(), *category, severity, {}, description});
      for (const auto& form : canon) lex.add({form, form, *category, severity, {}, description});
    }
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon " + path.string());
    return parse(in);
  }

  void write(std::ostream& out) const {
    out << "text,canonical_form_1,canonical_form_2,canonical_form_3,category_1,severity_rating,"
           "severity_description\n";
    for (const auto& e : entries_) {
      out << csv::quote(e.surface) << ',' << csv::quote(e.canonical) << ",,,"
          << csv::quote(std::string(to_string(e.category))) << ',' << format_severity(e.severity) << ','
          << csv::quote(e.description) << '\n';
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write lexicon " + path.string());
    write(out);
    if (!out) throw IoError("write failed for " + path.string());
  }

 private:
  std::vector<ProfanityEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline Lexicon load_lexicon(const std::filesystem::path& path) { return Lexicon::load(path); }

}  // namespace raplyr
