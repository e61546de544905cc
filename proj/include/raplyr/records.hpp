#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "raplyr/corpus.hpp"
#include "raplyr/error.hpp"

namespace raplyr {

// Corpus files are JSON Lines: one flat object per line, UTF-8.
//   raw:     {"artist", "title", "year" (int or null), "lyrics", "url"}
//   cleaned: raw keys plus "verses": [[line, ...], ...]

struct RawSongRecord {
  std::string artist;
  std::string title;
  std::optional<int> release_year;
  std::string lyrics_text;
  std::string source_url;

  friend bool operator==(const RawSongRecord&, const RawSongRecord&) = default;
};

inline nlohmann::json to_json(const RawSongRecord& r) {
  nlohmann::json j;
  j["artist"] = r.artist;
  j["title"] = r.title;
  j["year"] = r.release_year ? nlohmann::json(*r.release_year) : nlohmann::json(nullptr);
  j["lyrics"] = r.lyrics_text;
  j["url"] = r.source_url;
  return j;
}

namespace detail {

inline std::optional<int> optional_year(const nlohmann::json& j) {
  auto it = j.find("year");
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<int>();
}

inline std::string string_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->get<std::string>();
}

inline std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace detail

inline RawSongRecord raw_record_from_json(const nlohmann::json& j) {
  RawSongRecord r;
  r.artist = detail::string_field(j, "artist");
  r.title = detail::string_field(j, "title");
  r.release_year = detail::optional_year(j);
  r.lyrics_text = detail::string_field(j, "lyrics");
  r.source_url = detail::string_field(j, "url");
  return r;
}

/// Calls `fn` with each parsed line of a JSONL file; blank lines are skipped.
inline void for_each_json_line(const std::filesystem::path& path,
                               const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError(path.string() + ": record is not an object", lineno);
    try {
      fn(j, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  }
}

inline void write_json_lines(const std::vector<nlohmann::json>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& row : rows) out << detail::dump_line(row) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::size_t write_raw_corpus(const std::vector<RawSongRecord>& records,
                                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << detail::dump_line(to_json(r)) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
  return records.size();
}

inline std::vector<RawSongRecord> read_raw_corpus(const std::filesystem::path& path) {
  std::vector<RawSongRecord> out;
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(raw_record_from_json(j)); });
  return out;
}

/// Parses the raw lyrics into sections; does not clean.
inline Song song_from_raw(const RawSongRecord& r) {
  return Song{r.artist, r.title, r.release_year, r.source_url, parse_sections(r.lyrics_text)};
}

/// Cleaned record. "lyrics" is rebuilt from the verses so the raw keys stay
/// meaningful.
inline nlohmann::json song_to_json(const Song& song) {
  nlohmann::json j;
  j["artist"] = song.artist;
  j["title"] = song.title;
  j["year"] = song.year ? nlohmann::json(*song.year) : nlohmann::json(nullptr);
  std::string lyrics;
  auto verses = nlohmann::json::array();
  for (const auto& section : song.sections) {
    if (!lyrics.empty()) lyrics += "\n";
    lyrics += "[" + std::string(to_string(section.kind)) + "]";
    for (const auto& l : section.lines) lyrics += "\n" + l;
    verses.push_back(section.lines);
  }
  j["lyrics"] = lyrics;
  j["url"] = song.url;
  j["verses"] = std::move(verses);
  return j;
}

inline Song song_from_json(const nlohmann::json& j) {
  Song song{detail::string_field(j, "artist"), detail::string_field(j, "title"),
            detail::optional_year(j), detail::string_field(j, "url"), {}};
  auto it = j.find("verses");
  if (it == j.end()) {
    song.sections = parse_sections(detail::string_field(j, "lyrics"));
    return song;
  }
  for (const auto& verse : *it) song.sections.push_back(Section{SectionKind::Verse, verse.get<std::vector<std::string>>()});
  return song;
}

inline std::vector<Song> read_songs(const std::filesystem::path& path) {
  std::vector<Song> out;
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(song_from_json(j)); });
  return out;
}

inline std::size_t write_songs(const std::vector<Song>& songs, const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(songs.size());
  for (const auto& s : songs) rows.push_back(song_to_json(s));
  write_json_lines(rows, path);
  return rows.size();
}

}  // namespace raplyr
