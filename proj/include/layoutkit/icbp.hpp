// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Instance-coordinate binding prompt grammar: captions carry per-instance
// normalized bounding boxes inline as `<bbox>[x1,y1,x2,y2]</bbox>` tags
// placed right after the subject phrase, optionally with a count prefix
// ("3 dogs ...") and a reference suffix ("from imageN"). Serialization is
// bit-exact; parsing is tolerant and canonicalizes on re-serialization.

#pragma once

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "layoutkit/bbox.hpp"
#include "layoutkit/errors.hpp"

namespace layoutkit::icbp {

struct InstanceTag {
  std::string subject;                    // nonempty
  int count = 1;                          // serialized prefix when > 1
  std::vector<BBox> boxes;                // validate() reports count mismatch
  std::optional<int> source_image;        // 1-based reference image index
};

using Span = std::variant<std::string, InstanceTag>;

/// A caption decomposed into plain text and instance tags. The subject-tag
/// separator space (no-reference form) and the count prefix are structural:
/// they are re-created by serialization, not stored in the plain spans.
struct LayoutPrompt {
  std::vector<Span> spans;

  /// Caption with every tag replaced by its bare subject phrase.
  std::string original_caption() const {
    std::string out;
    for (const auto& span : spans) {
      if (const auto* text = std::get_if<std::string>(&span)) {
        out += *text;
      } else {
        out += std::get<InstanceTag>(span).subject;
      }
    }
    return out;
  }

  std::vector<const InstanceTag*> tags() const {
    std::vector<const InstanceTag*> out;
    for (const auto& span : spans) {
      if (const auto* tag = std::get_if<InstanceTag>(&span)) out.push_back(tag);
    }
    return out;
  }
};

// -- formatting ---------------------------------------------------------------

/// Three-decimal fixed form with trailing zeros trimmed: 0.2, 0.326, 1, 0.
inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

inline std::string format_box(const BBox& b) {
  return "<bbox>[" + format_coord(b.x1) + "," + format_coord(b.y1) + "," +
         format_coord(b.x2) + "," + format_coord(b.y2) + "]</bbox>";
}

/// Converts a pixel box to a normalized BBox, rounding half-up to three
/// decimals in exact integer arithmetic so decimal ties never depend on
/// binary representation.
inline BBox normalize_box(const std::array<int, 4>& px, int width,
                          int height) {
  if (width <= 0 || height <= 0)
    throw DataError("normalize_box: image dimensions must be positive");
  if (px[0] < 0 || px[1] < 0 || px[0] > px[2] || px[1] > px[3] ||
      px[2] > width || px[3] > height)
    throw DataError("normalize_box: pixel corners must be ordered and inside the image");

  const auto norm = [](long long p, long long dim) {
    // round-half-up(p * 1000 / dim) / 1000
    const long long scaled = (2 * p * 1000 + dim) / (2 * dim);
    return static_cast<double>(scaled) / 1000.0;
  };
  BBox b{norm(px[0], width), norm(px[1], height), norm(px[2], width),
         norm(px[3], height)};
  if (b.x1 >= b.x2 || b.y1 >= b.y2)
    throw DegenerateBox("normalize_box: box degenerates to zero width/height after rounding");
  return b;
}

// -- serialization ------------------------------------------------------------

namespace detail {

inline std::string serialize_tag(const InstanceTag& tag) {
  std::string out;
  if (tag.count > 1) out += std::to_string(tag.count) + " ";
  out += tag.subject;
  // No space before the first box when a reference image is attached,
  // one space otherwise.
  out += tag.source_image ? "" : " ";
  for (std::size_t i = 0; i < tag.boxes.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_box(tag.boxes[i]);
  }
  if (tag.source_image)
    out += " from image" + std::to_string(*tag.source_image);
  return out;
}

}  // namespace detail

inline std::string serialize_prompt(const LayoutPrompt& prompt) {
  std::string out;
  for (const auto& span : prompt.spans) {
    if (const auto* text = std::get_if<std::string>(&span)) {
      out += *text;
    } else {
      out += detail::serialize_tag(std::get<InstanceTag>(span));
    }
  }
  return out;
}

/// Prompt text with every box tag dropped; subject phrases, count prefixes
/// and reference suffixes are kept and seams stay single-spaced.
inline std::string strip_coordinates(const LayoutPrompt& prompt) {
  std::string out;
  for (const auto& span : prompt.spans) {
    if (const auto* text = std::get_if<std::string>(&span)) {
      std::string_view piece = *text;
      // Seam between spans: never collapse runs inside a single plain span.
      if (!out.empty() && !piece.empty() &&
          std::isspace(static_cast<unsigned char>(out.back())) &&
          std::isspace(static_cast<unsigned char>(piece.front()))) {
        while (!piece.empty() &&
               std::isspace(static_cast<unsigned char>(piece.front())))
          piece.remove_prefix(1);
      }
      out += piece;
    } else {
      const auto& tag = std::get<InstanceTag>(span);
      if (tag.count > 1) out += std::to_string(tag.count) + " ";
      out += tag.subject;
      if (tag.source_image)
        out += " from image" + std::to_string(*tag.source_image);
    }
  }
  return out;
}

// -- parsing ------------------------------------------------------------------

namespace detail {

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_pure_number(std::string_view word) {
  if (word.empty()) return false;
  for (char c : word)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

/// Deterministic subject boundary: walking backwards from the tag, collect
/// up to five words that are neither stopwords, numerals, nor punctuated.
inline bool is_stopword(std::string_view word) {
  static const char* kStopwords[] = {
      "a",    "an",   "the",  "and",  "or",     "of",    "with",  "on",
      "in",   "at",   "to",   "from", "by",     "for",   "is",    "are",
      "was",  "were", "his",  "her",  "its",    "their", "there", "this",
      "that", "these","those","near", "under",  "over",  "behind","beside",
      "as",   "into", "onto", "above","below"};
  std::string lower;
  lower.reserve(word.size());
  for (char c : word)
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const char* s : kStopwords)
    if (lower == s) return true;
  return false;
}

inline bool has_punctuation(std::string_view word) {
  constexpr std::string_view kPunct = ".,!?;:()[]{}<>\"'`";
  for (char c : word)
    if (kPunct.find(c) != std::string_view::npos) return true;
  return false;
}

struct SubjectSplit {
  std::size_t plain_end;     // prefix [0, plain_end) stays plain text
  std::size_t subject_begin; // subject phrase substring bounds
  std::size_t subject_end;
  std::optional<int> count;  // numeral prefix, when present
};

/// Splits `raw` (the text between the previous span and a tag) into the
/// plain prefix, optional count numeral, and the subject phrase.
inline std::optional<SubjectSplit> split_subject(std::string_view raw) {
  std::size_t end = raw.size();
  while (end > 0 && is_space(raw[end - 1])) --end;  // separator whitespace
  if (end == 0) return std::nullopt;

  struct Word {
    std::size_t begin, end;
  };
  std::vector<Word> words;
  std::size_t pos = end;
  constexpr int kMaxSubjectWords = 5;
  while (pos > 0 && static_cast<int>(words.size()) < kMaxSubjectWords + 1) {
    std::size_t wend = pos;
    while (wend > 0 && is_space(raw[wend - 1])) --wend;
    if (wend == 0) break;
    std::size_t wbegin = wend;
    while (wbegin > 0 && !is_space(raw[wbegin - 1])) --wbegin;
    words.push_back({wbegin, wend});
    pos = wbegin;
  }

  SubjectSplit split{};
  int taken = 0;
  for (const auto& w : words) {
    std::string_view word = raw.substr(w.begin, w.end - w.begin);
    if (is_pure_number(word)) {
      if (taken > 0) {
        const long value =
            std::strtol(std::string(word).c_str(), nullptr, 10);
        if (value >= 1) {
          split.count = static_cast<int>(value);
          split.plain_end = w.begin;
        }
      }
      break;
    }
    if (is_stopword(word) || has_punctuation(word) || taken >= kMaxSubjectWords)
      break;
    split.subject_begin = w.begin;
    if (taken == 0) split.subject_end = w.end;
    split.plain_end = w.begin;
    ++taken;
  }
  if (taken == 0) return std::nullopt;
  return split;
}

/// Parses the bracketed coordinate list of one tag. `pos` points just past
/// "<bbox>"; on return it points just past "</bbox>".
inline BBox parse_box_body(std::string_view text, std::size_t tag_offset,
                           std::size_t& pos) {
  const auto skip_ws = [&] {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  };
  skip_ws();
  if (pos >= text.size() || text[pos] != '[')
    throw MalformedTag("expected '[' after <bbox>", tag_offset);
  ++pos;

  double coords[4];
  for (int i = 0; i < 4; ++i) {
    skip_ws();
    const std::size_t num_begin = pos;
    while (pos < text.size() && text[pos] != ',' && text[pos] != ']' &&
           !is_space(text[pos]))
      ++pos;
    const std::string token(text.substr(num_begin, pos - num_begin));
    if (token.empty())
      throw MalformedTag("missing coordinate in <bbox> tag", num_begin);
    char* parse_end = nullptr;
    const double value = std::strtod(token.c_str(), &parse_end);
    if (parse_end != token.c_str() + token.size())
      throw MalformedTag("non-numeric coordinate '" + token + "'", num_begin);
    coords[i] = round3(value);
    skip_ws();
    if (i < 3) {
      if (pos >= text.size() || text[pos] != ',')
        throw MalformedTag("expected ',' between coordinates", pos);
      ++pos;
    }
  }
  if (pos >= text.size() || text[pos] != ']')
    throw MalformedTag("expected ']' after four coordinates", pos);
  ++pos;
  skip_ws();
  constexpr std::string_view kClose = "</bbox>";
  if (text.substr(pos, kClose.size()) != kClose)
    throw MalformedTag("unclosed <bbox> tag", tag_offset);
  pos += kClose.size();

  for (double c : coords)
    if (c < 0.0 || c > 1.0)
      throw OutOfRange("coordinate outside [0,1]", tag_offset);
  BBox box{coords[0], coords[1], coords[2], coords[3]};
  if (box.x1 >= box.x2 || box.y1 >= box.y2)
    throw OutOfRange("box corners not ordered (x1<x2, y1<y2 required)",
                     tag_offset);
  return box;
}

/// Matches `from imageN` / `from image N` after a tag. Returns the index and
/// advances `pos` past the suffix, or returns nullopt leaving `pos` alone.
inline std::optional<int> parse_source_suffix(std::string_view text,
                                              std::size_t& pos) {
  std::size_t p = pos;
  std::size_t ws = 0;
  while (p < text.size() && is_space(text[p])) ++p, ++ws;
  if (ws == 0) return std::nullopt;
  constexpr std::string_view kFrom = "from";
  if (text.substr(p, kFrom.size()) != kFrom) return std::nullopt;
  p += kFrom.size();
  ws = 0;
  while (p < text.size() && is_space(text[p])) ++p, ++ws;
  if (ws == 0) return std::nullopt;
  constexpr std::string_view kImage = "image";
  if (text.substr(p, kImage.size()) != kImage) return std::nullopt;
  p += kImage.size();
  while (p < text.size() && is_space(text[p])) ++p;
  std::size_t digits_begin = p;
  while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p])))
    ++p;
  if (p == digits_begin) return std::nullopt;
  const int index = static_cast<int>(
      std::strtol(std::string(text.substr(digits_begin, p - digits_begin)).c_str(),
                  nullptr, 10));
  if (index < 1) return std::nullopt;
  pos = p;
  return index;
}

}  // namespace detail

/// Parses prompt text. Tag-free text yields one plain span. Throws
/// MalformedTag / OutOfRange with the byte offset of the offending input.
inline LayoutPrompt parse_prompt(std::string_view text) {
  constexpr std::string_view kOpen = "<bbox>";
  LayoutPrompt prompt;
  std::size_t cursor = 0;

  while (true) {
    const std::size_t tag_at = text.find(kOpen, cursor);
    if (tag_at == std::string_view::npos) break;

    const std::string_view raw = text.substr(cursor, tag_at - cursor);
    const auto split = detail::split_subject(raw);
    if (!split)
      throw MalformedTag("tag requires a preceding subject phrase", tag_at);

    if (split->plain_end > 0)
      prompt.spans.emplace_back(std::string(raw.substr(0, split->plain_end)));

    InstanceTag tag;
    tag.subject = std::string(
        raw.substr(split->subject_begin, split->subject_end - split->subject_begin));

    std::size_t pos = tag_at + kOpen.size();
    tag.boxes.push_back(detail::parse_box_body(text, tag_at, pos));
    while (true) {
      std::size_t p = pos;
      while (p < text.size() && detail::is_space(text[p])) ++p;
      if (p >= text.size() || text[p] != ',') break;
      ++p;
      while (p < text.size() && detail::is_space(text[p])) ++p;
      if (text.substr(p, kOpen.size()) != kOpen) break;
      const std::size_t next_tag_at = p;
      p += kOpen.size();
      tag.boxes.push_back(detail::parse_box_body(text, next_tag_at, p));
      pos = p;
    }
    tag.source_image = detail::parse_source_suffix(text, pos);
    tag.count = split->count.value_or(static_cast<int>(tag.boxes.size()));

    prompt.spans.emplace_back(std::move(tag));
    cursor = pos;
  }

  if (cursor < text.size() || prompt.spans.empty())
    prompt.spans.emplace_back(std::string(text.substr(cursor)));
  return prompt;
}

// -- validation ---------------------------------------------------------------

enum class ViolationKind {
  CountMismatch,
  DegenerateBox,
  OutOfRangeBox,
  DuplicateSource,
  EmptySubject,
  EmptyBoxes,
};

struct Violation {
  ViolationKind kind;
  int tag_index;  // index among tags, in span order
  std::string message;
};

/// Structural checks on a prompt. Violations are data, not failures, so
/// hand-built prompts with bad boxes can be inspected.
inline std::vector<Violation> validate(const LayoutPrompt& prompt) {
  std::vector<Violation> out;
  std::vector<std::pair<int, std::string>> sources;  // (source idx, subject)
  int tag_index = -1;
  for (const auto& span : prompt.spans) {
    const auto* tag = std::get_if<InstanceTag>(&span);
    if (!tag) continue;
    ++tag_index;
    if (tag->subject.empty())
      out.push_back({ViolationKind::EmptySubject, tag_index,
                     "subject phrase is empty"});
    if (tag->boxes.empty())
      out.push_back({ViolationKind::EmptyBoxes, tag_index, "tag has no boxes"});
    if (tag->count != static_cast<int>(tag->boxes.size()))
      out.push_back({ViolationKind::CountMismatch, tag_index,
                     "count " + std::to_string(tag->count) + " != " +
                         std::to_string(tag->boxes.size()) + " boxes"});
    for (const auto& b : tag->boxes) {
      const bool in_range = b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= 1.0 &&
                            b.y2 <= 1.0 && b.x1 <= b.x2 && b.y1 <= b.y2;
      if (!in_range) {
        out.push_back({ViolationKind::OutOfRangeBox, tag_index,
                       "box outside [0,1] or corners inverted"});
      } else if (b.x1 == b.x2 || b.y1 == b.y2) {
        out.push_back({ViolationKind::DegenerateBox, tag_index,
                       "box has zero width or height"});
      }
    }
    if (tag->source_image) {
      for (const auto& [src, subject] : sources) {
        if (src == *tag->source_image && subject != tag->subject) {
          out.push_back({ViolationKind::DuplicateSource, tag_index,
                         "image" + std::to_string(src) +
                             " bound to conflicting subjects"});
          break;
        }
      }
      sources.emplace_back(*tag->source_image, tag->subject);
    }
  }
  return out;
}

}  // namespace layoutkit::icbp
