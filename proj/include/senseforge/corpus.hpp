#pragma once

// Instance corpora, key files, tokenization and vocabularies.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <locale.h>
#include <wctype.h>

#include <json.hpp>

#include "senseforge/error.hpp"

namespace senseforge {

enum class Pos : char { noun = 'n', verb = 'v' };

// A target word of record: "promotion.n" is lemma "promotion", Pos::noun.
struct Target {
  std::string lemma;
  Pos pos = Pos::noun;

  std::string key() const { return lemma + "." + static_cast<char>(pos); }

  // Throws ConfigError on anything that is not "<lemma>.<n|v>".
  static Target parse(std::string_view s) {
    auto dot = s.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 2 != s.size())
      throw ConfigError("bad target '" + std::string(s) + "': expected <lemma>.<n|v>");
    char p = s[dot + 1];
    if (p != 'n' && p != 'v')
      throw ConfigError("bad target '" + std::string(s) + "': POS must be 'n' or 'v'");
    return Target{std::string(s.substr(0, dot)), static_cast<Pos>(p)};
  }

  friend bool operator==(const Target&, const Target&) = default;
  friend auto operator<=>(const Target& a, const Target& b) { return a.key() <=> b.key(); }
};

struct Instance {
  Target target;
  std::string id;
  std::string text;

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class CorpusFormat { jsonl, directory };

// ---------------------------------------------------------------------------
// Tokenization

namespace detail {

inline locale_t utf8_ctype() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
    if (l == static_cast<locale_t>(nullptr))
      l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", static_cast<locale_t>(nullptr));
    return l;
  }();
  return loc;
}

inline bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  locale_t loc = utf8_ctype();
  if (loc == static_cast<locale_t>(nullptr)) return true;
  return iswalpha_l(static_cast<wint_t>(cp), loc) != 0;
}

inline char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  locale_t loc = utf8_ctype();
  if (loc == static_cast<locale_t>(nullptr)) return cp;
  return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

// Decodes one code point at s[i], advancing i. Invalid sequences yield
// U+FFFD and consume a single byte.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  constexpr char32_t bad = 0xFFFD;
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
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
    return bad;
  }
  if (i + len > s.size()) {
    ++i;
    return bad;
  }
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return bad;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return bad;
  }
  i += len;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace detail

// Maximal runs of Unicode letters, lowercased. Everything else (digits,
// punctuation, whitespace, invalid bytes) separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = detail::decode_utf8(text, i);
    if (detail::is_letter(cp)) {
      detail::append_utf8(current, detail::to_lower(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary

using WordId = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;

  // Words with frequency >= min_count, ids in first-occurrence order.
  static Vocabulary build(const std::vector<std::vector<std::string>>& docs,
                          std::size_t min_count = 1) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::unordered_map<std::string, std::size_t> freq;
    std::vector<std::string> order;
    for (const auto& doc : docs) {
      for (const auto& w : doc) {
        auto [it, inserted] = freq.try_emplace(w, 0);
        if (inserted) order.push_back(w);
        ++it->second;
      }
    }
    std::vector<std::string> kept;
    for (auto& w : order)
      if (freq[w] >= min_count) kept.push_back(std::move(w));
    return from_words(std::move(kept));
  }

  // Throws IntegrityError on duplicates.
  static Vocabulary from_words(std::vector<std::string> words) {
    Vocabulary v;
    v.index_.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!v.index_.emplace(words[i], static_cast<WordId>(i)).second)
        throw IntegrityError("duplicate vocabulary word '" + words[i] + "'");
    }
    v.words_ = std::move(words);
    return v;
  }

  std::optional<WordId> id_of(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word_of(WordId id) const { return words_.at(id); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct EncodedDocument {
  std::string instance_id;
  std::vector<WordId> tokens;

  std::size_t length() const noexcept { return tokens.size(); }
};

// Out-of-vocabulary tokens are dropped; order is preserved.
inline EncodedDocument encode_tokens(std::string id, const std::vector<std::string>& tokens,
                                     const Vocabulary& vocab) {
  EncodedDocument doc{std::move(id), {}};
  doc.tokens.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto wid = vocab.id_of(t)) doc.tokens.push_back(*wid);
  return doc;
}

inline EncodedDocument encode(const Instance& instance, const Vocabulary& vocab) {
  return encode_tokens(instance.id, tokenize(instance.text), vocab);
}

inline std::vector<std::string> decode(const EncodedDocument& doc, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(doc.tokens.size());
  for (WordId id : doc.tokens) out.push_back(vocab.word_of(id));
  return out;
}

// ---------------------------------------------------------------------------
// Instance loading

namespace detail {

inline void check_unique_ids(const std::vector<Instance>& instances) {
  std::unordered_set<std::string> seen;
  for (const auto& inst : instances)
    if (!seen.insert(inst.id).second)
      throw IntegrityError("duplicate instance id '" + inst.id + "'");
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

// One JSON object per line with exactly the keys target, id and text.
inline std::vector<Instance> parse_instances_jsonl(std::istream& in, const std::string& source) {
  std::vector<Instance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || j.size() != 3 || !j.contains("target") || !j.contains("id") ||
        !j.contains("text"))
      throw ParseError(source, lineno, "expected an object with exactly the keys target, id, text");
    if (!j["target"].is_string() || !j["id"].is_string() || !j["text"].is_string())
      throw ParseError(source, lineno, "target, id and text must be strings");
    Instance inst;
    try {
      inst.target = Target::parse(j["target"].get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
    inst.id = j["id"].get<std::string>();
    if (inst.id.empty()) throw ParseError(source, lineno, "empty instance id");
    inst.text = j["text"].get<std::string>();
    out.push_back(std::move(inst));
  }
  detail::check_unique_ids(out);
  return out;
}

// <root>/<lemma>.<pos>/<instance_id>.txt; directories and files are visited
// in sorted name order.
inline std::vector<Instance> load_instances_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ConfigError("not a directory: " + root.string());
  std::vector<fs::path> targets;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) targets.push_back(e.path());
  std::sort(targets.begin(), targets.end());
  std::vector<Instance> out;
  for (const auto& dir : targets) {
    Target target;
    try {
      target = Target::parse(dir.filename().string());
    } catch (const ConfigError& e) {
      throw ParseError(dir.string(), 0, e.what());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      if (!in) throw ConfigError("cannot read " + f.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      out.push_back(Instance{target, f.stem().string(), ss.str()});
    }
  }
  detail::check_unique_ids(out);
  return out;
}

inline std::vector<Instance> load_instances(const std::filesystem::path& path, CorpusFormat format) {
  if (format == CorpusFormat::directory) return load_instances_directory(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read corpus " + path.string());
  return parse_instances_jsonl(in, path.string());
}

// Directories are read as dir-per-target, anything else as JSONL.
inline std::vector<Instance> load_instances(const std::filesystem::path& path) {
  return load_instances(path, std::filesystem::is_directory(path) ? CorpusFormat::directory
                                                                  : CorpusFormat::jsonl);
}

// Target key -> instances, preserving input order within each group.
inline std::map<std::string, std::vector<Instance>> group_by_target(
    const std::vector<Instance>& instances) {
  std::map<std::string, std::vector<Instance>> groups;
  for (const auto& inst : instances) groups[inst.target.key()].push_back(inst);
  return groups;
}

// ---------------------------------------------------------------------------
// Key files: "<lemma>.<pos> <instance_id> <label>", '#' comments.

// Per target word, instance id -> single sense label. Used for both gold
// standards and system output.
class GoldStandard {
 public:
  using LabelMap = std::map<std::string, std::string>;

  // Throws IntegrityError when the instance is already labeled.
  void add(const Target& target, const std::string& instance_id, const std::string& label) {
    auto& labels = by_target_[target.key()];
    if (!labels.emplace(instance_id, label).second)
      throw IntegrityError("duplicate key entry for instance '" + instance_id + "'");
    targets_.emplace(target.key(), target);
  }

  // nullptr when the target has no entries.
  const LabelMap* labels(const std::string& target_key) const {
    auto it = by_target_.find(target_key);
    return it == by_target_.end() ? nullptr : &it->second;
  }

  std::vector<Target> targets() const {
    std::vector<Target> out;
    for (const auto& [k, t] : targets_) out.push_back(t);
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [k, m] : by_target_) n += m.size();
    return n;
  }

  bool empty() const { return by_target_.empty(); }

  const std::map<std::string, LabelMap>& entries() const noexcept { return by_target_; }

  friend bool operator==(const GoldStandard& a, const GoldStandard& b) {
    return a.by_target_ == b.by_target_;
  }

 private:
  std::map<std::string, LabelMap> by_target_;
  std::map<std::string, Target> targets_;
};

using SystemKey = GoldStandard;

inline GoldStandard parse_key_stream(std::istream& in, const std::string& source) {
  GoldStandard key;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    auto first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos || view[first] == '#') continue;
    std::istringstream fields(line);
    std::string target_s, id, label, extra;
    if (!(fields >> target_s >> id >> label))
      throw ParseError(source, lineno, "expected '<lemma>.<pos> <instance_id> <label>'");
    if (fields >> extra)
      throw ParseError(source, lineno, "unexpected extra field '" + extra + "'");
    Target target;
    try {
      target = Target::parse(target_s);
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
    try {
      key.add(target, id, label);
    } catch (const IntegrityError& e) {
      throw IntegrityError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return key;
}

inline GoldStandard load_key_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read key file " + path.string());
  return parse_key_stream(in, path.string());
}

// Canonical form: targets, then instance ids, in sorted order; no comments.
inline void write_key_stream(const GoldStandard& key, std::ostream& out) {
  auto has_space = [](const std::string& s) {
    return s.empty() || s.find_first_of(" \t\r\n") != std::string::npos;
  };
  for (const auto& [target, labels] : key.entries()) {
    for (const auto& [id, label] : labels) {
      if (has_space(id) || has_space(label))
        throw ConfigError("key fields must be non-empty and whitespace-free: '" + id + "' '" +
                          label + "'");
      out << target << ' ' << id << ' ' << label << '\n';
    }
  }
}

inline void write_key_file(const GoldStandard& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write key file " + path.string());
  write_key_stream(key, out);
}

}  // namespace senseforge
