#pragma once

// Binary model files, one per target word. All integers little-endian,
// doubles as their IEEE-754 bit pattern in a little-endian u64.
//
//   magic          8 bytes  "SFLDAMDL"
//   version        u32      = 1
//   target         str      (u32 byte length, UTF-8 bytes)
//   K, V           u32, u32
//   alpha, beta    f64, f64
//   train_iters    u64
//   infer_iters    u64
//   infer_burn_in  u64
//   seed           u64
//   vocabulary     V x str, in id order
//   n_kw           K x V x u64, row-major (topic-major)
//
// n_k is recomputed on load.

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "senseforge/corpus.hpp"
#include "senseforge/error.hpp"
#include "senseforge/lda.hpp"

namespace senseforge {

inline constexpr std::array<char, 8> kModelMagic = {'S', 'F', 'L', 'D', 'A', 'M', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

struct StoredModel {
  std::string target;
  TopicModel model;
};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

inline void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::string str() {
    auto n = u32();
    std::string s(n, '\0');
    read(reinterpret_cast<unsigned char*>(s.data()), n);
    return s;
  }

  void read(unsigned char* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated model file");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, 0, what); }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace detail

inline void write_model(const TopicModel& model, const std::string& target, std::ostream& out) {
  const auto& c = model.config();
  out.write(kModelMagic.data(), kModelMagic.size());
  detail::put_u32(out, kModelVersion);
  detail::put_str(out, target);
  detail::put_u32(out, static_cast<std::uint32_t>(model.topics()));
  detail::put_u32(out, static_cast<std::uint32_t>(model.vocab_size()));
  detail::put_u64(out, std::bit_cast<std::uint64_t>(c.alpha));
  detail::put_u64(out, std::bit_cast<std::uint64_t>(c.beta));
  detail::put_u64(out, c.train_iters);
  detail::put_u64(out, c.infer_iters);
  detail::put_u64(out, c.infer_burn_in);
  detail::put_u64(out, c.seed);
  for (const auto& w : model.vocab().words()) detail::put_str(out, w);
  for (std::size_t k = 0; k < model.topics(); ++k)
    for (auto n : model.topic_row(k)) detail::put_u64(out, static_cast<std::uint64_t>(n));
}

inline StoredModel read_model(std::istream& in, const std::string& source) {
  detail::Reader r(in, source);
  std::array<unsigned char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (!std::equal(magic.begin(), magic.end(), kModelMagic.begin(),
                  [](unsigned char a, char b) { return a == static_cast<unsigned char>(b); }))
    r.fail("not a senseforge model file");
  if (auto v = r.u32(); v != kModelVersion)
    r.fail("unsupported model version " + std::to_string(v));
  std::string target = r.str();
  LdaConfig c;
  c.topics = r.u32();
  const std::uint32_t V = r.u32();
  c.alpha = std::bit_cast<double>(r.u64());
  c.beta = std::bit_cast<double>(r.u64());
  c.train_iters = r.u64();
  c.infer_iters = r.u64();
  c.infer_burn_in = r.u64();
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(std::string("invalid stored config: ") + e.what());
  }
  std::vector<std::string> words;
  words.reserve(V);
  for (std::uint32_t i = 0; i < V; ++i) words.push_back(r.str());
  TopicModel model(Vocabulary::from_words(std::move(words)), c);
  for (std::size_t k = 0; k < c.topics; ++k)
    for (std::uint32_t w = 0; w < V; ++w) {
      auto n = r.u64();
      if (n > static_cast<std::uint64_t>(INT64_MAX)) r.fail("count out of range");
      model.add(k, w, static_cast<std::int64_t>(n));
    }
  return {std::move(target), std::move(model)};
}

inline void save_model(const TopicModel& model, const std::string& target,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model " + path.string());
  write_model(model, target, out);
  if (!out) throw ConfigError("failed writing model " + path.string());
}

inline StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read model " + path.string());
  return read_model(in, path.string());
}

}  // namespace senseforge
