#pragma once

// Synthetic corpora with known structure, used as ground truth for the
// sampler and the end-to-end pipeline.

#include <cmath>
#include <string>
#include <vector>

#include "senseforge/corpus.hpp"
#include "senseforge/rng.hpp"

namespace senseforge::synthetic {

// Letters-only rendering of n, so words survive tokenization intact.
inline std::string letters(std::size_t n, std::size_t width) {
  std::string s(width, 'a');
  for (std::size_t i = width; i-- > 0;) {
    s[i] = static_cast<char>('a' + n % 26);
    n /= 26;
  }
  return s;
}

inline std::string topic_word(std::size_t topic, std::size_t index) {
  return "z" + letters(topic, 2) + "q" + letters(index, 2);
}

// Dirichlet(1, ..., 1) draw.
inline std::vector<double> flat_dirichlet(std::size_t k, Rng& rng) {
  std::vector<double> x(k);
  double sum = 0;
  for (auto& v : x) sum += (v = -std::log1p(-rng.uniform()));
  for (auto& v : x) v /= sum;
  return x;
}

struct SenseCorpus {
  std::vector<Instance> instances;
  GoldStandard gold;
};

struct SenseCorpusSpec {
  Target target{"promotion", Pos::noun};
  std::vector<std::size_t> instances_per_sense{40, 40, 40, 40};
  std::size_t words_per_sense = 12;
  std::size_t tokens_per_instance = 40;
  std::uint64_t seed = 7;
};

// Every instance of sense s draws its tokens uniformly from sense s's own
// vocabulary and mentions the target lemma once. Senses are labeled
// "<lemma>.<pos>.sense<s>" in the gold key; instances are interleaved.
inline SenseCorpus sense_corpus(const SenseCorpusSpec& spec) {
  Rng rng(derive_seed(spec.seed, spec.target.key()));
  SenseCorpus out;
  std::vector<std::size_t> remaining = spec.instances_per_sense;
  std::size_t total = 0;
  for (auto n : remaining) total += n;
  std::size_t sense = 0;
  for (std::size_t i = 0; i < total; ++i) {
    while (remaining[sense % remaining.size()] == 0) ++sense;
    const std::size_t s = sense % remaining.size();
    --remaining[s];
    ++sense;
    std::string text = spec.target.lemma;
    for (std::size_t n = 0; n < spec.tokens_per_instance; ++n)
      text += " " + topic_word(s, rng.index(spec.words_per_sense));
    std::string id = spec.target.key() + "." + std::to_string(i + 1);
    out.gold.add(spec.target, id, spec.target.key() + ".sense" + std::to_string(s));
    out.instances.push_back({spec.target, std::move(id), std::move(text)});
  }
  return out;
}

struct TopicCorpus {
  Vocabulary vocab;
  std::vector<EncodedDocument> docs;
  std::vector<std::size_t> word_topic;  // generating topic of each word id
};

// Disjoint vocabularies: word id t * words_per_topic + i belongs to topic t.
// Document mixtures are Dirichlet(1).
inline TopicCorpus topic_corpus(std::size_t topics, std::size_t words_per_topic, std::size_t docs,
                                std::size_t tokens_per_doc, std::uint64_t seed) {
  Rng rng(seed);
  TopicCorpus out;
  std::vector<std::string> words;
  for (std::size_t t = 0; t < topics; ++t)
    for (std::size_t i = 0; i < words_per_topic; ++i) {
      words.push_back(topic_word(t, i));
      out.word_topic.push_back(t);
    }
  out.vocab = Vocabulary::from_words(std::move(words));
  for (std::size_t d = 0; d < docs; ++d) {
    auto theta = flat_dirichlet(topics, rng);
    EncodedDocument doc{"doc" + std::to_string(d), {}};
    for (std::size_t n = 0; n < tokens_per_doc; ++n) {
      double u = rng.uniform();
      std::size_t t = 0;
      while (t + 1 < topics && (u -= theta[t]) >= 0) ++t;
      doc.tokens.push_back(static_cast<WordId>(t * words_per_topic + rng.index(words_per_topic)));
    }
    out.docs.push_back(std::move(doc));
  }
  return out;
}

}  // namespace senseforge::synthetic
