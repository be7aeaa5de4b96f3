#include "egr/text_similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "egr/error.hpp"

namespace egr {

namespace {

// Decodes one UTF-8 code point starting at text[pos]; advances pos. Invalid
// bytes decode as themselves so tokenization never fails.
char32_t next_code_point(std::string_view text, std::size_t& pos, std::size_t& width) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  char32_t cp = lead;
  if (lead >= 0xF0 && lead < 0xF8) {
    len = 4;
    cp = lead & 0x07;
  } else if (lead >= 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if (lead >= 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  }
  if (len > 1) {
    if (pos + len > text.size()) {
      len = 1;
      cp = lead;
    } else {
      for (std::size_t k = 1; k < len; ++k) {
        const auto cont = static_cast<unsigned char>(text[pos + k]);
        if ((cont & 0xC0) != 0x80) {
          len = 1;
          cp = lead;
          break;
        }
        cp = (cp << 6) | (cont & 0x3F);
      }
    }
  }
  width = len;
  pos += len;
  return cp;
}

bool is_boundary(char32_t cp) {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    return !std::isalnum(c);
  }
  return (cp >= 0x80 && cp <= 0xBF) ||      // Latin-1 controls, symbols, punctuation
         cp == 0xD7 || cp == 0xF7 ||        // multiplication / division signs
         (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation, spaces
         (cp >= 0x3000 && cp <= 0x303F) ||  // CJK punctuation
         cp == 0xFEFF;
}

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    std::size_t width = 1;
    const char32_t cp = next_code_point(text, pos, width);
    if (is_boundary(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (cp >= 'A' && cp <= 'Z') {
      current.push_back(static_cast<char>(cp - 'A' + 'a'));
    } else {
      current.append(text.substr(start, width));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw DimensionError("embedding dimension must be >= 1");
}

EmbeddingStore EmbeddingStore::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<EmbeddingStore> store;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    values.clear();
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(line_no, "non-numeric embedding component '" + tok + "'");
      }
    }
    if (!store) {
      // Optional "<vocab> <dim>" header.
      if (values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) {
        store.emplace(static_cast<std::size_t>(values[0]));
        continue;
      }
      if (values.empty()) throw ParseError(line_no, "embedding line has no components");
      store.emplace(values.size());
    }
    if (values.size() != store->dimension()) {
      throw ParseError(line_no, "expected " + std::to_string(store->dimension()) +
                                    " components, got " + std::to_string(values.size()));
    }
    if (!store->contains(word)) store->add(word, values);
  }
  if (!store || store->empty()) throw ValidationError("embedding file contains no vectors");
  return std::move(*store);
}

EmbeddingStore EmbeddingStore::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings '" + path + "'");
  return load(in);
}

void EmbeddingStore::add(std::string_view word, std::span<const double> vec) {
  if (vec.size() != dimension_) {
    throw DimensionError("vector for '" + std::string(word) + "' has dimension " +
                         std::to_string(vec.size()) + ", store has " + std::to_string(dimension_));
  }
  auto key = lowercase_ascii(word);
  auto [it, fresh] = index_.try_emplace(key, words_.size());
  if (fresh) {
    words_.push_back(key);
    data_.insert(data_.end(), vec.begin(), vec.end());
  } else {
    std::copy(vec.begin(), vec.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dimension_));
  }
}

std::span<const double> EmbeddingStore::lookup(std::string_view word) const {
  auto it = index_.find(lowercase_ascii(word));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dimension_, dimension_};
}

void EmbeddingStore::save(std::ostream& out) const {
  out << words_.size() << ' ' << dimension_ << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    for (std::size_t d = 0; d < dimension_; ++d) out << ' ' << data_[i * dimension_ + d];
    out << '\n';
  }
}

void EmbeddingStore::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save(out);
}

SentenceEmbedding embed_sentence(std::span<const std::string> tokens, const EmbeddingStore& store) {
  SentenceEmbedding e;
  e.vector.assign(store.dimension(), 0.0);
  e.total_tokens = tokens.size();
  for (const auto& tok : tokens) {
    auto vec = store.lookup(tok);
    if (vec.empty()) continue;
    for (std::size_t d = 0; d < vec.size(); ++d) e.vector[d] += vec[d];
    ++e.covered_tokens;
  }
  if (e.covered_tokens > 0) {
    const double inv = 1.0 / static_cast<double>(e.covered_tokens);
    for (auto& x : e.vector) x *= inv;
  }
  return e;
}

SentenceEmbedding embed_text(std::string_view text, const EmbeddingStore& store) {
  auto tokens = tokenize(text);
  return embed_sentence(tokens, store);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine_similarity: dimension " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) return 0.0;
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, 0.0, 1.0);
}

double cosine_similarity(const SentenceEmbedding& u, const SentenceEmbedding& v) {
  if (u.vector.size() != v.vector.size()) {
    throw DimensionError("cosine_similarity: dimension " + std::to_string(u.vector.size()) +
                         " vs " + std::to_string(v.vector.size()));
  }
  if (u.is_zero() || v.is_zero()) return 0.0;
  return cosine_similarity(std::span<const double>(u.vector), std::span<const double>(v.vector));
}

bool is_similar(std::string_view a, std::string_view b, const EmbeddingStore& store,
                double threshold) {
  if (threshold < 0 || threshold > 1) throw ConfigError("similarity threshold must be in [0,1]");
  return cosine_similarity(embed_text(a, store), embed_text(b, store)) >= threshold;
}

}  // namespace egr
