#include "qrw/lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "qrw/error.hpp"

namespace qrw::lm {

// ---------------------------------------------------------------- counting

NGramCounts::NGramCounts() {
  for (auto tok : {kUnkToken, kBosToken, kEosToken}) intern(tok);
}

WordId NGramCounts::intern(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  if (words_.size() >= kMaxVocab) throw ContractError("language model vocabulary too large");
  const auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(token);
  index_.emplace(words_.back(), id);
  return id;
}

WordId NGramCounts::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

void NGramCounts::add_ids(std::span<const WordId> padded, std::uint64_t times) {
  for (std::size_t i = 0; i < padded.size(); ++i) {
    unigrams_[padded[i]] += times;
    if (i >= 1) bigrams_[pack(padded[i - 1], padded[i])] += times;
    if (i >= 2) trigrams_[pack(padded[i - 2], padded[i - 1], padded[i])] += times;
  }
}

void NGramCounts::add_sentence(std::span<const std::string> tokens) {
  std::vector<WordId> padded{kBos, kBos};
  padded.reserve(tokens.size() + 3);
  for (const auto& t : tokens) padded.push_back(intern(t));
  padded.push_back(kEos);
  add_ids(padded, 1);
}

void NGramCounts::merge(const NGramCounts& other) {
  std::vector<WordId> remap(other.words_.size());
  for (std::size_t i = 0; i < other.words_.size(); ++i) remap[i] = intern(other.words_[i]);
  for (const auto& [w, c] : other.unigrams_) unigrams_[remap[w]] += c;
  for (const auto& [k, c] : other.bigrams_) {
    const auto [u, v] = unpack2(k);
    bigrams_[pack(remap[u], remap[v])] += c;
  }
  for (const auto& [k, c] : other.trigrams_) {
    WordId u, v, w;
    unpack3(k, u, v, w);
    trigrams_[pack(remap[u], remap[v], remap[w])] += c;
  }
}

std::uint64_t NGramCounts::count(std::span<const std::string> ngram) const {
  std::vector<WordId> ids;
  for (const auto& t : ngram) {
    auto it = index_.find(t);
    if (it == index_.end()) return 0;
    ids.push_back(it->second);
  }
  auto lookup = [](const auto& map, auto key) -> std::uint64_t {
    auto it = map.find(key);
    return it == map.end() ? 0 : it->second;
  };
  switch (ids.size()) {
    case 1:
      return lookup(unigrams_, ids[0]);
    case 2:
      return lookup(bigrams_, pack(ids[0], ids[1]));
    case 3:
      return lookup(trigrams_, pack(ids[0], ids[1], ids[2]));
    default:
      throw ContractError("n-gram order must be 1..3");
  }
}

NGramCounts count_ngrams(std::span<const TokenSeq> corpus, const CountOptions& opts) {
  NGramCounts counts;
  if (opts.min_count <= 1) {
    for (const auto& s : corpus) counts.add_sentence(s);
    return counts;
  }
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& s : corpus) {
    for (const auto& t : s) ++freq[t];
  }
  TokenSeq mapped;
  for (const auto& s : corpus) {
    mapped.clear();
    for (const auto& t : s) {
      mapped.push_back(freq[t] >= opts.min_count ? t : std::string(kUnkToken));
    }
    counts.add_sentence(mapped);
  }
  return counts;
}

// -------------------------------------------------------------- estimation

TrigramModel TrigramModel::estimate(const NGramCounts& counts, double discount) {
  if (counts.empty()) throw ContractError("cannot estimate a language model from empty counts");
  if (!(discount > 0.0 && discount < 1.0)) throw ContractError("discount must lie in (0,1)");

  TrigramModel m;
  m.discount_ = discount;
  const double D = discount;

  // Vocabulary: specials first, then byte-sorted words.
  const std::size_t V = counts.vocab_size();
  std::vector<WordId> by_word;
  for (WordId i = 3; i < V; ++i) by_word.push_back(i);
  std::sort(by_word.begin(), by_word.end(),
            [&](WordId a, WordId b) { return counts.word(a) < counts.word(b); });
  std::vector<WordId> remap(V);
  for (WordId i = 0; i < 3; ++i) {
    remap[i] = i;
    m.words_.push_back(counts.word(i));
  }
  for (WordId old : by_word) {
    remap[old] = static_cast<WordId>(m.words_.size());
    m.words_.push_back(counts.word(old));
  }

  struct Tri {
    WordId u, v, w;
    std::uint64_t c;
  };
  std::vector<Tri> tri;
  tri.reserve(counts.trigrams().size());
  for (const auto& [k, c] : counts.trigrams()) {
    WordId u, v, w;
    NGramCounts::unpack3(k, u, v, w);
    tri.push_back({remap[u], remap[v], remap[w], c});
  }
  std::sort(tri.begin(), tri.end(), [](const Tri& a, const Tri& b) {
    return std::tie(a.u, a.v, a.w) < std::tie(b.u, b.v, b.w);
  });

  // Highest order: absolute discounting of raw counts.
  m.trigram_entries_.reserve(tri.size());
  for (std::size_t i = 0; i < tri.size();) {
    std::size_t j = i;
    std::uint64_t total = 0;
    while (j < tri.size() && tri[j].u == tri[i].u && tri[j].v == tri[i].v) total += tri[j++].c;
    const double t = static_cast<double>(total);
    TrigramContext ctx{tri[i].u, tri[i].v, D * static_cast<double>(j - i) / t,
                       m.trigram_entries_.size(), 0};
    for (std::size_t k = i; k < j; ++k) {
      m.trigram_entries_.push_back({tri[k].w, (static_cast<double>(tri[k].c) - D) / t});
    }
    ctx.end = m.trigram_entries_.size();
    m.trigram_ctx_.push_back(ctx);
    i = j;
  }

  // Middle order: continuation counts N(.vw) = distinct u preceding (v, w).
  struct Bi {
    WordId v, w;
  };
  std::vector<Bi> suffixes;
  suffixes.reserve(tri.size());
  for (const auto& t : tri) suffixes.push_back({t.v, t.w});
  std::sort(suffixes.begin(), suffixes.end(),
            [](const Bi& a, const Bi& b) { return std::tie(a.v, a.w) < std::tie(b.v, b.w); });

  std::vector<std::uint64_t> left_types(m.words_.size(), 0);  // N(.w)
  for (std::size_t i = 0; i < suffixes.size();) {
    // One context v.
    std::size_t j = i;
    std::uint64_t total = 0, types = 0;
    std::vector<std::pair<WordId, std::uint64_t>> cont;
    while (j < suffixes.size() && suffixes[j].v == suffixes[i].v) {
      std::size_t k = j;
      while (k < suffixes.size() && suffixes[k].v == suffixes[j].v &&
             suffixes[k].w == suffixes[j].w) {
        ++k;
      }
      cont.emplace_back(suffixes[j].w, k - j);
      total += k - j;
      ++types;
      ++left_types[suffixes[j].w];
      j = k;
    }
    const double t = static_cast<double>(total);
    BigramContext ctx{suffixes[i].v, D * static_cast<double>(types) / t,
                      m.bigram_entries_.size(), 0};
    for (const auto& [w, n] : cont) {
      m.bigram_entries_.push_back({w, (static_cast<double>(n) - D) / t});
    }
    ctx.end = m.bigram_entries_.size();
    m.bigram_ctx_.push_back(ctx);
    i = j;
  }

  // Lowest order: continuation counts interpolated with uniform over P.
  std::uint64_t total1 = 0, types1 = 0;
  for (WordId w = 0; w < m.words_.size(); ++w) {
    if (w == kBos || left_types[w] == 0) continue;
    total1 += left_types[w];
    ++types1;
  }
  const double t1 = static_cast<double>(total1);
  const double uniform = 1.0 / static_cast<double>(m.words_.size() - 1);
  const double gamma1 = D * static_cast<double>(types1) / t1;
  m.unigram_.assign(m.words_.size(), 0.0);
  for (WordId w = 0; w < m.words_.size(); ++w) {
    if (w == kBos) continue;
    const double disc =
        left_types[w] ? (static_cast<double>(left_types[w]) - D) / t1 : 0.0;
    m.unigram_[w] = disc + gamma1 * uniform;
  }

  m.build_index();
  return m;
}

void TrigramModel::build_index() {
  index_.clear();
  index_.reserve(words_.size());
  for (WordId i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  bigram_ctx_of_.assign(words_.size(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < bigram_ctx_.size(); ++i) {
    bigram_ctx_of_[bigram_ctx_[i].v] = static_cast<std::uint32_t>(i);
  }
}

// ------------------------------------------------------------------ query

WordId TrigramModel::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<WordId> TrigramModel::predictable_ids() const {
  std::vector<WordId> ids;
  for (WordId w = 0; w < words_.size(); ++w) {
    if (w != kBos) ids.push_back(w);
  }
  return ids;
}

const TrigramModel::Entry* TrigramModel::find_entry(const std::vector<Entry>& entries,
                                                    std::uint64_t begin, std::uint64_t end,
                                                    WordId w) {
  const auto first = entries.begin() + static_cast<std::ptrdiff_t>(begin);
  const auto last = entries.begin() + static_cast<std::ptrdiff_t>(end);
  auto it = std::lower_bound(first, last, w,
                             [](const Entry& e, WordId x) { return e.word < x; });
  return (it != last && it->word == w) ? &*it : nullptr;
}

double TrigramModel::bigram_prob(WordId v, WordId w) const {
  const double p1 = unigram_[w];
  if (v >= bigram_ctx_of_.size()) return p1;
  const auto slot = bigram_ctx_of_[v];
  if (slot == std::numeric_limits<std::uint32_t>::max()) return p1;
  const auto& ctx = bigram_ctx_[slot];
  const Entry* e = find_entry(bigram_entries_, ctx.begin, ctx.end, w);
  return (e ? e->alpha : 0.0) + ctx.gamma * p1;
}

double TrigramModel::prob(WordId u, WordId v, WordId w) const {
  if (w >= words_.size()) throw ContractError("word id out of range");
  const double p2 = bigram_prob(v, w);
  auto it = std::lower_bound(trigram_ctx_.begin(), trigram_ctx_.end(), std::make_pair(u, v),
                             [](const TrigramContext& c, const std::pair<WordId, WordId>& k) {
                               return std::tie(c.u, c.v) < std::tie(k.first, k.second);
                             });
  if (it == trigram_ctx_.end() || it->u != u || it->v != v) return p2;
  const Entry* e = find_entry(trigram_entries_, it->begin, it->end, w);
  return (e ? e->alpha : 0.0) + it->gamma * p2;
}

double TrigramModel::log_prob(WordId u, WordId v, WordId w) const {
  return std::log(prob(u, v, w));
}

double TrigramModel::score(LmState& state, WordId w) const {
  const double lp = log_prob(state.prev2, state.prev1, w);
  state.prev2 = state.prev1;
  state.prev1 = w;
  return lp;
}

double TrigramModel::sentence_logprob(std::span<const std::string> tokens) const {
  LmState st;
  double total = 0.0;
  for (const auto& t : tokens) total += score(st, id(t));
  total += score(st, kEos);
  return total;
}

std::vector<WordId> TrigramModel::bigram_contexts() const {
  std::vector<WordId> out;
  for (const auto& c : bigram_ctx_) out.push_back(c.v);
  return out;
}

std::vector<std::pair<WordId, WordId>> TrigramModel::trigram_contexts() const {
  std::vector<std::pair<WordId, WordId>> out;
  for (const auto& c : trigram_ctx_) out.emplace_back(c.u, c.v);
  return out;
}

// ----------------------------------------------------------------- binary

namespace {

constexpr char kMagic[4] = {'Q', 'R', 'L', 'M'};
constexpr char kTrailer[4] = {'M', 'L', 'R', 'Q'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kOrder = 3;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double d) { le(std::bit_cast<std::uint64_t>(d), 8); }
  std::string take() { return std::move(buf_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::size_t remaining() const { return data_.size() - pos_; }
  // Guards array allocations against corrupt lengths.
  void need_records(std::uint64_t count, std::size_t record_size) {
    if (count > remaining() / record_size) throw FormatError("language model file truncated");
  }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw FormatError("language model file truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])}
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string TrigramModel::to_binary() const {
  Writer w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u16(kOrder);
  w.f64(discount_);
  w.u64(words_.size());
  for (const auto& s : words_) {
    w.u32(static_cast<std::uint32_t>(s.size()));
    w.bytes(s.data(), s.size());
  }
  for (double p : unigram_) w.f64(p);
  w.u64(bigram_ctx_.size());
  for (const auto& c : bigram_ctx_) {
    w.u32(c.v);
    w.f64(c.gamma);
    w.u64(c.begin);
    w.u64(c.end);
  }
  w.u64(bigram_entries_.size());
  for (const auto& e : bigram_entries_) {
    w.u32(e.word);
    w.f64(e.alpha);
  }
  w.u64(trigram_ctx_.size());
  for (const auto& c : trigram_ctx_) {
    w.u32(c.u);
    w.u32(c.v);
    w.f64(c.gamma);
    w.u64(c.begin);
    w.u64(c.end);
  }
  w.u64(trigram_entries_.size());
  for (const auto& e : trigram_entries_) {
    w.u32(e.word);
    w.f64(e.alpha);
  }
  w.bytes(kTrailer, 4);
  return w.take();
}

TrigramModel TrigramModel::from_binary(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(r.bytes(4).data(), kMagic, 4) != 0) {
    throw FormatError("not a language model file (bad magic)");
  }
  const auto version = r.u16();
  if (version != kVersion) {
    throw FormatError("unsupported language model version " + std::to_string(version));
  }
  if (r.u16() != kOrder) throw FormatError("unsupported language model order");

  TrigramModel m;
  m.discount_ = r.f64();
  const auto V = r.u64();
  r.need_records(V, 4 + 8);
  if (V < 3) throw FormatError("language model vocabulary missing special tokens");
  m.words_.reserve(V);
  for (std::uint64_t i = 0; i < V; ++i) {
    const auto len = r.u32();
    m.words_.emplace_back(r.bytes(len));
  }
  m.unigram_.resize(V);
  for (auto& p : m.unigram_) p = r.f64();

  auto check_word = [&](WordId w) {
    if (w >= V) throw FormatError("word id out of range in language model file");
  };

  const auto nbc = r.u64();
  r.need_records(nbc, 4 + 8 + 8 + 8);
  m.bigram_ctx_.resize(nbc);
  for (auto& c : m.bigram_ctx_) {
    c.v = r.u32();
    check_word(c.v);
    c.gamma = r.f64();
    c.begin = r.u64();
    c.end = r.u64();
  }
  const auto nbe = r.u64();
  r.need_records(nbe, 4 + 8);
  m.bigram_entries_.resize(nbe);
  for (auto& e : m.bigram_entries_) {
    e.word = r.u32();
    check_word(e.word);
    e.alpha = r.f64();
  }
  const auto ntc = r.u64();
  r.need_records(ntc, 4 + 4 + 8 + 8 + 8);
  m.trigram_ctx_.resize(ntc);
  for (auto& c : m.trigram_ctx_) {
    c.u = r.u32();
    c.v = r.u32();
    check_word(c.u);
    check_word(c.v);
    c.gamma = r.f64();
    c.begin = r.u64();
    c.end = r.u64();
  }
  const auto nte = r.u64();
  r.need_records(nte, 4 + 8);
  m.trigram_entries_.resize(nte);
  for (auto& e : m.trigram_entries_) {
    e.word = r.u32();
    check_word(e.word);
    e.alpha = r.f64();
  }
  if (std::memcmp(r.bytes(4).data(), kTrailer, 4) != 0 || r.remaining() != 0) {
    throw FormatError("language model file has a corrupt trailer");
  }
  for (const auto& c : m.bigram_ctx_) {
    if (c.begin > c.end || c.end > nbe) throw FormatError("bigram context range out of bounds");
  }
  for (const auto& c : m.trigram_ctx_) {
    if (c.begin > c.end || c.end > nte) throw FormatError("trigram context range out of bounds");
  }
  m.build_index();
  return m;
}

void TrigramModel::save_binary(const std::filesystem::path& path) const {
  const std::string bytes = to_binary();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write language model: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

TrigramModel TrigramModel::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read language model: " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::string bytes(size, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read failed: " + path.string());
  return from_binary(bytes);
}

void TrigramModel::dump_text(std::ostream& out) const {
  std::vector<std::pair<std::string, double>> lines;
  for (WordId w : predictable_ids()) lines.emplace_back(words_[w], std::log(unigram_[w]));
  for (const auto& c : bigram_ctx_) {
    for (auto i = c.begin; i < c.end; ++i) {
      const WordId w = bigram_entries_[i].word;
      lines.emplace_back(words_[c.v] + ' ' + words_[w], std::log(bigram_prob(c.v, w)));
    }
  }
  for (const auto& c : trigram_ctx_) {
    for (auto i = c.begin; i < c.end; ++i) {
      const WordId w = trigram_entries_[i].word;
      lines.emplace_back(words_[c.u] + ' ' + words_[c.v] + ' ' + words_[w],
                         log_prob(c.u, c.v, w));
    }
  }
  std::sort(lines.begin(), lines.end());
  char buf[64];
  for (const auto& [ngram, lp] : lines) {
    std::snprintf(buf, sizeof buf, "%.9g", lp);
    out << buf << '\t' << ngram << '\n';
  }
}

}  // namespace qrw::lm
