#include "mmlhub/lsi.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/io.hpp"

namespace mmlhub {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "for",  "holds", "being", "be",   "is",     "st",   "ex",   "not",     "and",
      "or",   "implies", "iff", "of",   "the",    "it",   "let",  "assume",  "then",
      "thus", "hence", "proof", "end",  "theorem", "definition"};
  return words;
}

bool is_term_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_term_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && is_term_char(text[i])) ++i;
    std::string tok(text.substr(start, i - start));
    for (auto& c : tok)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    if (stopwords().count(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

std::optional<std::size_t> TermDocMatrix::term_index(std::string_view term) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

double smoothed_idf(std::size_t doc_count, std::size_t doc_frequency) {
  return std::log((1.0 + static_cast<double>(doc_count)) / (1.0 + static_cast<double>(doc_frequency))) + 1.0;
}

TermDocMatrix build_tfidf(const std::vector<std::pair<std::string, std::string>>& docs) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents to index");
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return docs[a].first < docs[b].first; });

  TermDocMatrix m;
  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  for (auto i : order) {
    if (!m.docs.empty() && m.docs.back() == docs[i].first)
      throw Error(ErrorCode::InvalidArgument, "duplicate document anchor " + docs[i].first);
    m.docs.push_back(docs[i].first);
    auto& tf = counts.emplace_back();
    for (auto& tok : tokenize(docs[i].second)) ++tf[std::move(tok)];
    for (const auto& [term, n] : tf) ++df[term];
  }

  const std::size_t n_docs = m.docs.size();
  m.terms.reserve(df.size());
  m.idf.resize(static_cast<Eigen::Index>(df.size()));
  for (const auto& [term, f] : df) {
    m.idf[static_cast<Eigen::Index>(m.terms.size())] = smoothed_idf(n_docs, f);
    m.terms.push_back(term);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::vector<std::pair<std::size_t, double>> column;
    double norm2 = 0.0;
    for (const auto& [term, tf] : counts[d]) {
      auto t = *m.term_index(term);
      double w = (1.0 + std::log(static_cast<double>(tf))) * m.idf[static_cast<Eigen::Index>(t)];
      column.emplace_back(t, w);
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [t, w] : column)
      triplets.emplace_back(static_cast<int>(t), static_cast<int>(d), w / norm);
  }
  m.weights.resize(static_cast<Eigen::Index>(m.terms.size()), static_cast<Eigen::Index>(n_docs));
  m.weights.setFromTriplets(triplets.begin(), triplets.end());
  m.weights.makeCompressed();
  return m;
}

std::size_t default_rank(const TermDocMatrix& m) {
  std::size_t smaller = std::min(m.terms.size(), m.docs.size());
  return std::max<std::size_t>(1, std::min<std::size_t>(150, smaller > 0 ? smaller - 1 : 0));
}

namespace {

/// Deterministic vector with entries uniform in [-1, 1).
VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

/// Ritz values (descending) of the symmetric tridiagonal matrix [alpha, beta].
VectorXd ritz_values(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  VectorXd diag = Eigen::Map<const VectorXd>(alpha.data(), m);
  VectorXd sub = m > 1 ? VectorXd(Eigen::Map<const VectorXd>(beta.data(), m - 1)) : VectorXd(0);
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

struct TridiagonalEigen {
  VectorXd values;   // descending
  MatrixXd vectors;  // columns match values
};

TridiagonalEigen tridiagonal_eigen(const std::vector<double>& alpha, const std::vector<double>& beta,
                                   std::size_t from, std::size_t to) {
  const auto m = static_cast<Eigen::Index>(to - from);
  VectorXd diag(m), sub(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i < m; ++i) diag[i] = alpha[from + static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < m; ++i) sub[i] = beta[from + static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

void orthonormalize_columns(MatrixXd& a) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) a.col(j) -= a.col(i).dot(a.col(j)) * a.col(i);
      a.col(j).normalize();
    }
}

}  // namespace

LsiModel truncated_svd(const TermDocMatrix& m, std::size_t k, const SvdOptions& options) {
  const std::size_t n_terms = m.terms.size(), n_docs = m.docs.size();
  const std::size_t n = std::min(n_terms, n_docs);
  if (k == 0 || k > n)
    throw Error(ErrorCode::RankTooLarge,
                "rank " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  const std::size_t cap = options.max_iterations ? options.max_iterations : 10 * n;
  const double tol = options.tolerance;

  // Operate on the smaller Gram matrix.
  const bool doc_side = n_docs <= n_terms;
  const auto& w = m.weights;
  auto gram = [&](const VectorXd& x) -> VectorXd {
    if (doc_side) return w.transpose() * (w * x);
    return w * (w.transpose() * x);
  };

  const auto dim = static_cast<Eigen::Index>(n);
  std::mt19937_64 rng(0x4c5349u);
  MatrixXd basis(dim, std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(2 * k + 16)));
  std::vector<double> alpha, beta;  // beta[j] couples basis j and j+1; 0 at restarts
  std::size_t block_start = 0;
  VectorXd prev_top;
  double scale = 0.0;

  VectorXd q = random_vector(rng, dim).normalized();
  std::size_t steps = 0;
  while (true) {
    if (steps == cap)
      throw Error(ErrorCode::ConvergenceFailure, "Lanczos did not converge in " + std::to_string(cap) + " steps");
    const auto j = static_cast<Eigen::Index>(alpha.size());
    if (j == basis.cols()) basis.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(dim, 2 * j));
    basis.col(j) = q;
    VectorXd r = gram(q);
    alpha.push_back(q.dot(r));
    for (int pass = 0; pass < 2; ++pass) {
      auto qj = basis.leftCols(j + 1);
      r -= qj * (qj.transpose() * r);
    }
    const double b = r.norm();
    ++steps;
    const std::size_t size = alpha.size();

    VectorXd values = ritz_values(alpha, beta);
    scale = std::max(scale, std::abs(values[0]));
    const bool exhausted = size == n;
    bool converged = exhausted;
    if (!converged && size >= k) {
      VectorXd top = values.head(static_cast<Eigen::Index>(k));
      if (prev_top.size() == top.size()) {
        const double floor = 1e-12 * scale;
        bool stable = true;
        for (Eigen::Index i = 0; i < top.size() && stable; ++i)
          stable = std::abs(top[i] - prev_top[i]) <= tol * std::max(std::abs(top[i]), floor);
        if (stable) {
          // Residual of a Ritz pair is |b * last component of its eigenvector|.
          // Earlier restart blocks are exactly invariant, so only the newest
          // block carries residuals; its top pair must also have settled so
          // no larger eigenvalue can hide in the unexplored complement.
          auto blk = tridiagonal_eigen(alpha, beta, block_start, size);
          const Eigen::Index last = blk.vectors.rows() - 1;
          const double kth = top[top.size() - 1];
          converged = true;
          for (Eigen::Index i = 0; i < blk.values.size() && converged; ++i) {
            if (i > 0 && blk.values[i] < kth) break;
            converged = std::abs(b * blk.vectors(last, i)) <= tol * scale;
          }
        }
      }
      prev_top = top;
    }
    if (converged) break;

    if (b <= 1e-12 * std::max(scale, 1e-300)) {
      // Invariant subspace reached: deflate by restarting orthogonally.
      VectorXd fresh = random_vector(rng, dim);
      for (int pass = 0; pass < 2; ++pass) {
        auto qj = basis.leftCols(j + 1);
        fresh -= qj * (qj.transpose() * fresh);
      }
      if (fresh.norm() <= 1e-10) break;
      beta.push_back(0.0);
      block_start = size;
      prev_top.resize(0);
      q = fresh.normalized();
    } else {
      beta.push_back(b);
      q = r / b;
    }
  }

  const std::size_t size = alpha.size();
  auto full = tridiagonal_eigen(alpha, beta, 0, size);
  const double lambda_max = std::max(full.values[0], 0.0);
  std::size_t rank = 0;
  while (rank < std::min(k, size) && full.values[static_cast<Eigen::Index>(rank)] > 1e-12 * lambda_max) ++rank;
  if (rank == 0) throw Error(ErrorCode::RankTooLarge, "matrix has no positive singular value");

  const auto kr = static_cast<Eigen::Index>(rank);
  LsiModel model;
  model.k = rank;
  model.S = full.values.head(kr).cwiseSqrt();
  MatrixXd ritz = basis.leftCols(static_cast<Eigen::Index>(size)) * full.vectors.leftCols(kr);
  orthonormalize_columns(ritz);
  const VectorXd inv_s = model.S.cwiseInverse();
  if (doc_side) {
    model.V = std::move(ritz);
    model.U = (w * model.V) * inv_s.asDiagonal();
    orthonormalize_columns(model.U);
  } else {
    model.U = std::move(ritz);
    model.V = (w.transpose() * model.U) * inv_s.asDiagonal();
    orthonormalize_columns(model.V);
  }

  for (Eigen::Index c = 0; c < kr; ++c) {
    Eigen::Index pivot = 0;
    model.U.col(c).cwiseAbs().maxCoeff(&pivot);
    if (model.U(pivot, c) < 0) {
      model.U.col(c) *= -1.0;
      model.V.col(c) *= -1.0;
    }
  }
  return model;
}

VectorXd query_vector(const TermDocMatrix& m, std::string_view query_text) {
  VectorXd q = VectorXd::Zero(static_cast<Eigen::Index>(m.terms.size()));
  std::map<std::size_t, std::size_t> tf;
  for (const auto& tok : tokenize(query_text))
    if (auto t = m.term_index(tok)) ++tf[*t];
  for (const auto& [t, n] : tf) {
    const auto i = static_cast<Eigen::Index>(t);
    q[i] = (1.0 + std::log(static_cast<double>(n))) * m.idf[i];
  }
  const double norm = q.norm();
  if (norm > 0) q /= norm;
  return q;
}

VectorXd fold_in(const LsiModel& model, const VectorXd& q) {
  return model.S.cwiseInverse().asDiagonal() * (model.U.transpose() * q);
}

std::vector<ScoredDoc> rank_vector(const LsiModel& model, const TermDocMatrix& m, const VectorXd& q,
                                   std::size_t limit) {
  if (model.k == 0 || q.size() != model.U.rows() || q.norm() == 0.0) return {};
  const VectorXd folded = fold_in(model, q);
  const double qn = folded.norm();
  if (qn == 0.0) return {};
  std::vector<ScoredDoc> out;
  for (Eigen::Index d = 0; d < model.V.rows(); ++d) {
    const double dn = model.V.row(d).norm();
    if (dn == 0.0) continue;
    // Quantized so mathematically equal cosines tie exactly and fall back to anchor order.
    const double cosine = model.V.row(d).dot(folded) / (qn * dn);
    out.push_back({m.docs[static_cast<std::size_t>(d)], std::round(cosine * 1e12) / 1e12});
  }
  std::sort(out.begin(), out.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.anchor < b.anchor;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::vector<ScoredDoc> rank(const LsiModel& model, const TermDocMatrix& m, std::string_view query_text,
                            std::size_t limit) {
  return rank_vector(model, m, query_vector(m, query_text), limit);
}

namespace {

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    value = to_little(value);
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.append(p, sizeof(T));
  }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }
  std::string get_string() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::CorruptData, "truncated model file");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const fs::path& path, const TermDocMatrix& m, const LsiModel& model, std::string_view corpus_hash) {
  Writer out;
  out.raw("LSI1");
  out.put<std::uint64_t>(model.k);
  out.put<std::uint64_t>(m.terms.size());
  out.put<std::uint64_t>(m.docs.size());
  for (const auto& t : m.terms) out.put_string(t);
  for (Eigen::Index i = 0; i < m.idf.size(); ++i) out.put<double>(m.idf[i]);
  for (Eigen::Index i = 0; i < model.S.size(); ++i) out.put<double>(model.S[i]);
  for (Eigen::Index r = 0; r < model.U.rows(); ++r)
    for (Eigen::Index c = 0; c < model.U.cols(); ++c) out.put<double>(model.U(r, c));
  for (Eigen::Index r = 0; r < model.V.rows(); ++r)
    for (Eigen::Index c = 0; c < model.V.cols(); ++c) out.put<double>(model.V(r, c));
  for (const auto& d : m.docs) out.put_string(d);
  out.put_string(corpus_hash);
  write_file_atomic(path, out.bytes());
}

StoredModel load_model(const fs::path& path) {
  Reader in(read_file(path));
  if (in.raw(4) != "LSI1") throw Error(ErrorCode::CorruptData, "bad model magic in " + path.string());
  StoredModel s;
  const auto k = in.get<std::uint64_t>();
  const auto n_terms = in.get<std::uint64_t>();
  const auto n_docs = in.get<std::uint64_t>();
  const auto ki = static_cast<Eigen::Index>(k);
  s.model.k = k;
  s.matrix.terms.reserve(n_terms);
  for (std::uint64_t i = 0; i < n_terms; ++i) s.matrix.terms.push_back(in.get_string());
  s.matrix.idf.resize(static_cast<Eigen::Index>(n_terms));
  for (Eigen::Index i = 0; i < s.matrix.idf.size(); ++i) s.matrix.idf[i] = in.get<double>();
  s.model.S.resize(ki);
  for (Eigen::Index i = 0; i < ki; ++i) s.model.S[i] = in.get<double>();
  s.model.U.resize(static_cast<Eigen::Index>(n_terms), ki);
  for (Eigen::Index r = 0; r < s.model.U.rows(); ++r)
    for (Eigen::Index c = 0; c < ki; ++c) s.model.U(r, c) = in.get<double>();
  s.model.V.resize(static_cast<Eigen::Index>(n_docs), ki);
  for (Eigen::Index r = 0; r < s.model.V.rows(); ++r)
    for (Eigen::Index c = 0; c < ki; ++c) s.model.V(r, c) = in.get<double>();
  for (std::uint64_t i = 0; i < n_docs; ++i) s.matrix.docs.push_back(in.get_string());
  s.corpus_hash = in.get_string();
  if (!in.at_end()) throw Error(ErrorCode::CorruptData, "trailing bytes in " + path.string());
  return s;
}

namespace {
std::string feedback_json(const FeedbackRecord& r) {
  nlohmann::ordered_json j;
  j["query"] = r.query_text;
  j["anchor"] = r.anchor;
  j["vote"] = r.vote;
  j["user"] = r.user;
  j["timestamp"] = r.timestamp;
  return j.dump();
}
}  // namespace

FeedbackLog::FeedbackLog(fs::path file) : file_(std::move(file)) {
  std::ifstream in(*file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      records_.push_back({j.at("query").get<std::string>(), j.at("anchor").get<std::string>(),
                          j.at("vote").get<std::string>(), j.at("user").get<std::string>(),
                          j.at("timestamp").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptData, std::string("bad feedback record: ") + e.what());
    }
  }
}

FeedbackRecord FeedbackLog::append(FeedbackRecord record) {
  std::lock_guard lock(mutex_);
  if (record.timestamp.empty()) record.timestamp = utc_timestamp();
  if (file_) append_line(*file_, feedback_json(record));
  records_.push_back(record);
  return record;
}

std::vector<FeedbackRecord> FeedbackLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t FeedbackLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

FeedbackRecord record_feedback(FeedbackLog& log, std::string query_text, std::string anchor, const Actor& user) {
  if (user.blocked) throw Error(ErrorCode::UserBlocked, "user " + user.id + " is blocked");
  return log.append({std::move(query_text), std::move(anchor), "good", user.id, {}});
}

}  // namespace mmlhub
