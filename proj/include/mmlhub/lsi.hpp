#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mmlhub/annotation.hpp"

namespace mmlhub {

/// Lowercased word tokens of a formal statement with connectives, proof
/// keywords and pure integers removed.
std::vector<std::string> tokenize(std::string_view statement_text);

/// Term-document weights. Columns follow `docs`; each column has unit L2
/// norm unless the document produced no terms.
struct TermDocMatrix {
  std::vector<std::string> terms;  // sorted
  std::vector<std::string> docs;   // anchors, sorted
  Eigen::VectorXd idf;
  Eigen::SparseMatrix<double> weights;  // terms x docs

  std::optional<std::size_t> term_index(std::string_view term) const;
};

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
double smoothed_idf(std::size_t doc_count, std::size_t doc_frequency);

/// (1 + ln tf) * idf weights, column-normalized. Documents are ordered by
/// anchor. Throws EmptyCorpus or InvalidArgument on duplicate anchors.
TermDocMatrix build_tfidf(const std::vector<std::pair<std::string, std::string>>& docs);

/// Truncated SVD factors: W ~ U * diag(S) * V^T.
struct LsiModel {
  std::size_t k = 0;
  Eigen::MatrixXd U;  // terms x k
  Eigen::VectorXd S;  // k, non-increasing, positive
  Eigen::MatrixXd V;  // docs x k
};

struct SvdOptions {
  double tolerance = 1e-10;
  /// Lanczos step cap; 0 means 10 * min(#terms, #docs).
  std::size_t max_iterations = 0;
};

/// Top-k singular triplets from a Lanczos eigensolver on the smaller Gram
/// matrix (W^T W or W W^T) with full reorthogonalization. Krylov breakdowns
/// deflate: the solver restarts from a fresh vector orthogonal to the basis
/// found so far. Singular values below the numerical rank are dropped, so
/// the returned k may be smaller than requested. Each U column is signed so
/// that its largest-magnitude entry is positive.
/// Throws RankTooLarge or ConvergenceFailure.
LsiModel truncated_svd(const TermDocMatrix& m, std::size_t k, const SvdOptions& options = {});

/// min(150, min(#terms, #docs) - 1), at least 1.
std::size_t default_rank(const TermDocMatrix& m);

struct ScoredDoc {
  std::string anchor;
  double score = 0.0;
};

/// Normalized tf-idf vector for free text, using the corpus idf.
Eigen::VectorXd query_vector(const TermDocMatrix& m, std::string_view query_text);

/// diag(S)^-1 * U^T * q.
Eigen::VectorXd fold_in(const LsiModel& model, const Eigen::VectorXd& q);

/// Cosine in concept space, best first, ties by anchor; zero queries give [].
std::vector<ScoredDoc> rank_vector(const LsiModel& model, const TermDocMatrix& m, const Eigen::VectorXd& q,
                                   std::size_t limit);
std::vector<ScoredDoc> rank(const LsiModel& model, const TermDocMatrix& m, std::string_view query_text,
                            std::size_t limit);

/// Binary model file, little-endian:
///   "LSI1", u64 k, u64 #terms, u64 #docs,
///   terms as (u32 length, UTF-8 bytes), idf f64[#terms], S f64[k],
///   U f64[#terms * k] row-major, V f64[#docs * k] row-major,
///   docs as (u32 length, bytes), corpus hash as (u32 length, bytes).
/// The matrix weights are not stored; a loaded matrix only supports ranking.
void save_model(const std::filesystem::path& path, const TermDocMatrix& m, const LsiModel& model,
                std::string_view corpus_hash);

struct StoredModel {
  TermDocMatrix matrix;
  LsiModel model;
  std::string corpus_hash;
};

StoredModel load_model(const std::filesystem::path& path);

struct FeedbackRecord {
  std::string query_text;
  std::string anchor;
  std::string vote = "good";
  std::string user;
  std::string timestamp;
};

/// Append-only log of "good" votes, optionally mirrored to a JSON-lines file.
class FeedbackLog {
 public:
  FeedbackLog() = default;
  explicit FeedbackLog(std::filesystem::path file);

  FeedbackRecord append(FeedbackRecord record);
  std::vector<FeedbackRecord> records() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> file_;
  std::vector<FeedbackRecord> records_;
};

/// Throws UserBlocked.
FeedbackRecord record_feedback(FeedbackLog& log, std::string query_text, std::string anchor, const Actor& user);

}  // namespace mmlhub
