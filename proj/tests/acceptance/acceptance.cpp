// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mmlhub/annotation.hpp"
#include "mmlhub/article.hpp"
#include "mmlhub/cli.hpp"
#include "mmlhub/error.hpp"
#include "mmlhub/graph.hpp"
#include "mmlhub/http_api.hpp"
#include "mmlhub/io.hpp"
#include "mmlhub/lsi.hpp"
#include "mmlhub/merge.hpp"
#include "mmlhub/name_index.hpp"
#include "mmlhub/platform.hpp"
#include "mmlhub/queries.hpp"
#include "mmlhub/text.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

// after Eigen: <resolv.h> defines a `_res` macro
#include <httplib.h>

using namespace mmlhub;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Lines = std::vector<std::string>;

namespace {

// Pinned tolerances and sizes.
constexpr int kReductionDags = 200;
constexpr std::size_t kMaxDagNodes = 50;
constexpr double kMinDensity = 0.1, kMaxDensity = 0.5;
constexpr double kReductionBudgetSeconds = 5.0;
constexpr int kLayeringDags = 50;
constexpr int kSvdMatrices = 50;
constexpr std::size_t kMaxSvdDim = 10;
constexpr double kSvdTolerance = 1e-8;
constexpr int kPlacements = 100;
constexpr int kGeneratedArticles = 100;
constexpr double kSuiteBudgetSeconds = 60.0;
constexpr std::size_t kStressEntries = 10000;
constexpr double kNameQueryBudgetMs = 5.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Accumulates failures; the first few messages are kept for the report.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_++ < 5) messages_ << (messages_.tellp() > 0 ? "; " : "") << what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed: " + messages_.str()};
  }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::ostringstream messages_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.setf(std::ios::scientific);
  s.precision(2);
  s << v;
  return s.str();
}

DepGraph graph_of(const oracle::RandomDag& dag) {
  DepGraph g;
  g.nodes = dag.nodes;
  g.edges = dag.edges;
  return g;
}

std::vector<oracle::RandomDag> random_dags(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(1, kMaxDagNodes);
  std::uniform_real_distribution<double> density(kMinDensity, kMaxDensity);
  std::vector<oracle::RandomDag> out;
  for (int i = 0; i < count; ++i) {
    const double d = density(rng);
    out.push_back(oracle::random_dag(rng, size(rng), d));
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome reduction_oracle() {
  Checker c;
  auto dags = random_dags(0xACCE55, kReductionDags);
  std::vector<DepGraph> results;
  const auto start = Clock::now();
  for (const auto& dag : dags) results.push_back(transitive_reduction(graph_of(dag)));
  const double elapsed = seconds_since(start);
  for (std::size_t i = 0; i < dags.size(); ++i)
    c.expect(results[i].edges == oracle::transitive_reduction(dags[i].nodes, dags[i].edges),
             "dag " + std::to_string(i) + " differs from delete-and-check");
  c.expect(elapsed < kReductionBudgetSeconds, "runtime " + fixed(elapsed) + " s");
  return c.outcome(std::to_string(kReductionDags) + " DAGs, reduction time " + fixed(elapsed) + " s");
}

Outcome reachability_and_minimality() {
  Checker c;
  auto dags = random_dags(0xACCE55, kReductionDags);
  for (std::size_t i = 0; i < dags.size(); ++i) {
    const auto& dag = dags[i];
    auto r = transitive_reduction(graph_of(dag));
    c.expect(r.nodes == dag.nodes, "node set changed on dag " + std::to_string(i));
    c.expect(oracle::closure(dag.nodes, r.edges) == oracle::closure(dag.nodes, dag.edges),
             "reachability changed on dag " + std::to_string(i));
    for (const auto& e : r.edges) {
      c.expect(dag.edges.count(e) == 1, "invented edge on dag " + std::to_string(i));
      auto without = r.edges;
      without.erase(e);
      c.expect(!oracle::reachable(dag.nodes, without, e.first, e.second),
               "redundant edge " + e.first + "->" + e.second + " on dag " + std::to_string(i));
    }
  }
  return c.outcome(std::to_string(kReductionDags) + " DAGs");
}

Outcome layering_oracle() {
  Checker c;
  auto dags = random_dags(0x1A7E45, kLayeringDags);
  for (std::size_t i = 0; i < dags.size(); ++i) {
    auto layered = assign_layers(graph_of(dags[i]));
    c.expect(layered.layers == oracle::longest_path_to_sink(dags[i].nodes, dags[i].edges),
             "layers differ on dag " + std::to_string(i));
  }
  return c.outcome(std::to_string(kLayeringDags) + " DAGs");
}

TermDocMatrix from_dense(const oracle::Dense& a) {
  TermDocMatrix m;
  const std::size_t rows = a.size(), cols = a[0].size();
  for (std::size_t i = 0; i < rows; ++i) m.terms.push_back("t" + std::to_string(100 + i));
  for (std::size_t j = 0; j < cols; ++j) m.docs.push_back("D:theorem:" + std::to_string(100 + j));
  m.idf = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows));
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (a[i][j] != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), a[i][j]);
  m.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.weights.setFromTriplets(trips.begin(), trips.end());
  return m;
}

/// max |Q^T Q - I| computed entry by entry.
double orthonormality_error(const Eigen::MatrixXd& q) {
  double worst = 0;
  for (Eigen::Index i = 0; i < q.cols(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      double dot = 0;
      for (Eigen::Index r = 0; r < q.rows(); ++r) dot += q(r, i) * q(r, j);
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

/// Frobenius norm of A - U S V^T, accumulated over the dense input.
double reconstruction_error(const oracle::Dense& a, const LsiModel& model) {
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      double approx = 0;
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(model.k); ++c)
        approx += model.U(static_cast<Eigen::Index>(i), c) * model.S[c] * model.V(static_cast<Eigen::Index>(j), c);
      sum += (a[i][j] - approx) * (a[i][j] - approx);
    }
  return std::sqrt(sum);
}

Outcome svd_oracle() {
  Checker c;
  std::mt19937_64 rng(0x5FD);
  std::uniform_int_distribution<std::size_t> dim(1, kMaxSvdDim);
  std::uniform_real_distribution<double> density(0.1, 0.6), value(0.05, 1.0);
  double worst_value = 0, worst_ortho = 0;
  std::size_t clamped = 0;
  for (int round = 0; round < kSvdMatrices; ++round) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    std::bernoulli_distribution keep(density(rng));
    oracle::Dense a(rows, std::vector<double>(cols, 0.0));
    for (auto& row : a)
      for (auto& x : row)
        if (keep(rng)) x = value(rng);
    a[0][0] = 1.0;
    const auto m = from_dense(a);
    const auto sv = oracle::jacobi_singular_values(a);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= std::min(rows, cols); ++k) {
      const std::string where = "matrix " + std::to_string(round) + " k=" + std::to_string(k);
      auto model = truncated_svd(m, k);
      c.expect(model.k <= k, where + ": rank above request");
      if (model.k < k) {
        ++clamped;
        // only numerically null directions may be dropped
        for (std::size_t i = model.k; i < k; ++i) c.expect(sv[i] <= 1e-6 * sv[0], where + ": dropped a live direction");
      }
      for (std::size_t i = 0; i < model.k; ++i) {
        const double diff = std::abs(model.S[static_cast<Eigen::Index>(i)] - sv[i]);
        worst_value = std::max(worst_value, diff);
        c.expect(diff <= kSvdTolerance, where + ": singular value " + std::to_string(i) + " off by " + sci(diff));
      }
      const double ou = orthonormality_error(model.U), ov = orthonormality_error(model.V);
      worst_ortho = std::max({worst_ortho, ou, ov});
      c.expect(ou <= kSvdTolerance && ov <= kSvdTolerance, where + ": orthonormality");
      const double err = reconstruction_error(a, model);
      c.expect(err <= previous + 1e-12, where + ": reconstruction error increased");
      previous = err;
    }
  }
  return c.outcome(std::to_string(kSvdMatrices) + " matrices, max |S-S*| " + sci(worst_value) +
                   ", max orthonormality error " + sci(worst_ortho) + ", rank clamped " +
                   std::to_string(clamped) + " times");
}

Outcome retrieval_separation() {
  Checker c;
  const std::vector<std::pair<std::string, std::string>> docs{
      {"G:theorem:1", "group homomorphism kernel"},
      {"G:theorem:2", "group homomorphism image subgroup"},
      {"G:theorem:3", "group kernel normal subgroup"},
      {"G:theorem:4", "group homomorphism composition"},
      {"G:theorem:5", "group subgroup homomorphism identity"},
      {"T:theorem:1", "topological space open set"},
      {"T:theorem:2", "topological space closed set"},
      {"T:theorem:3", "topological space continuous map"},
      {"T:theorem:4", "open set closed complement space"},
      {"T:theorem:5", "topological space compact subset"}};
  const auto m = build_tfidf(docs);
  const auto model = truncated_svd(m, 2);  // one latent direction per cluster
  std::vector<std::pair<std::string, char>> queries{
      {"group", 'G'}, {"homomorphism", 'G'}, {"group homomorphism", 'G'}, {"subgroup", 'G'},
      {"topological", 'T'}, {"space", 'T'}, {"topological space", 'T'}, {"open set", 'T'}};
  for (const auto& [anchor, text] : docs) queries.emplace_back(text, anchor[0]);
  for (const auto& [q, cluster] : queries) {
    auto ranked = rank(model, m, q, docs.size());
    c.expect(ranked.size() == docs.size(), "query '" + q + "' ranked " + std::to_string(ranked.size()) + " docs");
    for (std::size_t i = 0; i < ranked.size(); ++i)
      c.expect((ranked[i].anchor[0] == cluster) == (i < 5), "query '" + q + "' position " + std::to_string(i) + " is " +
                                                               ranked[i].anchor);
  }
  return c.outcome(std::to_string(queries.size()) + " within-cluster queries at k=2");
}

Outcome merge_suite() {
  Checker c;
  const Lines base{"a", "b", "c"};
  auto disjoint = diff3_merge(base, Lines{"a", "x", "b", "c"}, Lines{"a", "b", "c", "d"});
  c.expect(disjoint.clean && disjoint.merged_lines == Lines{"a", "x", "b", "c", "d"}, "disjoint edits");
  auto divergent = diff3_merge(base, Lines{"a", "B1", "c"}, Lines{"a", "B2", "c"});
  c.expect(!divergent.clean && divergent.conflicts.size() == 1 && divergent.conflicts[0].base == LineRange{1, 2},
           "overlapping divergent edits");
  auto identity = diff3_merge(base, base, base);
  c.expect(identity.clean && identity.merged_lines == base, "identity");

  std::mt19937_64 rng(0xE3BED);
  int placements = 0;
  while (placements < kPlacements) {
    auto g = oracle::random_article(rng);
    auto a = parse_article(ArticleName::parse("GEN"), g.source);
    if (a.items.empty()) continue;
    std::map<std::string, std::string> comments;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, a.items.size())(rng);
    std::vector<std::size_t> order(a.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) comments[a.items[order[i]].anchor] = "remark " + std::to_string(i) + "\n$x$";
    auto embedded = embed_comments(a, comments);
    c.expect(strip_comments(embedded.lines) == a.lines, "strip(embed) != pristine on placement " + std::to_string(placements));
    Lines by_scan;  // independent strip: drop every line carrying the marker
    for (const auto& l : embedded.lines)
      if (l.rfind("::@", 0) != 0) by_scan.push_back(l);
    c.expect(by_scan == a.lines, "line-scan strip disagrees on placement " + std::to_string(placements));
    ++placements;
  }

  testing::TempDir tmp;
  PlatformConfig config;
  config.data_dir = tmp / "data";
  Platform p(config);
  p.ingest_corpus(testing::fixture("corpus_v1"), "v1");
  const Actor editor{"acceptance", false};
  for (const char* anchor : {"XBOOLE_1:theorem:2", "XBOOLE_1:theorem:1", "NAT_1:theorem:4", "NAT_1:theorem:2",
                             "TARSKI:theorem:1"})
    p.save_comment(anchor, std::string("note on ") + anchor, editor);
  auto del = p.preview_rebase(testing::fixture("corpus_v1"), testing::fixture("corpus_del"));
  c.expect(del.conflict_count == 1, "delete fixture gave " + std::to_string(del.conflict_count) + " conflicts");
  auto add = p.preview_rebase(testing::fixture("corpus_v1"), testing::fixture("corpus_add"));
  c.expect(add.conflict_count == 0, "add fixture gave " + std::to_string(add.conflict_count) + " conflicts");
  auto applied = p.update_corpus(testing::fixture("corpus_add"), "v1-add");
  c.expect(applied.conflict_count == 0 && applied.comments_after == applied.comments_before,
           "applied add update lost comments");
  c.expect(p.comments().latest_live("NAT_1:theorem:5").has_value(), "shifted comment not re-anchored");

  return c.outcome("3 diff3 classes, " + std::to_string(placements) + " placements, delete fixture " +
                   std::to_string(del.conflict_count) + " conflict, add fixture " + std::to_string(add.conflict_count));
}

Outcome parser_round_trip() {
  Checker c;
  std::size_t files = 0;
  for (const char* corpus : {"corpus_v1", "corpus_add", "corpus_del", "corpus_cyclic", "tiny3"}) {
    for (const auto& entry : fs::directory_iterator(testing::fixture(corpus))) {
      if (entry.path().extension() != ".miz") continue;
      const auto source = read_file(entry.path());
      auto stem = entry.path().stem().string();
      std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char ch) { return std::toupper(ch); });
      auto a = parse_article(ArticleName::parse(stem), source);
      c.expect(join_lines(a.lines) == source, std::string(corpus) + "/" + stem + " not byte-exact");
      c.expect(a.items.size() == oracle::count_items(source), std::string(corpus) + "/" + stem + " item count");
      ++files;
    }
  }
  std::mt19937_64 rng(0x9A25E);
  for (int i = 0; i < kGeneratedArticles; ++i) {
    auto g = oracle::random_article(rng);
    auto a = parse_article(ArticleName::parse("GEN"), g.source);
    c.expect(join_lines(a.lines) == g.source, "generated " + std::to_string(i) + " not byte-exact");
    c.expect(a.items.size() == oracle::count_items(g.source), "generated " + std::to_string(i) + " item count");
  }
  return c.outcome(std::to_string(files) + " fixture files, " + std::to_string(kGeneratedArticles) + " generated");
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(const fs::path& data, std::vector<std::string> args) {
  args.insert(args.begin(), {"--data", data.string()});
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str()};
}

Outcome end_to_end(Clock::time_point suite_start) {
  Checker c;
  testing::TempDir tmp;
  const auto data = tmp / "data";
  const auto v1 = testing::fixture("corpus_v1").string();

  // every command once
  c.expect(cli(data, {"ingest", v1, "--label", "v1"}).code == kExitOk, "ingest");
  c.expect(cli(data, {"users", "add", "root", "--token", "root-token", "--role", "admin"}).code == kExitOk, "users add");
  c.expect(cli(data, {"users", "add", "ed", "--token", "ed-token"}).code == kExitOk, "users add editor");
  c.expect(cli(data, {"users", "block", "ed"}).code == kExitOk, "users block");
  c.expect(cli(data, {"users", "block", "ed", "--unblock"}).code == kExitOk, "users unblock");
  c.expect(cli(data, {"status"}).code == kExitOk, "status");
  c.expect(cli(data, {"graph", "layers"}).code == kExitOk, "graph layers");
  c.expect(cli(data, {"graph", "neighborhood", "RELAT_1", "--radius", "2"}).code == kExitOk, "graph neighborhood");
  c.expect(cli(data, {"comments", "rebase", v1, testing::fixture("corpus_add").string()}).code == kExitOk,
           "comments rebase");
  c.expect(cli(data, {"update", v1, "--label", "v1b"}).code == kExitOk, "update");
  {
    PlatformConfig pc;
    pc.data_dir = data;
    Platform p(pc);
    p.save_comment("XBOOLE_1:theorem:2", "to be deleted", {"ed", false});
  }
  c.expect(cli(data, {"update", testing::fixture("corpus_del").string(), "--label", "v2"}).code == kExitOk,
           "update with conflict");
  {
    PlatformConfig pc;
    pc.data_dir = data;
    Platform p(pc);
    write_file_atomic(tmp / "resolved.miz", join_lines(embed_comments(*p.state()->article("XBOOLE_1"),
                                                                      std::map<std::string, std::string>{})
                                                           .lines));
  }
  c.expect(cli(data, {"comments", "resolve", "XBOOLE_1", (tmp / "resolved.miz").string(), "--as", "root"}).code ==
               kExitOk,
           "comments resolve");

  struct Pair {
    std::vector<std::string> args;
    std::string method, path, body;
  };
  const std::vector<Pair> pairs{
      {{"search", "names", "bool"}, "GET", "/api/search/names?q=bool", ""},
      {{"search", "names", "s", "--kind", "symbol", "--limit", "5"}, "GET", "/api/search/names?q=s&kind=symbol&limit=5", ""},
      {{"search", "names", "funct", "--kind", "article"}, "GET", "/api/search/names?q=funct&kind=article", ""},
      {{"search", "theorems", "X c= Y implies X /\\ Y = X"}, "POST", "/api/search/theorems",
       R"({"query":"X c= Y implies X /\\ Y = X"})"},
      {{"search", "theorems", "for n holds n = 0 or ex m st n = m + 1", "--limit", "4"}, "POST",
       "/api/search/theorems", R"({"query":"for n holds n = 0 or ex m st n = m + 1","limit":4})"},
      {{"graph", "export", "json"}, "GET", "/api/graph", ""},
      {{"graph", "export", "json", "--reduced"}, "GET", "/api/graph?reduced=true", ""},
      {{"graph", "export", "dot"}, "GET", "/api/graph.dot", ""},
      {{"graph", "export", "dot", "--reduced"}, "GET", "/api/graph.dot?reduced=true", ""},
      {{"graph", "export", "sfdp"}, "GET", "/api/graph.sfdp", ""},
      {{"graph", "layers", "--reduced"}, "GET", "/api/graph/layers?reduced=true", ""},
      {{"graph", "neighborhood", "SUBSET_1"}, "GET", "/api/graph/neighborhood?node=SUBSET_1", ""},
  };
  std::vector<std::string> cli_answers;
  for (const auto& pair : pairs) {
    auto r = cli(data, pair.args);
    c.expect(r.code == kExitOk, "cli " + pair.path);
    cli_answers.push_back(r.out);
  }

  // then the service over the same data directory
  PlatformConfig pc;
  pc.data_dir = data;
  Platform platform(pc);
  HttpServer server(platform);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  std::size_t agreed = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    auto res = pair.method == "GET" ? client.Get(pair.path) : client.Post(pair.path, pair.body, "application/json");
    if (!res) {
      c.expect(false, "no response for " + pair.path);
      continue;
    }
    c.expect(res->status == 200, pair.path + " status " + std::to_string(res->status));
    const bool same = res->body == cli_answers[i];
    c.expect(same, pair.path + " differs from the command line");
    agreed += same;
  }
  server.stop();

  // name index stress
  std::mt19937_64 rng(10000);
  NameIndex index;
  std::uniform_int_distribution<int> letter(0, 25), len(3, 12);
  for (std::size_t i = 0; i < kStressEntries; ++i) {
    std::string key;
    const int l = len(rng);
    for (int j = 0; j < l; ++j) key += static_cast<char>('A' + letter(rng));
    key += "_" + std::to_string(i % 10);
    index.entries.push_back({key, i % 4 ? EntryKind::Symbol : EntryKind::Article, "S:definition:" + std::to_string(i)});
    index.lowered.push_back(to_lower(key));
  }
  double worst_ms = 0;
  std::size_t queries_run = 0;
  std::vector<std::string> stress_queries{"a", "e", "_", "_3", "ab", "xyz", "q_1", "zzzz", ""};
  for (int i = 0; i < 200; ++i) {
    const auto& key = index.lowered[static_cast<std::size_t>(i) * 37 % kStressEntries];
    stress_queries.push_back(key.substr(0, 1 + static_cast<std::size_t>(i) % key.size()));
  }
  for (const auto& q : stress_queries) {
    const auto start = Clock::now();
    auto results = query(index, q, std::nullopt, queries::kDefaultNameLimit);
    worst_ms = std::max(worst_ms, std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    ++queries_run;
    (void)results;
  }
  c.expect(worst_ms <= kNameQueryBudgetMs, "worst name query " + fixed(worst_ms) + " ms");

  const double total = seconds_since(suite_start);
  c.expect(total < kSuiteBudgetSeconds, "acceptance run took " + fixed(total, 1) + " s");
  return c.outcome(std::to_string(agreed) + "/" + std::to_string(pairs.size()) + " CLI/API answers identical, " +
                   std::to_string(queries_run) + " name queries on " + std::to_string(kStressEntries) +
                   " entries worst " + fixed(worst_ms) + " ms, elapsed " + fixed(total, 1) + " s");
}

Outcome atomic_swap() {
  Checker c;
  testing::TempDir tmp;
  PlatformConfig config;
  config.data_dir = tmp / "data";
  Platform p(config);
  p.users().add({"root", "Root", Role::Admin, false, ""}, "root-token");
  p.ingest_corpus(testing::fixture("corpus_v1"), "v1");
  p.save_comment("NAT_1:theorem:4", "kept", {"root", false});
  HttpApi api(p);

  const std::vector<HttpRequest> probes{
      {"GET", "/api/status", {}, {}, ""},
      {"GET", "/api/articles", {}, {}, ""},
      {"GET", "/api/articles/TARSKI", {}, {}, ""},
      {"GET", "/api/articles/NAT_1", {}, {}, ""},
      {"GET", "/api/search/names", {{"q", "x"}}, {}, ""},
      {"POST", "/api/search/theorems", {}, {}, R"({"query":"X c= X"})"},
      {"GET", "/api/graph", {}, {}, ""},
      {"GET", "/api/graph", {{"reduced", "true"}}, {}, ""},
      {"GET", "/api/graph.dot", {}, {}, ""},
      {"GET", "/api/graph/layers", {}, {}, ""},
      {"GET", "/api/comments/NAT_1:theorem:4", {}, {}, ""},
  };
  auto answers = [&] {
    std::vector<std::string> out;
    for (const auto& r : probes) {
      auto res = api.handle(r);
      out.push_back(std::to_string(res.status) + " " + res.headers["X-Corpus-Hash"] + "\n" + res.body);
    }
    return out;
  };
  const auto before = answers();
  std::map<std::string, std::string> files_before;
  for (const auto& e : fs::recursive_directory_iterator(tmp / "data"))
    if (e.is_regular_file()) files_before[e.path().string()] = read_file(e.path());

  bool threw = false;
  try {
    p.update_corpus(testing::fixture("corpus_cyclic"), "broken");
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::CyclicDependency;
  }
  c.expect(threw, "cyclic update did not fail with CyclicDependency");
  c.expect(answers() == before, "answers changed after the failed update");

  auto via_http = api.handle({"POST", "/api/admin/update", {}, {{"authorization", "Bearer root-token"}},
                              R"({"path":")" + testing::fixture("corpus_cyclic").string() + R"(","label":"broken"})"});
  c.expect(via_http.status == 400, "HTTP update answered " + std::to_string(via_http.status));
  c.expect(answers() == before, "answers changed after the failed HTTP update");

  std::map<std::string, std::string> files_after;
  for (const auto& e : fs::recursive_directory_iterator(tmp / "data"))
    if (e.is_regular_file()) files_after[e.path().string()] = read_file(e.path());
  c.expect(files_after == files_before, "data directory changed");

  Platform reopened(config);
  HttpApi reopened_api(reopened);
  c.expect(reopened_api.handle(probes[6]).body == api.handle(probes[6]).body, "reopened service serves another graph");
  return c.outcome(std::to_string(probes.size()) + " probes unchanged");
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"transitive-reduction-oracle", reduction_oracle},
      {"reachability-and-minimality", reachability_and_minimality},
      {"layering-oracle", layering_oracle},
      {"svd-oracle", svd_oracle},
      {"retrieval-separation", retrieval_separation},
      {"merge-suite", merge_suite},
      {"parser-round-trip", parser_round_trip},
      {"end-to-end", [&] { return end_to_end(suite_start); }},
      {"atomic-swap", atomic_swap},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << " " << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
