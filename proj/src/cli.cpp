#include "mmlhub/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/http_api.hpp"
#include "mmlhub/io.hpp"
#include "mmlhub/platform.hpp"
#include "mmlhub/queries.hpp"

namespace mmlhub {

namespace fs = std::filesystem;

namespace {

bool is_internal(ErrorCode code) { return code == ErrorCode::CorruptData || code == ErrorCode::ConvergenceFailure; }

std::shared_ptr<const CorpusState> served(const Platform& platform) {
  auto state = platform.state();
  if (!state) throw Error(ErrorCode::NoCorpus, "no library in " + platform.config().data_dir.string() + "; run ingest first");
  return state;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mizar library knowledge platform", "mmlhub"};
  app.require_subcommand(1);
  app.fallthrough();  // --data and --config may follow the command

  std::string data_dir;
  std::string config_file;
  app.add_option("--data", data_dir, "data directory (overrides config and MMLHUB_DATA_DIR)");
  app.add_option("--config", config_file, "JSON config file");

  std::string dir, dir2, label, query_text, node, anchor_or_name, token, user_name, role = "editor";
  std::string kind_text;
  std::size_t name_limit = queries::kDefaultNameLimit, theorem_limit = queries::kDefaultTheoremLimit, radius = 1;
  bool reduced = false, unblock = false;

  auto* ingest = app.add_subcommand("ingest", "build and persist a library snapshot from a directory of .miz files");
  ingest->add_option("dir", dir, "corpus directory")->required();
  ingest->add_option("--label", label, "version label (default: directory name)");

  auto* update = app.add_subcommand("update", "carry comments across a library update, then ingest it");
  update->add_option("dir", dir, "new corpus directory")->required();
  update->add_option("--label", label, "version label")->required();

  auto* graph = app.add_subcommand("graph", "dependency graph");
  graph->require_subcommand(1);
  auto* graph_export = graph->add_subcommand("export", "print the graph as dot, json or sfdp");
  std::string format;
  graph_export->add_option("format", format, "dot|json|sfdp")
      ->required()
      ->check(CLI::IsMember({"dot", "json", "sfdp"}));
  graph_export->add_flag("--reduced", reduced, "transitive reduction");
  auto* graph_layers = graph->add_subcommand("layers", "print the name to layer table");
  graph_layers->add_flag("--reduced", reduced, "layers of the reduced graph");
  auto* graph_nbhd = graph->add_subcommand("neighborhood", "subgraph around one article");
  graph_nbhd->add_option("node", node, "article name")->required();
  graph_nbhd->add_option("--radius", radius, "undirected distance");
  graph_nbhd->add_flag("--reduced", reduced, "use the reduced graph");

  auto* search = app.add_subcommand("search", "name and theorem search");
  search->require_subcommand(1);
  auto* search_names = search->add_subcommand("names", "tiered name lookup");
  search_names->add_option("query", query_text, "text to match")->required();
  search_names->add_option("--kind", kind_text, "article|symbol")->check(CLI::IsMember({"article", "symbol"}));
  search_names->add_option("--limit", name_limit, "maximum results");
  auto* search_theorems = search->add_subcommand("theorems", "latent semantic theorem search");
  search_theorems->add_option("query", query_text, "formal statement text")->required();
  search_theorems->add_option("--limit", theorem_limit, "maximum results");

  auto* comments = app.add_subcommand("comments", "comment maintenance");
  comments->require_subcommand(1);
  auto* rebase = comments->add_subcommand("rebase", "dry-run update report between two corpus directories");
  rebase->add_option("old", dir, "old corpus directory")->required();
  rebase->add_option("new", dir2, "new corpus directory")->required();
  auto* resolve = comments->add_subcommand("resolve", "resolve a frozen article from an annotated file");
  resolve->add_option("article", anchor_or_name, "article name")->required();
  resolve->add_option("file", dir, "annotated source")->required();
  resolve->add_option("--as", user_name, "administrator id")->required();

  auto* users = app.add_subcommand("users", "user accounts");
  users->require_subcommand(1);
  auto* users_add = users->add_subcommand("add", "provision an account");
  users_add->add_option("id", anchor_or_name, "user id")->required();
  users_add->add_option("--token", token, "bearer token")->required();
  users_add->add_option("--role", role, "admin|editor")->check(CLI::IsMember({"admin", "editor"}));
  users_add->add_option("--name", user_name, "display name");
  auto* users_block = users->add_subcommand("block", "block or unblock an account");
  users_block->add_option("id", anchor_or_name, "user id")->required();
  users_block->add_flag("--unblock", unblock, "lift the block");

  auto* status = app.add_subcommand("status", "summary of the served snapshot");

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  serve->add_option("--config", config_file, "JSON config file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUserError;
  }

  try {
    PlatformConfig config = config_file.empty() ? PlatformConfig{} : load_config(config_file);
    apply_env_overrides(config);
    if (!data_dir.empty()) config.data_dir = data_dir;
    Platform platform(config);

    if (ingest->parsed()) {
      if (label.empty()) label = fs::path(dir).lexically_normal().filename().string();
      if (label.empty()) label = fs::absolute(dir).lexically_normal().parent_path().filename().string();
      auto result = platform.ingest_corpus(dir, label);
      for (const auto& w : result.state->warnings) err << "warning: " << w << "\n";
      out << queries::status(platform);
    } else if (update->parsed()) {
      auto report = platform.update_corpus(dir, label);
      if (report.conflict_count > 0)
        err << report.conflict_count << " conflict(s); affected articles are frozen pending resolution\n";
      out << report.to_json();
    } else if (graph_export->parsed()) {
      auto state = served(platform);
      out << (format == "dot"    ? queries::graph_dot(*state, reduced)
              : format == "json" ? queries::graph_json(*state, reduced)
                                 : queries::graph_sfdp(*state, reduced));
    } else if (graph_layers->parsed()) {
      out << queries::layers_table(*served(platform), reduced);
    } else if (graph_nbhd->parsed()) {
      out << queries::neighborhood(*served(platform), node, radius, reduced);
    } else if (search_names->parsed()) {
      std::optional<EntryKind> kind;
      if (!kind_text.empty()) kind = entry_kind_from_string(kind_text);
      out << queries::names(*served(platform), query_text, kind, name_limit);
    } else if (search_theorems->parsed()) {
      out << queries::theorems(*served(platform), query_text, theorem_limit);
    } else if (rebase->parsed()) {
      out << platform.preview_rebase(dir, dir2).to_json();
    } else if (resolve->parsed()) {
      auto admin = platform.users().find(user_name);
      if (!admin) throw Error(ErrorCode::InvalidArgument, "unknown user " + user_name);
      if (admin->role != Role::Admin) throw Error(ErrorCode::Forbidden, "user " + user_name + " is not an administrator");
      platform.resolve_conflict(anchor_or_name, read_file(dir), admin->actor());
      out << queries::status(platform);
    } else if (users_add->parsed()) {
      User user;
      user.id = anchor_or_name;
      user.name = user_name.empty() ? anchor_or_name : user_name;
      user.role = *role_from_string(role);
      platform.users().add(std::move(user), token);
      out << nlohmann::ordered_json{{"id", anchor_or_name}, {"role", role}}.dump() << "\n";
    } else if (users_block->parsed()) {
      if (!platform.users().set_blocked(anchor_or_name, !unblock))
        throw Error(ErrorCode::InvalidArgument, "unknown user " + anchor_or_name);
      out << nlohmann::ordered_json{{"id", anchor_or_name}, {"blocked", !unblock}}.dump() << "\n";
    } else if (status->parsed()) {
      out << queries::status(platform);
    } else if (serve->parsed()) {
      HttpServer server(platform);
      err << "serving " << config.data_dir.string() << " on " << config.host << ":" << config.port << "\n";
      err.flush();
      server.listen(config.host, config.port);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_internal(e.code()) ? kExitInternalError : kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace mmlhub
