#include "privlocker/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "privlocker/abe/codec.hpp"
#include "privlocker/cli/scenario.hpp"
#include "privlocker/error.hpp"
#include "privlocker/group/toy.hpp"
#include "privlocker/locker/service.hpp"
#include "privlocker/locker/store_file.hpp"

namespace privlocker::cli {
namespace {

namespace fs = std::filesystem;
using locker::LockerService;

bool needs_quotes(std::string_view v) {
  return v.find_first_of(" \t\"\\") != std::string_view::npos;
}

std::string quote(std::string_view v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

template <class Range>
std::string join(const Range& items, std::string_view sep = ",") {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    if constexpr (requires { item.canonical(); }) {
      out += item.canonical();
    } else if constexpr (requires { item.render(); }) {
      out += item.render();
    } else {
      out += item;
    }
  }
  return out;
}

struct Context {
  fs::path store;
  std::optional<std::uint64_t> seed;
};

void apply_seed([[maybe_unused]] LockerService& svc, [[maybe_unused]] const Context& ctx) {
#ifdef PRIVLOCKER_TEST_HOOKS
  if (ctx.seed) {
    svc.set_random(std::make_shared<SeededRandom>(*ctx.seed, "privlocker-cli/clock=" + std::to_string(svc.clock())));
  }
#endif
}

std::unique_ptr<LockerService> open_store(const Context& ctx) {
  if (!LockerService::store_exists(ctx.store)) {
    throw Error(ErrorCode::not_initialized, "no store at " + ctx.store.string() + "; run setup first");
  }
  auto svc = std::make_unique<LockerService>();
  svc->load(ctx.store);
  apply_seed(*svc, ctx);
  return svc;
}

policy::AttributeSet parse_labels(const std::vector<std::string>& words) {
  policy::AttributeSet out;
  for (const auto& w : words) out.insert(policy::AttributeLabel::parse(w));
  return out;
}

template <group::PairingGroup G>
Fields describe_record(abe::RecordType type, ByteView bytes) {
  Fields f;
  auto size = [](const auto& element) { return std::to_string(element.to_bytes().size()); };
  auto tree_fields = [&](const auto& v) {
    f.emplace_back("policy", policy::render_policy(v.tree));
    f.emplace_back("leaves", std::to_string(v.leaves.size()));
    f.emplace_back("c1", size(v.c1));
    f.emplace_back("c2", size(v.c2));
    if (!v.leaves.empty()) {
      f.emplace_back("c3", size(v.leaves.front().c3));
      f.emplace_back("c4", size(v.leaves.front().c4));
    }
  };
  switch (type) {
    case abe::RecordType::master_public_key: {
      auto v = abe::decode_master_public_key<G>(bytes);
      f.emplace_back("g_beta", size(v.g_beta));
      f.emplace_back("egg_alpha", size(v.egg_alpha));
      break;
    }
    case abe::RecordType::master_secret_key: {
      auto v = abe::decode_master_secret_key<G>(bytes);
      f.emplace_back("beta", size(v.beta));
      f.emplace_back("g_alpha", size(v.g_alpha));
      break;
    }
    case abe::RecordType::partial_token:
      tree_fields(abe::decode_partial_token<G>(bytes));
      break;
    case abe::RecordType::combined_token:
      tree_fields(abe::decode_combined_token<G>(bytes));
      break;
    case abe::RecordType::ciphertext: {
      auto v = abe::decode_ciphertext<G>(bytes);
      tree_fields(v);
      f.emplace_back("suite", std::to_string(v.suite));
      f.emplace_back("c5", std::to_string(v.c5.size()));
      break;
    }
    case abe::RecordType::attribute_key: {
      auto v = abe::decode_attribute_key<G>(bytes);
      f.emplace_back("holder", v.holder);
      f.emplace_back("issuers", join(v.issuer_set));
      f.emplace_back("attributes", join(v.attributes()));
      f.emplace_back("d", size(v.d));
      if (!v.per_attr.empty()) {
        f.emplace_back("d_j", size(v.per_attr.begin()->second.d_j));
        f.emplace_back("d_j_prime", size(v.per_attr.begin()->second.d_j_prime));
      }
      break;
    }
  }
  return f;
}

Fields inspect_file(const fs::path& path) {
  const auto bytes = locker::read_file(path);
  const ByteView view(bytes);
  Fields f;
  if (view.size() >= 5 && std::equal(locker::kStoreMagic.begin(), locker::kStoreMagic.end(), view.begin())) {
    const auto raw_tag = view[4];
    if (raw_tag < 1 || raw_tag > static_cast<std::uint8_t>(locker::StoreTag::keys)) {
      throw Error(ErrorCode::malformed_encoding, "unknown store tag");
    }
    const auto tag = static_cast<locker::StoreTag>(raw_tag);
    const auto payload = locker::unwrap_store_file(tag, view);
    f.emplace_back("type", "store");
    f.emplace_back("store", std::string(locker::store_file_name(tag)));
    f.emplace_back("version", std::to_string(locker::kStoreVersion));
    f.emplace_back("payload", std::to_string(payload.size()));
    return f;
  }
  const auto header = abe::peek_record(view);
  f.emplace_back("type", std::string(abe::record_type_name(header.type)));
  Fields rest;
  if (header.group_id == group::Bls12::kId) {
    f.emplace_back("group", std::string(group::Bls12::kName));
    rest = describe_record<group::Bls12>(header.type, view);
  } else if (header.group_id == group::ToyGroup::kId) {
    f.emplace_back("group", std::string(group::ToyGroup::kName));
    rest = describe_record<group::ToyGroup>(header.type, view);
  } else {
    throw Error(ErrorCode::malformed_encoding, "unknown group id " + std::to_string(header.group_id));
  }
  f.emplace_back("version", std::to_string(header.version));
  f.emplace_back("bytes", std::to_string(bytes.size()));
  f.insert(f.end(), rest.begin(), rest.end());
  return f;
}

struct PolicyArgs {
  std::string issuer;
  std::string subscriber;
  std::string issuer_policy;
  std::string subscriber_policy;

  void attach(CLI::App* sub) {
    sub->add_option("--issuer", issuer, "Issuer id")->required();
    sub->add_option("--subscriber", subscriber, "Subscriber identity")->required();
    sub->add_option("--issuer-policy", issuer_policy, "Issuer's part of the access policy")->required();
    sub->add_option("--subscriber-policy", subscriber_policy, "Subscriber's part of the access policy")->required();
  }
};

}  // namespace

std::string format_fields(const Fields& fields) {
  std::string out;
  for (const auto& [k, v] : fields) {
    if (!out.empty()) out += ' ';
    out += k;
    out += '=';
    out += needs_quotes(v) ? quote(v) : v;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '\\' && i + 1 < line.size()) {
        cur += line[++i];
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
      in_word = true;
    } else if (c == ' ' || c == '\t') {
      if (in_word) out.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::parse_error, "unterminated quote");
  if (in_word) out.push_back(std::move(cur));
  return out;
}

Fields parse_fields(std::string_view line) {
  Fields out;
  for (auto& word : split_words(line)) {
    const auto eq = word.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::parse_error, "expected key=value, got '" + word + "'");
    out.emplace_back(word.substr(0, eq), word.substr(eq + 1));
  }
  return out;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribute-based private document locker", "privlocker"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  std::string store;
  std::string format = "text";
  app.add_option("--store", store, "Store directory")->required();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text"}));
#ifdef PRIVLOCKER_TEST_HOOKS
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Deterministic randomness (test builds only)");
#endif

  std::function<Fields()> action;
  std::optional<int> scenario_status;

  auto* setup = app.add_subcommand("setup", "Create the attribute authority and an empty store");
  setup->callback([&] {
    action = [&] {
      if (LockerService::store_exists(ctx.store)) {
        throw Error(ErrorCode::already_initialized, "store at " + ctx.store.string() + " already exists");
      }
      LockerService svc;
      apply_seed(svc, ctx);
      const auto mpk = svc.setup();
      svc.save(ctx.store);
      return Fields{{"status", "initialized"},
                    {"group", std::string(group::Bls12::kName)},
                    {"mpk_bytes", std::to_string(abe::encode(mpk).size())}};
    };
  });

  std::string issuer_id;
  std::vector<std::string> catalog;
  auto* reg_issuer = app.add_subcommand("register-issuer", "Register an issuer and its attribute catalog");
  reg_issuer->add_option("issuer", issuer_id, "Issuer id")->required();
  reg_issuer->add_option("--catalog", catalog, "Comma-separated attribute names")->delimiter(',');
  reg_issuer->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      auto rec = svc->register_issuer(issuer_id, {catalog.begin(), catalog.end()});
      svc->save(ctx.store);
      return Fields{{"issuer", rec.id}, {"catalog", rec.catalog.empty() ? "*" : join(rec.catalog)}};
    };
  });

  std::string identity;
  auto* reg_identity = app.add_subcommand("register-identity", "Register an identity with no attributes");
  reg_identity->add_option("identity", identity, "Identity")->required();
  reg_identity->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      const bool created = svc->register_identity(identity);
      svc->save(ctx.store);
      return Fields{{"identity", identity}, {"created", created ? "yes" : "no"}};
    };
  });

  std::vector<std::string> labels;
  auto* push = app.add_subcommand("push-attrs", "Merge attributes into an identity's registry entry");
  push->add_option("identity", identity, "Identity")->required();
  push->add_option("labels", labels, "Attribute labels, AUTHORITY/name")->required();
  push->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      const auto all = svc->push_attrs(identity, parse_labels(labels));
      svc->save(ctx.store);
      return Fields{{"identity", identity}, {"attrs", join(all)}};
    };
  });

  auto* pull = app.add_subcommand("pull-attrs", "Show an identity's attributes");
  pull->add_option("identity", identity, "Identity")->required();
  pull->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      return Fields{{"identity", identity}, {"attrs", join(svc->pull_attrs(identity))}};
    };
  });

  PolicyArgs policy_args;
  std::string out_path;
  auto* gen_token = app.add_subcommand("gen-token", "Run or reuse the two-party token handshake");
  policy_args.attach(gen_token);
  gen_token->add_option("--out", out_path, "Write the combined token here");
  gen_token->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      auto res = svc->prepare_token(policy_args.issuer, policy_args.subscriber,
                                    policy::parse_policy(policy_args.issuer_policy),
                                    policy::parse_policy(policy_args.subscriber_policy));
      svc->save(ctx.store);
      if (!out_path.empty()) locker::write_file(out_path, abe::encode(res.token));
      return Fields{{"token_cache", res.cache_hit ? "hit" : "miss"},
                    {"policy_hash", res.cache_key.policy_hash},
                    {"policy", policy::render_policy(res.token.tree)}};
    };
  });

  std::string in_path;
  auto* issue = app.add_subcommand("issue-doc", "Encrypt a document and store it under a PRIV uri");
  policy_args.attach(issue);
  issue->add_option("--in", in_path, "Document to encrypt")->required();
  issue->add_option("--ciphertext-out", out_path, "Also write the ciphertext record here");
  issue->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      const auto document = locker::read_file(in_path);
      auto res = svc->issue_priv_document(policy_args.issuer, policy_args.subscriber,
                                          policy::parse_policy(policy_args.issuer_policy),
                                          policy::parse_policy(policy_args.subscriber_policy), document);
      svc->save(ctx.store);
      if (!out_path.empty()) locker::write_file(out_path, abe::encode(svc->document(res.uri).ciphertext));
      return Fields{{"uri", res.uri.render()},
                    {"doctype", res.uri.doc_type},
                    {"token_cache", res.token_cache_hit ? "hit" : "miss"}};
    };
  });

  std::vector<std::string> issuer_list;
  auto* gen_key = app.add_subcommand("gen-key", "Issue an attribute key for an identity and issuer set");
  gen_key->add_option("identity", identity, "Identity")->required();
  gen_key->add_option("issuers", issuer_list, "Issuer ids")->required();
  gen_key->add_option("--out", out_path, "Write the key record here");
  gen_key->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      auto res = svc->gen_ab_pvt_key(identity, {issuer_list.begin(), issuer_list.end()});
      svc->save(ctx.store);
      if (!out_path.empty()) locker::write_file(out_path, abe::encode(svc->export_key(res.handle)));
      return Fields{{"key", res.handle.render()},
                    {"evicted", std::to_string(res.evicted.size())},
                    {"reused", res.reused_dominating ? "yes" : "no"}};
    };
  });

  auto* list_keys = app.add_subcommand("list-keys", "List stored keys for an identity");
  list_keys->add_option("identity", identity, "Identity")->required();
  list_keys->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      const auto held = svc->keys(identity);
      return Fields{{"identity", identity}, {"count", std::to_string(held.size())}, {"keys", join(held, ";")}};
    };
  });

  std::string uri_text;
  auto* fetch = app.add_subcommand("fetch-doc", "Decrypt a PRIV document for a requester");
  fetch->add_option("requester", identity, "Requester identity")->required();
  fetch->add_option("uri", uri_text, "Document uri")->required();
  fetch->add_option("--out", out_path, "Write the recovered document here")->required();
  fetch->callback([&] {
    action = [&] {
      auto svc = open_store(ctx);
      const auto uri = locker::DocumentUri::parse(uri_text);
      const auto plain = svc->fetch_priv_doc(identity, uri);
      locker::write_file(out_path, plain);
      return Fields{{"uri", uri.render()}, {"bytes", std::to_string(plain.size())}};
    };
  });

  std::string file_path;
  auto* inspect = app.add_subcommand("inspect", "Describe a serialized record or store file");
  inspect->add_option("file", file_path, "File")->required();
  inspect->callback([&] { action = [&] { return inspect_file(file_path); }; });

  auto* scenario = app.add_subcommand("run-scenario", "Run a scenario script against the store");
  scenario->add_option("file", file_path, "Scenario script")->required();
  scenario->callback([&] {
    action = [&] {
      std::vector<std::string> global = {"--store", ctx.store.string()};
      if (ctx.seed) {
        global.push_back("--seed");
        global.push_back(std::to_string(*ctx.seed));
      }
      const auto report = run_scenario(file_path, ctx.store, global, err);
      Fields f{{"scenario", fs::path(file_path).filename().string()},
               {"steps", std::to_string(report.steps)},
               {"passed", std::to_string(report.passed)},
               {"failed", std::to_string(report.steps - report.passed)}};
      if (!report.ok()) scenario_status = exit_code_for(ErrorCode::expectation_failed);
      return f;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    ctx.store = store;
#ifdef PRIVLOCKER_TEST_HOOKS
    if (seed_opt->count() > 0) ctx.seed = seed;
#endif
    out << format_fields(action()) << '\n';
    if (scenario_status) {
      err << "privlocker: expectation_failed: scenario had failing steps\n";
      return *scenario_status;
    }
    return 0;
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    out << format_fields({{"error", "invalid_argument"}}) << '\n';
    err << "privlocker: invalid_argument: " << e.what() << '\n';
    return exit_code_for(ErrorCode::invalid_argument);
  } catch (const Error& e) {
    out << format_fields({{"error", std::string(error_code_name(e.code()))}}) << '\n';
    err << "privlocker: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    out << format_fields({{"error", "io_error"}}) << '\n';
    err << "privlocker: io_error: " << e.what() << '\n';
    return exit_code_for(ErrorCode::io_error);
  }
}

}  // namespace privlocker::cli
