#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "privlocker/abe/scheme.hpp"
#include "privlocker/bytes.hpp"
#include "privlocker/group/bls12.hpp"
#include "privlocker/locker/store_file.hpp"
#include "privlocker/locker/uri.hpp"
#include "privlocker/random.hpp"

namespace privlocker::locker {

using Group = group::Bls12;
using policy::AccessTree;
using policy::AttributeLabel;
using policy::AttributeSet;
using IssuerSet = std::set<std::string>;

// Request/response signing hook. Tags are opaque to the service.
class Authenticator {
 public:
  virtual ~Authenticator() = default;
  virtual Bytes sign(std::string_view issuer_id, ByteView payload) = 0;
  virtual bool verify(std::string_view issuer_id, ByteView payload, ByteView tag) = 0;
};

class NoopAuthenticator final : public Authenticator {
 public:
  static constexpr std::string_view kTag = "noop";
  Bytes sign(std::string_view, ByteView) override;
  bool verify(std::string_view, ByteView, ByteView tag) override;
};

struct IssuerRecord {
  std::string id;
  std::set<std::string> catalog;  // empty: any attribute name
  std::uint64_t registered_at = 0;
};

struct AttributeEntry {
  std::string source_issuer;
  std::uint64_t updated_at = 0;
  friend bool operator==(const AttributeEntry&, const AttributeEntry&) = default;
};

using AttributeView = std::map<AttributeLabel, AttributeEntry>;

struct TokenKey {
  std::string subscriber;
  std::string issuer;
  std::string policy_hash;  // hex BLAKE2b of both canonical subtrees
  friend auto operator<=>(const TokenKey&, const TokenKey&) = default;
};

struct EDocument {
  DocumentUri uri;
  std::string owner;
  abe::Ciphertext<Group> ciphertext;
  Bytes issuer_signature;
  std::uint64_t created_at = 0;
};

struct KeyHandle {
  std::string identity;
  IssuerSet issuer_set;

  // identity:ISSUER1,ISSUER2
  std::string render() const;
  friend auto operator<=>(const KeyHandle&, const KeyHandle&) = default;
};

struct StoredKey {
  abe::AttributeKey<Group> key;
  std::uint64_t created_at = 0;
};

struct TokenResult {
  TokenKey cache_key;
  abe::CombinedToken<Group> token;
  bool cache_hit = false;
};

struct IssueResult {
  DocumentUri uri;
  bool token_cache_hit = false;
};

struct KeyGenResult {
  KeyHandle handle;
  std::vector<KeyHandle> evicted;
  bool reused_dominating = false;  // a stored key already covers a strict superset
};

struct Counters {
  std::uint64_t token_handshakes = 0;
  std::uint64_t token_cache_hits = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

// Attribute authority and document repository. Every public operation takes
// the service mutex; cryptographic work happens under it.
//
// Timestamps come from a logical clock that advances once per mutation and
// is persisted with the authority store.
class LockerService {
 public:
  explicit LockerService(std::shared_ptr<RandomSource> rng = std::make_shared<SystemRandom>(),
                         std::shared_ptr<Authenticator> auth = std::make_shared<NoopAuthenticator>());

  void set_random(std::shared_ptr<RandomSource> rng);

  bool initialized() const;
  // Throws already_initialized.
  abe::MasterPublicKey<Group> setup();
  abe::MasterPublicKey<Group> public_key() const;

  IssuerRecord register_issuer(const std::string& issuer_id, const std::set<std::string>& catalog = {});
  std::vector<IssuerRecord> issuers() const;

  // Returns false when the identity already existed.
  bool register_identity(const std::string& identity);

  // Merge last-writer-wins; unknown identities are created. Returns the
  // identity's full attribute set after the merge.
  AttributeSet push_attrs(const std::string& identity, const AttributeSet& attrs);
  AttributeSet pull_attrs(const std::string& identity) const;
  AttributeView attribute_entries(const std::string& identity) const;

  // Token handshake for (subscriber, issuer, policy pair), served from the
  // token store when the same triple was seen before.
  TokenResult prepare_token(const std::string& issuer_id, const std::string& subscriber_id,
                            const AccessTree& issuer_policy, const AccessTree& subscriber_policy);

  IssueResult issue_priv_document(const std::string& issuer_id, const std::string& subscriber_id,
                                  const AccessTree& issuer_policy, const AccessTree& subscriber_policy,
                                  ByteView document);

  KeyGenResult gen_ab_pvt_key(const std::string& identity, const IssuerSet& issuer_set);
  std::vector<KeyHandle> keys(const std::string& identity) const;
  abe::AttributeKey<Group> export_key(const KeyHandle& handle) const;

  // Key chosen: smallest covering issuer set, ties by lexicographic order.
  Bytes fetch_priv_doc(const std::string& requester_id, const DocumentUri& uri) const;
  std::optional<KeyHandle> select_key(const std::string& requester_id, const IssuerSet& needed) const;

  EDocument document(const DocumentUri& uri) const;
  std::vector<DocumentUri> documents() const;

  // Plain-document flows; always throw not_implemented.
  Bytes pull_doc(const DocumentUri& uri) const;
  std::vector<DocumentUri> pull_uri(const std::string& identity) const;

  Counters counters() const;
  std::uint64_t clock() const;

  void save(const std::filesystem::path& dir) const;
  // All-or-nothing: on any error the current state is left untouched.
  void load(const std::filesystem::path& dir);
  static bool store_exists(const std::filesystem::path& dir);

 private:
  struct Authority {
    abe::MasterSecretKey<Group> secret;
    abe::MasterPublicKey<Group> public_key;
  };
  struct State {
    std::optional<Authority> authority;
    std::uint64_t clock = 0;
    Counters counters;
    std::map<std::string, IssuerRecord> issuers;
    std::map<std::string, AttributeView> registry;
    std::map<TokenKey, abe::CombinedToken<Group>> tokens;
    std::map<DocumentUri, EDocument> documents;
    std::map<KeyHandle, StoredKey> keys;
  };

  const Authority& authority() const;
  std::uint64_t tick() { return ++state_.clock; }
  void check_policy(const AccessTree& tree) const;
  TokenResult prepare_token_locked(const std::string& issuer_id, const std::string& subscriber_id,
                                   const AccessTree& issuer_policy, const AccessTree& subscriber_policy);
  std::optional<KeyHandle> select_key_locked(const std::string& requester_id, const IssuerSet& needed) const;

  static Bytes encode_state(const State& s, StoreTag tag);
  static void decode_state(State& s, StoreTag tag, ByteView payload);

  mutable std::mutex mu_;
  std::shared_ptr<RandomSource> rng_;
  std::shared_ptr<Authenticator> auth_;
  State state_;
};

}  // namespace privlocker::locker
