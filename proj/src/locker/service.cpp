#include "privlocker/locker/service.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>

#include "privlocker/abe/codec.hpp"
#include "privlocker/error.hpp"

namespace privlocker::locker {
namespace {

constexpr std::array kAllTags = {StoreTag::authority, StoreTag::issuers,   StoreTag::attributes,
                                 StoreTag::tokens,    StoreTag::documents, StoreTag::keys};
constexpr std::string_view kPolicyHashKey = "privlocker/token-policy/v1";

std::string policy_hash(const AccessTree& subscriber_policy, const AccessTree& issuer_policy) {
  ByteWriter w;
  ByteWriter sub;
  policy::encode_tree(sub, subscriber_policy);
  ByteWriter iss;
  policy::encode_tree(iss, issuer_policy);
  w.put_blob(sub.bytes());
  w.put_blob(iss.bytes());
  ensure_sodium();
  std::array<std::uint8_t, 32> digest{};
  const auto key = as_bytes(kPolicyHashKey);
  crypto_generichash(digest.data(), digest.size(), w.bytes().data(), w.bytes().size(), key.data(), key.size());
  return to_hex(digest);
}

Bytes signing_payload(const DocumentUri& uri, const abe::Ciphertext<Group>& ct) {
  ByteWriter w;
  w.put_string(uri.render());
  w.put_blob(abe::encode(ct));
  return w.take();
}

// Issuer ids and catalog names must form a valid label.
void check_label(const std::string& issuer_id, const std::string& name) {
  try {
    if (AttributeLabel::parse(issuer_id + "/" + name) == AttributeLabel{issuer_id, name}) return;
  } catch (const Error&) {
  }
  throw Error(ErrorCode::invalid_argument, "'" + issuer_id + "/" + name + "' is not a valid attribute label");
}

bool is_subset(const IssuerSet& a, const IssuerSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

void put_issuer_set(ByteWriter& w, const IssuerSet& s) {
  w.put_u32(static_cast<std::uint32_t>(s.size()));
  for (const auto& id : s) w.put_string(id);
}

IssuerSet get_issuer_set(ByteReader& r) {
  IssuerSet out;
  const auto n = r.get_u32();
  for (std::uint32_t i = 0; i < n; ++i) out.insert(r.get_string());
  return out;
}

}  // namespace

Bytes NoopAuthenticator::sign(std::string_view, ByteView) {
  const auto tag = as_bytes(kTag);
  return Bytes(tag.begin(), tag.end());
}

bool NoopAuthenticator::verify(std::string_view, ByteView, ByteView tag) {
  const auto expected = as_bytes(kTag);
  return std::equal(tag.begin(), tag.end(), expected.begin(), expected.end());
}

std::string KeyHandle::render() const {
  std::string out = identity + ":";
  bool first = true;
  for (const auto& id : issuer_set) {
    if (!first) out += ",";
    out += id;
    first = false;
  }
  return out;
}

LockerService::LockerService(std::shared_ptr<RandomSource> rng, std::shared_ptr<Authenticator> auth)
    : rng_(std::move(rng)), auth_(std::move(auth)) {
  if (!rng_ || !auth_) throw Error(ErrorCode::invalid_argument, "locker service needs a random source and authenticator");
}

void LockerService::set_random(std::shared_ptr<RandomSource> rng) {
  if (!rng) throw Error(ErrorCode::invalid_argument, "null random source");
  std::lock_guard lock(mu_);
  rng_ = std::move(rng);
}

bool LockerService::initialized() const {
  std::lock_guard lock(mu_);
  return state_.authority.has_value();
}

const LockerService::Authority& LockerService::authority() const {
  if (!state_.authority) throw Error(ErrorCode::not_initialized, "attribute authority has not been set up");
  return *state_.authority;
}

abe::MasterPublicKey<Group> LockerService::setup() {
  std::lock_guard lock(mu_);
  if (state_.authority) throw Error(ErrorCode::already_initialized, "attribute authority already set up");
  auto keys = abe::setup<Group>(*rng_);
  state_.authority = Authority{keys.secret, keys.public_key};
  tick();
  return keys.public_key;
}

abe::MasterPublicKey<Group> LockerService::public_key() const {
  std::lock_guard lock(mu_);
  return authority().public_key;
}

IssuerRecord LockerService::register_issuer(const std::string& issuer_id, const std::set<std::string>& catalog) {
  std::lock_guard lock(mu_);
  authority();
  if (issuer_id.empty()) throw Error(ErrorCode::invalid_argument, "issuer id must be non-empty");
  if (state_.issuers.contains(issuer_id)) throw Error(ErrorCode::duplicate_issuer, "issuer '" + issuer_id + "' exists");
  check_label(issuer_id, "x");
  for (const auto& name : catalog) check_label(issuer_id, name);
  IssuerRecord rec{issuer_id, catalog, tick()};
  state_.issuers.emplace(issuer_id, rec);
  return rec;
}

std::vector<IssuerRecord> LockerService::issuers() const {
  std::lock_guard lock(mu_);
  std::vector<IssuerRecord> out;
  for (const auto& [_, rec] : state_.issuers) out.push_back(rec);
  return out;
}

bool LockerService::register_identity(const std::string& identity) {
  std::lock_guard lock(mu_);
  authority();
  if (identity.empty()) throw Error(ErrorCode::invalid_argument, "identity must be non-empty");
  if (state_.registry.contains(identity)) return false;
  state_.registry.emplace(identity, AttributeView{});
  tick();
  return true;
}

AttributeSet LockerService::push_attrs(const std::string& identity, const AttributeSet& attrs) {
  std::lock_guard lock(mu_);
  authority();
  if (identity.empty()) throw Error(ErrorCode::invalid_argument, "identity must be non-empty");
  for (const auto& label : attrs) {
    const auto it = state_.issuers.find(label.authority);
    if (it == state_.issuers.end()) {
      throw Error(ErrorCode::unknown_issuer, "label " + label.canonical() + " names an unregistered issuer");
    }
    if (!it->second.catalog.empty() && !it->second.catalog.contains(label.name)) {
      throw Error(ErrorCode::unknown_attribute, label.canonical() + " is not in the issuer's catalog");
    }
  }
  const auto now = tick();
  auto& view = state_.registry[identity];
  for (const auto& label : attrs) {
    auto& entry = view[label];
    if (entry.updated_at <= now) entry = AttributeEntry{label.authority, now};
  }
  AttributeSet out;
  for (const auto& [label, _] : view) out.insert(label);
  return out;
}

AttributeSet LockerService::pull_attrs(const std::string& identity) const {
  AttributeSet out;
  for (const auto& [label, _] : attribute_entries(identity)) out.insert(label);
  return out;
}

AttributeView LockerService::attribute_entries(const std::string& identity) const {
  std::lock_guard lock(mu_);
  const auto it = state_.registry.find(identity);
  if (it == state_.registry.end()) throw Error(ErrorCode::unknown_identity, "unknown identity '" + identity + "'");
  return it->second;
}

void LockerService::check_policy(const AccessTree& tree) const {
  for (const auto id : tree.leaves()) {
    const auto& label = tree.node(id).attribute;
    const auto it = state_.issuers.find(label.authority);
    if (it == state_.issuers.end()) {
      throw Error(ErrorCode::unknown_issuer, "policy names unregistered issuer '" + label.authority + "'");
    }
    if (!it->second.catalog.empty() && !it->second.catalog.contains(label.name)) {
      throw Error(ErrorCode::unknown_attribute, label.canonical() + " is not in the issuer's catalog");
    }
  }
}

TokenResult LockerService::prepare_token_locked(const std::string& issuer_id, const std::string& subscriber_id,
                                                const AccessTree& issuer_policy,
                                                const AccessTree& subscriber_policy) {
  const auto& auth = authority();
  if (!state_.issuers.contains(issuer_id)) throw Error(ErrorCode::unknown_issuer, "unknown issuer '" + issuer_id + "'");
  if (!state_.registry.contains(subscriber_id)) {
    throw Error(ErrorCode::unknown_identity, "unknown subscriber '" + subscriber_id + "'");
  }
  check_policy(subscriber_policy);
  check_policy(issuer_policy);

  TokenKey key{subscriber_id, issuer_id, policy_hash(subscriber_policy, issuer_policy)};
  if (const auto it = state_.tokens.find(key); it != state_.tokens.end()) {
    ++state_.counters.token_cache_hits;
    return {key, it->second, true};
  }
  auto sub = abe::gen_partial_token<Group>(auth.public_key, subscriber_policy, *rng_);
  auto iss = abe::gen_partial_token<Group>(auth.public_key, issuer_policy, *rng_);
  auto token = abe::combine_tokens(sub, iss);
  ++state_.counters.token_handshakes;
  tick();
  state_.tokens.emplace(key, token);
  return {key, std::move(token), false};
}

TokenResult LockerService::prepare_token(const std::string& issuer_id, const std::string& subscriber_id,
                                         const AccessTree& issuer_policy, const AccessTree& subscriber_policy) {
  std::lock_guard lock(mu_);
  return prepare_token_locked(issuer_id, subscriber_id, issuer_policy, subscriber_policy);
}

IssueResult LockerService::issue_priv_document(const std::string& issuer_id, const std::string& subscriber_id,
                                               const AccessTree& issuer_policy,
                                               const AccessTree& subscriber_policy, ByteView document) {
  std::lock_guard lock(mu_);
  if (document.empty()) throw Error(ErrorCode::invalid_argument, "document must be non-empty");
  auto token = prepare_token_locked(issuer_id, subscriber_id, issuer_policy, subscriber_policy);
  auto ct = abe::encrypt_with_token<Group>(authority().public_key, token.token, document, *rng_);

  DocumentUri uri{issuer_id, std::string(kPrivDocType), {}};
  do {
    uri.doc_id = to_hex(rng_->bytes(16));
  } while (state_.documents.contains(uri));

  EDocument doc{uri, subscriber_id, std::move(ct), {}, tick()};
  doc.issuer_signature = auth_->sign(issuer_id, signing_payload(uri, doc.ciphertext));
  state_.documents.emplace(uri, std::move(doc));
  return {uri, token.cache_hit};
}

KeyGenResult LockerService::gen_ab_pvt_key(const std::string& identity, const IssuerSet& issuer_set) {
  std::lock_guard lock(mu_);
  const auto& auth = authority();
  const auto reg = state_.registry.find(identity);
  if (reg == state_.registry.end()) throw Error(ErrorCode::unknown_identity, "unknown identity '" + identity + "'");
  if (issuer_set.empty()) throw Error(ErrorCode::invalid_argument, "issuer set must be non-empty");
  for (const auto& id : issuer_set) {
    if (!state_.issuers.contains(id)) throw Error(ErrorCode::unknown_issuer, "unknown issuer '" + id + "'");
  }

  AttributeSet attrs;
  for (const auto& [label, _] : reg->second) {
    if (issuer_set.contains(label.authority)) attrs.insert(label);
  }
  for (const auto& id : issuer_set) {
    const bool has = std::any_of(attrs.begin(), attrs.end(), [&](const auto& l) { return l.authority == id; });
    if (!has) {
      throw Error(ErrorCode::missing_issuer_attributes, identity + " holds no attributes from issuer '" + id + "'");
    }
  }

  for (const auto& [handle, _] : state_.keys) {
    if (handle.identity == identity && handle.issuer_set != issuer_set && is_subset(issuer_set, handle.issuer_set)) {
      return {handle, {}, true};
    }
  }

  KeyGenResult result{{identity, issuer_set}, {}, false};
  auto key = abe::keygen<Group>(auth.secret, auth.public_key, identity, attrs, *rng_);
  for (auto it = state_.keys.begin(); it != state_.keys.end();) {
    const auto& h = it->first;
    if (h.identity == identity && h.issuer_set != issuer_set && is_subset(h.issuer_set, issuer_set)) {
      result.evicted.push_back(h);
      it = state_.keys.erase(it);
    } else {
      ++it;
    }
  }
  state_.keys.insert_or_assign(result.handle, StoredKey{std::move(key), tick()});
  return result;
}

std::vector<KeyHandle> LockerService::keys(const std::string& identity) const {
  std::lock_guard lock(mu_);
  std::vector<KeyHandle> out;
  for (const auto& [handle, _] : state_.keys) {
    if (handle.identity == identity) out.push_back(handle);
  }
  return out;
}

abe::AttributeKey<Group> LockerService::export_key(const KeyHandle& handle) const {
  std::lock_guard lock(mu_);
  const auto it = state_.keys.find(handle);
  if (it == state_.keys.end()) throw Error(ErrorCode::no_covering_key, "no stored key " + handle.render());
  return it->second.key;
}

std::optional<KeyHandle> LockerService::select_key_locked(const std::string& requester_id,
                                                          const IssuerSet& needed) const {
  std::optional<KeyHandle> best;
  for (const auto& [handle, _] : state_.keys) {
    if (handle.identity != requester_id || !is_subset(needed, handle.issuer_set)) continue;
    if (!best || handle.issuer_set.size() < best->issuer_set.size()) best = handle;
  }
  return best;
}

std::optional<KeyHandle> LockerService::select_key(const std::string& requester_id, const IssuerSet& needed) const {
  std::lock_guard lock(mu_);
  return select_key_locked(requester_id, needed);
}

Bytes LockerService::fetch_priv_doc(const std::string& requester_id, const DocumentUri& uri) const {
  std::lock_guard lock(mu_);
  authority();
  if (!uri.is_private()) {
    throw Error(ErrorCode::wrong_doctype, "doctype '" + uri.doc_type + "' is not " + std::string(kPrivDocType));
  }
  const auto it = state_.documents.find(uri);
  if (it == state_.documents.end()) throw Error(ErrorCode::unknown_uri, "no document " + uri.render());
  const auto& doc = it->second;
  if (!auth_->verify(uri.issuer_id, signing_payload(uri, doc.ciphertext), doc.issuer_signature)) {
    throw Error(ErrorCode::authentication_failed, "issuer signature rejected for " + uri.render());
  }
  const auto needed = doc.ciphertext.tree.authorities();
  const auto handle = select_key_locked(requester_id, needed);
  if (!handle) throw Error(ErrorCode::no_covering_key, requester_id + " has no key covering the document's issuers");
  return abe::decrypt(doc.ciphertext, state_.keys.at(*handle).key);
}

EDocument LockerService::document(const DocumentUri& uri) const {
  std::lock_guard lock(mu_);
  const auto it = state_.documents.find(uri);
  if (it == state_.documents.end()) throw Error(ErrorCode::unknown_uri, "no document " + uri.render());
  return it->second;
}

std::vector<DocumentUri> LockerService::documents() const {
  std::lock_guard lock(mu_);
  std::vector<DocumentUri> out;
  for (const auto& [uri, _] : state_.documents) out.push_back(uri);
  return out;
}

Bytes LockerService::pull_doc(const DocumentUri&) const {
  throw Error(ErrorCode::not_implemented, "plain document retrieval is not supported");
}

std::vector<DocumentUri> LockerService::pull_uri(const std::string&) const {
  throw Error(ErrorCode::not_implemented, "plain document listing is not supported");
}

Counters LockerService::counters() const {
  std::lock_guard lock(mu_);
  return state_.counters;
}

std::uint64_t LockerService::clock() const {
  std::lock_guard lock(mu_);
  return state_.clock;
}

Bytes LockerService::encode_state(const State& s, StoreTag tag) {
  ByteWriter w;
  switch (tag) {
    case StoreTag::authority:
      w.put_u8(s.authority ? 1 : 0);
      if (s.authority) {
        w.put_blob(abe::encode(s.authority->secret));
        w.put_blob(abe::encode(s.authority->public_key));
      }
      w.put_u64(s.clock);
      w.put_u64(s.counters.token_handshakes);
      w.put_u64(s.counters.token_cache_hits);
      break;
    case StoreTag::issuers:
      w.put_u32(static_cast<std::uint32_t>(s.issuers.size()));
      for (const auto& [id, rec] : s.issuers) {
        w.put_string(id);
        w.put_u64(rec.registered_at);
        put_issuer_set(w, rec.catalog);
      }
      break;
    case StoreTag::attributes:
      w.put_u32(static_cast<std::uint32_t>(s.registry.size()));
      for (const auto& [identity, view] : s.registry) {
        w.put_string(identity);
        w.put_u32(static_cast<std::uint32_t>(view.size()));
        for (const auto& [label, entry] : view) {
          w.put_string(label.canonical());
          w.put_string(entry.source_issuer);
          w.put_u64(entry.updated_at);
        }
      }
      break;
    case StoreTag::tokens:
      w.put_u32(static_cast<std::uint32_t>(s.tokens.size()));
      for (const auto& [key, token] : s.tokens) {
        w.put_string(key.subscriber);
        w.put_string(key.issuer);
        w.put_string(key.policy_hash);
        w.put_blob(abe::encode(token));
      }
      break;
    case StoreTag::documents:
      w.put_u32(static_cast<std::uint32_t>(s.documents.size()));
      for (const auto& [uri, doc] : s.documents) {
        w.put_string(uri.render());
        w.put_string(doc.owner);
        w.put_blob(abe::encode(doc.ciphertext));
        w.put_blob(doc.issuer_signature);
        w.put_u64(doc.created_at);
      }
      break;
    case StoreTag::keys:
      w.put_u32(static_cast<std::uint32_t>(s.keys.size()));
      for (const auto& [handle, stored] : s.keys) {
        w.put_string(handle.identity);
        put_issuer_set(w, handle.issuer_set);
        w.put_blob(abe::encode(stored.key));
        w.put_u64(stored.created_at);
      }
      break;
  }
  return w.take();
}

void LockerService::decode_state(State& s, StoreTag tag, ByteView payload) {
  ByteReader r(payload);
  switch (tag) {
    case StoreTag::authority:
      if (r.get_u8() != 0) {
        auto msk = abe::decode_master_secret_key<Group>(r.get_blob());
        auto mpk = abe::decode_master_public_key<Group>(r.get_blob());
        s.authority = Authority{std::move(msk), std::move(mpk)};
      }
      s.clock = r.get_u64();
      s.counters.token_handshakes = r.get_u64();
      s.counters.token_cache_hits = r.get_u64();
      break;
    case StoreTag::issuers:
      for (auto n = r.get_u32(); n > 0; --n) {
        IssuerRecord rec;
        rec.id = r.get_string();
        rec.registered_at = r.get_u64();
        rec.catalog = get_issuer_set(r);
        s.issuers.emplace(rec.id, std::move(rec));
      }
      break;
    case StoreTag::attributes:
      for (auto n = r.get_u32(); n > 0; --n) {
        auto& view = s.registry[r.get_string()];
        for (auto m = r.get_u32(); m > 0; --m) {
          auto label = AttributeLabel::parse(r.get_string());
          AttributeEntry entry;
          entry.source_issuer = r.get_string();
          entry.updated_at = r.get_u64();
          view.insert_or_assign(std::move(label), std::move(entry));
        }
      }
      break;
    case StoreTag::tokens:
      for (auto n = r.get_u32(); n > 0; --n) {
        TokenKey key;
        key.subscriber = r.get_string();
        key.issuer = r.get_string();
        key.policy_hash = r.get_string();
        s.tokens.insert_or_assign(std::move(key), abe::decode_combined_token<Group>(r.get_blob()));
      }
      break;
    case StoreTag::documents:
      for (auto n = r.get_u32(); n > 0; --n) {
        auto uri = DocumentUri::parse(r.get_string());
        auto owner = r.get_string();
        auto ct = abe::decode_ciphertext<Group>(r.get_blob());
        const auto sig = r.get_blob();
        const auto created = r.get_u64();
        s.documents.insert_or_assign(uri, EDocument{uri, std::move(owner), std::move(ct), Bytes(sig.begin(), sig.end()),
                                                    created});
      }
      break;
    case StoreTag::keys:
      for (auto n = r.get_u32(); n > 0; --n) {
        KeyHandle handle;
        handle.identity = r.get_string();
        handle.issuer_set = get_issuer_set(r);
        auto key = abe::decode_attribute_key<Group>(r.get_blob());
        const auto created = r.get_u64();
        s.keys.insert_or_assign(std::move(handle), StoredKey{std::move(key), created});
      }
      break;
  }
  r.expect_end();
}

bool LockerService::store_exists(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / store_file_name(StoreTag::authority));
}

void LockerService::save(const std::filesystem::path& dir) const {
  std::lock_guard lock(mu_);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create store directory " + dir.string() + ": " + ec.message());
  for (const auto tag : kAllTags) {
    auto tmp = dir / store_file_name(tag);
    tmp += ".tmp";
    write_file(tmp, wrap_store_file(tag, encode_state(state_, tag)));
  }
  for (const auto tag : kAllTags) {
    const auto final_path = dir / store_file_name(tag);
    auto tmp = final_path;
    tmp += ".tmp";
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot replace " + final_path.string() + ": " + ec.message());
  }
}

void LockerService::load(const std::filesystem::path& dir) {
  State fresh;
  for (const auto tag : kAllTags) {
    const auto path = dir / store_file_name(tag);
    const auto payload = unwrap_store_file(tag, read_file(path));
    try {
      decode_state(fresh, tag, payload);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::version_mismatch) throw;
      throw Error(ErrorCode::malformed_encoding, path.filename().string() + ": " + e.what());
    }
  }
  std::lock_guard lock(mu_);
  state_ = std::move(fresh);
}

}  // namespace privlocker::locker
