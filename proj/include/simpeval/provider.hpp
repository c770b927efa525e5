#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "simpeval/embed.hpp"
#include "simpeval/error.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

struct FileSource {
  std::string path;  // directory holding <key>.json embedding files
};
struct HttpSource {
  std::string endpoint;  // base URL; requests go to {endpoint}/embed
};
struct DeterministicSource {
  uint64_t seed = 0;
  std::size_t dimension = 0;
};

struct ProviderSpec {
  std::variant<FileSource, HttpSource, DeterministicSource> kind;
  std::chrono::milliseconds timeout{10000};
};

/// Parses `file:PATH`, `http:URL` (or a bare http:// URL) and `det:SEED,DIM`.
inline ProviderSpec parse_provider_spec(std::string_view text) {
  ProviderSpec spec;
  auto fail = [&](const std::string& why) -> ProviderSpec {
    throw Error(ErrorCode::InvalidArgument, "provider spec '" + std::string(text) + "': " + why);
  };
  if (text.starts_with("http://")) {
    spec.kind = HttpSource{std::string(text)};
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return fail("expected file:, http: or det: prefix");
  const auto kind = text.substr(0, colon);
  const auto rest = std::string(text.substr(colon + 1));
  if (kind == "file") {
    if (rest.empty()) return fail("missing path");
    if (!std::filesystem::exists(rest)) return fail("path does not exist");
    spec.kind = FileSource{rest};
  } else if (kind == "http") {
    if (rest.empty()) return fail("missing URL");
    spec.kind = HttpSource{rest.starts_with("http://") ? rest : "http://" + rest};
  } else if (kind == "det") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) return fail("expected det:SEED,DIM");
    try {
      std::size_t used = 0;
      DeterministicSource det;
      det.seed = std::stoull(rest.substr(0, comma), &used);
      if (used != comma) return fail("bad seed");
      const auto dim_text = rest.substr(comma + 1);
      det.dimension = std::stoull(dim_text, &used);
      if (used != dim_text.size()) return fail("bad dimension");
      if (det.dimension == 0) return fail("dimension must be >= 1");
      spec.kind = det;
    } catch (const std::logic_error&) {
      return fail("expected det:SEED,DIM");
    }
  } else {
    return fail("unknown provider kind");
  }
  return spec;
}

namespace detail {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string base_path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "bad URL " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  out.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  return out;
}

}  // namespace detail

/// POST {endpoint}/embed with {"tokens": [...]}; expects 200 and
/// {"dimension": d, "vectors": [...]}. Transport failures and 5xx responses
/// are retried once.
inline EmbeddingMatrix fetch_embeddings_http(const ProviderSpec& spec, const TokenSequence& tokens) {
  const auto* http = std::get_if<HttpSource>(&spec.kind);
  if (!http) throw Error(ErrorCode::InvalidArgument, "provider is not an HTTP endpoint");
  const auto url = detail::split_url(http->endpoint);

  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(spec.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(spec.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const std::string body = nlohmann::json{{"tokens", tokens.normalized()}}.dump();
  const std::string path = url.base_path + "/embed";

  httplib::Result res;
  for (int attempt = 0; attempt < 2; ++attempt) {
    res = client.Post(path, body, "application/json");
    if (res && res->status < 500) break;
  }
  if (!res) {
    throw Error(ErrorCode::Timeout, http->endpoint + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    std::string message = "HTTP " + std::to_string(res->status);
    const auto err = nlohmann::json::parse(res->body, nullptr, false);
    if (err.is_object() && err.contains("error") && err["error"].is_string()) {
      message += ": " + err["error"].get<std::string>();
    }
    throw Error(ErrorCode::ProtocolError, message);
  }
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ProtocolError, "response body is not JSON");
  return parse_embedding_json(doc, tokens.size(), ErrorCode::ProtocolError);
}

/// Source of per-token embeddings. `key` names the text being embedded
/// (e.g. "pv-sandmann.hypothesis"); only file-backed providers use it.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingMatrix embed(std::string_view key, const TokenSequence& tokens) const = 0;
};

class FileProvider final : public EmbeddingProvider {
 public:
  explicit FileProvider(std::string directory) : dir_(std::move(directory)) {}
  EmbeddingMatrix embed(std::string_view key, const TokenSequence& tokens) const override {
    return load_embeddings_file((std::filesystem::path(dir_) / (std::string(key) + ".json")).string(),
                                tokens);
  }

 private:
  std::string dir_;
};

class HttpProvider final : public EmbeddingProvider {
 public:
  explicit HttpProvider(ProviderSpec spec) : spec_(std::move(spec)) {}
  EmbeddingMatrix embed(std::string_view, const TokenSequence& tokens) const override {
    return fetch_embeddings_http(spec_, tokens);
  }

 private:
  ProviderSpec spec_;
};

class DeterministicProvider final : public EmbeddingProvider {
 public:
  DeterministicProvider(uint64_t seed, std::size_t dimension) : seed_(seed), dim_(dimension) {}
  EmbeddingMatrix embed(std::string_view, const TokenSequence& tokens) const override {
    return deterministic_embeddings(seed_, dim_, tokens);
  }

 private:
  uint64_t seed_;
  std::size_t dim_;
};

inline std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  if (const auto* f = std::get_if<FileSource>(&spec.kind)) return std::make_unique<FileProvider>(f->path);
  if (const auto* d = std::get_if<DeterministicSource>(&spec.kind)) {
    return std::make_unique<DeterministicProvider>(d->seed, d->dimension);
  }
  return std::make_unique<HttpProvider>(spec);
}

}  // namespace simpeval
