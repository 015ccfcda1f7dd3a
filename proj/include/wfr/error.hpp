#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wfr {

enum class Errc {
  // protocol
  duplicate_claim,
  unknown_aspect,
  unknown_claim,
  missing_claim,
  empty_keyword_list,
  duplicate_keyword,
  // ingestion
  network_error,
  parse_error,
  mixed_stations,
  // segmentation
  backend_error,
  no_coverage,
  // claims / metrics
  schema_error,
  length_mismatch,
  unknown_key,
  // augmentation / preference
  missing_corpus,
  missing_embedder,
  empty_day,
  // prompting
  wrong_arity,
  malformed_ranking,
  no_markers,
  // gateway
  auth_error,
  rate_limited,
  transport_error,
  oversize_request,
  all_failed,
  // general
  precondition,
  io_error,
  config_error,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::duplicate_claim: return "duplicate_claim";
    case Errc::unknown_aspect: return "unknown_aspect";
    case Errc::unknown_claim: return "unknown_claim";
    case Errc::missing_claim: return "missing_claim";
    case Errc::empty_keyword_list: return "empty_keyword_list";
    case Errc::duplicate_keyword: return "duplicate_keyword";
    case Errc::network_error: return "network_error";
    case Errc::parse_error: return "parse_error";
    case Errc::mixed_stations: return "mixed_stations";
    case Errc::backend_error: return "backend_error";
    case Errc::no_coverage: return "no_coverage";
    case Errc::schema_error: return "schema_error";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::unknown_key: return "unknown_key";
    case Errc::missing_corpus: return "missing_corpus";
    case Errc::missing_embedder: return "missing_embedder";
    case Errc::empty_day: return "empty_day";
    case Errc::wrong_arity: return "wrong_arity";
    case Errc::malformed_ranking: return "malformed_ranking";
    case Errc::no_markers: return "no_markers";
    case Errc::auth_error: return "auth_error";
    case Errc::rate_limited: return "rate_limited";
    case Errc::transport_error: return "transport_error";
    case Errc::oversize_request: return "oversize_request";
    case Errc::all_failed: return "all_failed";
    case Errc::precondition: return "precondition";
    case Errc::io_error: return "io_error";
    case Errc::config_error: return "config_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, Errc code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace wfr
