#pragma once

#include <stdexcept>
#include <string>

namespace adaptids {

enum class errc {
  config,
  shape,
  divergence,
  evaluation,
  ingestion,
  io,
  balance,
  selection,
  spec,
  ratio,
  prune,
  catalog,
  usage,
};

constexpr const char* errc_name(errc k) noexcept {
  switch (k) {
    case errc::config: return "config error";
    case errc::shape: return "shape error";
    case errc::divergence: return "divergence error";
    case errc::evaluation: return "evaluation error";
    case errc::ingestion: return "ingestion error";
    case errc::io: return "io error";
    case errc::balance: return "balance error";
    case errc::selection: return "selection error";
    case errc::spec: return "spec error";
    case errc::ratio: return "ratio error";
    case errc::prune: return "prune error";
    case errc::catalog: return "catalog error";
    case errc::usage: return "usage error";
  }
  return "error";
}

// single exception type carrying a kind tag; the CLI maps kinds to exit codes
class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& msg)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + msg), kind_(kind) {}
  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& msg) { throw error(kind, msg); }

}  // namespace adaptids
