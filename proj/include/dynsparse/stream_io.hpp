#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dynsparse/bank.hpp"

namespace dynsparse {

class StreamFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StreamHeader {
  Vertex vertices = 0;
  std::uint64_t max_weight = 0;  // 0: unweighted stream
};

/// Forward-only reader for the text stream format:
///   n <N> [w <W>]
///   + u v [w]
///   - u v [w]
/// Blank lines and anything after '#' are ignored. Every line is read exactly once.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in) : in_(in) { read_header(); }

  const StreamHeader& header() const { return header_; }
  std::uint64_t line_number() const { return line_; }

  std::optional<EdgeUpdate> next() {
    std::string text;
    while (next_line(text)) {
      std::istringstream ls(text);
      std::string op;
      ls >> op;
      if (op != "+" && op != "-") fail("expected '+' or '-'");
      long long u = -1;
      long long v = -1;
      if (!(ls >> u >> v)) fail("expected two endpoints");
      if (u < 0 || v < 0 || u >= header_.vertices || v >= header_.vertices) fail("endpoint out of range");
      if (u == v) fail("self loop");
      EdgeUpdate upd{static_cast<Vertex>(u), static_cast<Vertex>(v), op == "+" ? 1 : -1, 1};
      long long w = 0;
      if (ls >> w) {
        if (header_.max_weight == 0) fail("weight given in an unweighted stream");
        if (w < 1) fail("weight must be at least 1");
        upd.weight = static_cast<std::uint64_t>(w);
      } else if (!ls.eof()) {
        fail("malformed weight");
      }
      std::string extra;
      if (ls.clear(), ls >> extra) fail("trailing token '" + extra + "'");
      return upd;
    }
    return std::nullopt;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw StreamFormatError("line " + std::to_string(line_) + ": " + what);
  }

  bool next_line(std::string& out) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      out = raw;
      return true;
    }
    return false;
  }

  void read_header() {
    std::string text;
    if (!next_line(text)) fail("missing header 'n <N>'");
    std::istringstream ls(text);
    std::string key;
    long long n = 0;
    if (!(ls >> key >> n) || key != "n") fail("header must start with 'n <N>'");
    if (n < 2 || n > 0xffffffffLL) fail("vertex count out of range");
    header_.vertices = static_cast<Vertex>(n);
    if (ls >> key) {
      long long w = 0;
      if (key != "w" || !(ls >> w) || w < 1) fail("header weight must be 'w <W>' with W >= 1");
      header_.max_weight = static_cast<std::uint64_t>(w);
    }
    std::string extra;
    if (ls >> extra) fail("trailing token in header");
  }

  std::istream& in_;
  StreamHeader header_;
  std::uint64_t line_ = 0;
};

}  // namespace dynsparse
