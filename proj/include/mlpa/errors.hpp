#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlpa {

/// Malformed input file. `line` is 1-based, 0 when not line-specific.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& source, std::size_t line,
              const std::string& message)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : "") +
                           ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// NaN or infinity produced while updating a document's variational state.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& doc_id, const std::string& where)
      : std::runtime_error("numerical failure in " + where + " for document '" +
                           doc_id + "'"),
        doc_id_(doc_id) {}

  const std::string& doc_id() const { return doc_id_; }

 private:
  std::string doc_id_;
};

}  // namespace mlpa
