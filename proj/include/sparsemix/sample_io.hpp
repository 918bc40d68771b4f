#pragma once

// Plain-text sample files.
//
// Labeled format: a header line "d n K", then n lines each holding d
// coordinates followed by the 1-based true label. Unlabeled input is a
// headerless table, one observation per line, whitespace or comma separated.
// Blank lines and lines starting with '#' are skipped in both.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsemix/model.hpp"
#include "sparsemix/simulation.hpp"

namespace sparsemix {

/// Malformed or unreadable input; line() is 1-based, 0 when not tied to a line.
class InputError : public std::runtime_error {
 public:
  InputError(std::string message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct LoadedSample {
  Matrix points;            // d x n
  std::vector<int> labels;  // 0-based; empty for headerless tables
  int num_components = 0;   // from the header, 0 for headerless tables
};

void write_labeled_sample(std::ostream& out, const LabeledSample& sample, int num_components);
void write_labeled_sample(const std::string& path, const LabeledSample& sample, int num_components);

/// Detects the format from the first data line: three integers whose count
/// of following lines matches n are taken as a header.
LoadedSample read_sample(std::istream& in);
LoadedSample read_sample(const std::string& path);

}  // namespace sparsemix
