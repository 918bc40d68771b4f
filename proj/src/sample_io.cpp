#include "sparsemix/sample_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sparsemix {

namespace {

struct Row {
  int line;
  std::vector<std::string> tokens;
};

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    auto tokens = split(text);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    rows.push_back({line, std::move(tokens)});
  }
  if (in.bad()) throw InputError("read error", line);
  return rows;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw InputError("not a finite number: '" + tok + "'", line);
  return v;
}

bool parse_positive_int(const std::string& tok, int& v) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  return ec == std::errc() && ptr == end && v > 0;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

LoadedSample parse_labeled(const std::vector<Row>& rows, int d, int n, int K) {
  LoadedSample s;
  s.num_components = K;
  s.points.resize(d, n);
  s.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i) + 1];
    if (static_cast<int>(r.tokens.size()) != d + 1)
      throw InputError("expected " + std::to_string(d + 1) + " fields, found " +
                           std::to_string(r.tokens.size()),
                       r.line);
    for (int j = 0; j < d; ++j) s.points(j, i) = parse_double(r.tokens[static_cast<std::size_t>(j)], r.line);
    int label = 0;
    if (!parse_positive_int(r.tokens.back(), label) || label > K)
      throw InputError("label must be an integer in 1.." + std::to_string(K), r.line);
    s.labels[static_cast<std::size_t>(i)] = label - 1;
  }
  return s;
}

LoadedSample parse_table(const std::vector<Row>& rows) {
  const auto d = rows.front().tokens.size();
  LoadedSample s;
  s.points.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (r.tokens.size() != d)
      throw InputError("expected " + std::to_string(d) + " fields, found " +
                           std::to_string(r.tokens.size()),
                       r.line);
    for (std::size_t j = 0; j < d; ++j)
      s.points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = parse_double(r.tokens[j], r.line);
  }
  return s;
}

}  // namespace

void write_labeled_sample(std::ostream& out, const LabeledSample& sample, int num_components) {
  const auto d = sample.points.rows();
  const auto n = sample.points.cols();
  if (static_cast<Eigen::Index>(sample.labels.size()) != n)
    throw std::invalid_argument("one label per point required");
  std::string text = std::to_string(d) + ' ' + std::to_string(n) + ' ' +
                     std::to_string(num_components) + '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      append_double(text, sample.points(j, i));
      text.push_back(' ');
    }
    text += std::to_string(sample.labels[static_cast<std::size_t>(i)] + 1);
    text.push_back('\n');
  }
  out << text;
}

void write_labeled_sample(const std::string& path, const LabeledSample& sample, int num_components) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing", 0);
  write_labeled_sample(out, sample, num_components);
  if (!out) throw InputError("write to '" + path + "' failed", 0);
}

LoadedSample read_sample(std::istream& in) {
  const std::vector<Row> rows = read_rows(in);
  if (rows.empty()) throw InputError("no data", 0);
  const Row& first = rows.front();
  int d = 0, n = 0, K = 0;
  const bool header = first.tokens.size() == 3 && parse_positive_int(first.tokens[0], d) &&
                      parse_positive_int(first.tokens[1], n) &&
                      parse_positive_int(first.tokens[2], K) && rows.size() > 1 &&
                      rows[1].tokens.size() == static_cast<std::size_t>(d) + 1;
  if (!header) return parse_table(rows);
  if (rows.size() != static_cast<std::size_t>(n) + 1) {
    const int line = rows.size() > static_cast<std::size_t>(n) + 1
                         ? rows[static_cast<std::size_t>(n) + 1].line
                         : rows.back().line;
    throw InputError("header declares " + std::to_string(n) + " observations, found " +
                         std::to_string(rows.size() - 1),
                     line);
  }
  return parse_labeled(rows, d, n, K);
}

LoadedSample read_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'", 0);
  return read_sample(in);
}

}  // namespace sparsemix
