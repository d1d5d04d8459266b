#include "ncsos/sdp.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ncsos/detail/sdp_impl.hpp"

namespace ncsos {

template class SparseSymMatrix<double>;
template struct SDPProblem<double>;
template SDPProblem<double> translate(const SDPProblem<double>&);
template int drop_dependent_constraints(SDPProblem<double>&, double, std::vector<int>*);
template BlockMatrix<double> affine_combination(const SDPProblem<double>&, const Vector<double>&, bool);
template SDPSolution<double> solve(const SDPProblem<double>&, const SolverOptions&);

std::string_view to_string(SdpForm form) { return form == SdpForm::standard ? "standard" : "inequality"; }

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iterations:
      return "max_iterations";
    case SolveStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

void SolverOptions::set(std::string_view key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string_view::npos) throw Error("solver option must be key=value: " + std::string(key_value));
  const std::string key(key_value.substr(0, eq));
  const std::string value(key_value.substr(eq + 1));
  try {
    std::size_t used = 0;
    if (key == "tol") {
      tol = std::stod(value, &used);
      if (tol <= 0) throw Error("tol must be positive");
    } else if (key == "max_iter") {
      max_iter = std::stoi(value, &used);
      if (max_iter < 0) throw Error("max_iter must be nonnegative");
    } else if (key == "step_frac") {
      step_frac = std::stod(value, &used);
      if (step_frac <= 0 || step_frac >= 1) throw Error("step_frac must lie in (0, 1)");
    } else if (key == "verbose") {
      verbose = value == "1" || value == "true";
      used = value.size();
    } else {
      throw Error("unknown solver option: " + key);
    }
    if (used != value.size()) throw Error("bad value for " + key + ": " + value);
  } catch (const std::logic_error&) {
    throw Error("bad value for " + key + ": " + value);
  }
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string write_sdpa(const SDPProblem<double>& p) {
  p.validate();
  std::ostringstream out;
  out << p.num_constraints() << "\n" << p.block_sizes.size() << "\n";
  for (std::size_t k = 0; k < p.block_sizes.size(); ++k) out << (k ? " " : "") << p.block_sizes[k];
  out << "\n";
  for (int k = 0; k < p.num_constraints(); ++k) out << (k ? " " : "") << fmt(p.b[k]);
  out << "\n";
  auto emit = [&out](int mat, const SparseSymMatrix<double>& m, double sign) {
    SparseSymMatrix<double> copy = m;
    copy.compress();
    for (const auto& e : copy.entries())
      out << mat << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << fmt(sign * e.value) << "\n";
  };
  emit(0, p.c, -1.0);
  for (int k = 0; k < p.num_constraints(); ++k) emit(k + 1, p.a[k], 1.0);
  return out.str();
}

void export_sdpa(const SDPProblem<double>& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << write_sdpa(p);
  if (!f) throw Error("failed writing " + path);
}

SDPProblem<double> read_sdpa(std::string_view text) {
  // Header values may be separated by spaces, commas or braces; comment lines
  // start with '"' or '*'.
  std::vector<std::pair<int, std::string>> lines;
  {
    int no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos, end - pos));
      ++no;
      pos = end + 1;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '"' || line[first] == '*') {
        if (end == text.size()) break;
        continue;
      }
      for (char& ch : line)
        if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == '\r') ch = ' ';
      lines.emplace_back(no, line);
      if (end == text.size()) break;
    }
  }
  // Header lines may carry trailing text such as "=mdim"; `limit` stops there.
  auto numbers = [](const std::string& line, int line_no, std::size_t limit = SIZE_MAX) {
    std::vector<double> out;
    std::istringstream in(line);
    std::string tok;
    while (out.size() < limit && in >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw ParseError(line_no, "not a number: " + tok);
      }
    }
    return out;
  };
  auto as_int = [](double v, int line_no) {
    if (v != std::floor(v)) throw ParseError(line_no, "expected an integer");
    return static_cast<int>(v);
  };

  if (lines.size() < 4) throw ParseError(lines.empty() ? 1 : lines.back().first, "SDPA header is incomplete");
  SDPProblem<double> p;
  p.form = SdpForm::inequality;
  auto head = numbers(lines[0].second, lines[0].first, 1);
  if (head.empty()) throw ParseError(lines[0].first, "missing constraint count");
  const int m = as_int(head[0], lines[0].first);
  head = numbers(lines[1].second, lines[1].first, 1);
  if (head.empty()) throw ParseError(lines[1].first, "missing block count");
  const int nblocks = as_int(head[0], lines[1].first);
  if (m < 0 || nblocks <= 0) throw ParseError(lines[0].first, "bad SDPA dimensions");
  const auto sizes = numbers(lines[2].second, lines[2].first, static_cast<std::size_t>(nblocks));
  if (static_cast<int>(sizes.size()) < nblocks) throw ParseError(lines[2].first, "too few block sizes");
  for (int k = 0; k < nblocks; ++k) p.block_sizes.push_back(as_int(sizes[k], lines[2].first));

  // The cost vector may wrap onto several lines.
  std::size_t li = 3;
  std::vector<double> costs;
  while (static_cast<int>(costs.size()) < m) {
    if (li >= lines.size()) throw ParseError(lines.back().first, "too few cost entries");
    const auto more = numbers(lines[li].second, lines[li].first);
    costs.insert(costs.end(), more.begin(), more.end());
    ++li;
  }
  if (static_cast<int>(costs.size()) != m) throw ParseError(lines[li - 1].first, "too many cost entries");
  p.b = Eigen::Map<const Eigen::VectorXd>(costs.data(), m);
  p.a.resize(m);

  for (; li < lines.size(); ++li) {
    const int no = lines[li].first;
    const auto v = numbers(lines[li].second, no);
    if (v.size() != 5) throw ParseError(no, "expected: matrix block row col value");
    const int mat = as_int(v[0], no), blk = as_int(v[1], no) - 1;
    int row = as_int(v[2], no) - 1, col = as_int(v[3], no) - 1;
    if (mat < 0 || mat > m) throw ParseError(no, "matrix index out of range");
    if (blk < 0 || blk >= nblocks) throw ParseError(no, "block index out of range");
    const int n = std::abs(p.block_sizes[blk]);
    if (row < 0 || col < 0 || row >= n || col >= n) throw ParseError(no, "entry outside its block");
    if (p.block_sizes[blk] < 0 && row != col) throw ParseError(no, "off-diagonal entry in a diagonal block");
    if (mat == 0)
      p.c.add(blk, row, col, -v[4]);
    else
      p.a[mat - 1].add(blk, row, col, v[4]);
  }
  p.c.compress();
  for (auto& ak : p.a) ak.compress();
  return p;
}

SDPProblem<double> import_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return read_sdpa(buf.str());
}

}  // namespace ncsos
