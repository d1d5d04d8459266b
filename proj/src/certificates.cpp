#include "ncsos/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ncsos {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Square> squares_of(const Matrix<double>& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(gram);
  if (eig.info() != Eigen::Success) throw CertificateError("eigendecomposition of the Gram matrix failed");
  std::vector<Square> out;
  if (gram.rows() == 0) return out;
  // Eigenvalues at rounding level are noise from the decomposition itself.
  const double floor = 1e-14 * std::max(1.0, eig.eigenvalues().maxCoeff());
  // Largest weight first.
  for (Eigen::Index k = gram.rows() - 1; k >= 0; --k) {
    const double lambda = eig.eigenvalues()[k];
    if (lambda < -kClipTolerance)
      throw CertificateError("Gram matrix has eigenvalue " + fmt(lambda) + " below -" + fmt(kClipTolerance));
    if (lambda <= floor) continue;
    const Eigen::VectorXd v = eig.eigenvectors().col(k);
    out.push_back({lambda, std::vector<double>(v.data(), v.data() + v.size())});
  }
  return out;
}

/// sym(L (sum_a X_s^a - I) R)
NCPolynomial completeness_polynomial(const Multiplier& m, const std::shared_ptr<const Schema>& schema) {
  NCPolynomial p(schema);
  const auto& l = m.left.word();
  const auto& r = m.right.word();
  auto add = [&](std::vector<Generator> word, double c) {
    const Monomial w = reduce(word, *schema);
    p.add_term(w, 0.5 * c);
    p.add_term(adjoint(w, *schema), 0.5 * c);
  };
  if (m.party < 0 || m.party >= schema->num_parties() || m.setting < 0 || m.setting >= schema->num_settings(m.party))
    throw SchemaError("completeness multiplier refers to a missing setting");
  for (int a = 0; a < schema->num_outcomes(m.party, m.setting); ++a) {
    std::vector<Generator> w(l);
    w.push_back({static_cast<std::uint16_t>(m.party), static_cast<std::uint16_t>(m.setting),
                 static_cast<std::uint16_t>(a)});
    w.insert(w.end(), r.begin(), r.end());
    add(std::move(w), 1.0);
  }
  std::vector<Generator> w(l);
  w.insert(w.end(), r.begin(), r.end());
  add(std::move(w), -1.0);
  return p;
}

NCPolynomial residual_against(const Certificate& c, const BellOperator& b) {
  NCPolynomial r(c.basis.schema_ptr());
  r.add_term(Monomial(), c.bound - b.offset);
  r -= b.polynomial;
  r -= c.sum_of_squares();
  for (const auto& mult : c.multipliers)
    if (mult.kind == Multiplier::Kind::completeness) r -= mult.weight * completeness_polynomial(mult, c.basis.schema_ptr());
  return r;
}

std::string pair_text(std::pair<int, int> p) { return std::to_string(p.first) + "," + std::to_string(p.second); }

}  // namespace

NCPolynomial Certificate::sum_of_squares() const {
  const std::size_t n = basis.size();
  Matrix<double> g = Matrix<double>::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& sq : squares) {
    if (sq.coefficients.size() != n) throw CertificateError("square has the wrong number of coefficients");
    const Eigen::Map<const Eigen::VectorXd> v(sq.coefficients.data(), static_cast<Eigen::Index>(n));
    g.noalias() += sq.weight * v * v.transpose();
  }
  NCPolynomial out(basis.schema_ptr());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g(i, j) != 0.0) out.add_term(inner(basis[i], basis[j], basis.schema()), g(i, j));
  return out;
}

Certificate from_gram(double bound, MonomialBasis basis, const Matrix<double>& gram) {
  if (gram.rows() != static_cast<Eigen::Index>(basis.size()) || gram.cols() != gram.rows())
    throw CertificateError("Gram matrix size differs from the basis size");
  Certificate c;
  c.bound = bound;
  c.basis = std::move(basis);
  c.gram = (gram + gram.transpose()) / 2.0;
  c.squares = squares_of(c.gram);
  return c;
}

Certificate extract(const SDPSolution<double>& sol, const RelaxationProblem& prob) {
  const int m = prob.sdp.num_constraints();
  if (sol.x.size() != m) throw CertificateError("solution carries no dual variables for this problem");
  if (prob.constraints.empty() || prob.constraints.front().kind != ConstraintInfo::Kind::normalization)
    throw CertificateError("relaxation has no normalisation row");

  const BlockMatrix<double> gamma = affine_combination(prob.sdp, sol.x, true);
  Certificate c = from_gram(sol.x[0] + prob.bell.offset, prob.basis, gamma.front());

  const Schema& schema = prob.basis.schema();
  for (int k = 1; k < m; ++k) {
    const auto& info = prob.constraints[k];
    Multiplier mult;
    mult.weight = -sol.x[k];
    switch (info.kind) {
      case ConstraintInfo::Kind::equal_moment:
        mult.label = "equal " + pair_text(info.first) + " " + pair_text(info.second);
        break;
      case ConstraintInfo::Kind::annihilated:
        mult.label = "zero " + pair_text(info.second);
        break;
      case ConstraintInfo::Kind::completeness:
        mult.kind = Multiplier::Kind::completeness;
        mult.left = adjoint(prob.basis[info.first.first], schema);
        mult.right = prob.basis[info.first.second];
        mult.party = info.party;
        mult.setting = info.setting;
        break;
      case ConstraintInfo::Kind::normalization:
        throw CertificateError("second normalisation row");
    }
    c.multipliers.push_back(std::move(mult));
  }
  for (const auto& s : prob.substitutions) {
    Multiplier mult;
    mult.kind = Multiplier::Kind::completeness;
    mult.weight = -s.weight;
    mult.left = s.left;
    mult.right = s.right;
    mult.party = s.party;
    mult.setting = s.setting;
    c.multipliers.push_back(std::move(mult));
  }

  const NCPolynomial r = residual_against(c, prob.bell);
  c.residual = r.max_abs_coefficient();
  return c;
}

NCPolynomial residual_polynomial(const Certificate& c, const Game& g) {
  if (!(c.basis.schema() == *g.schema())) throw SchemaError("certificate was made for a different operator schema");
  return residual_against(c, bell_operator(g));
}

double verify(const Certificate& c, const Game& g) { return residual_polynomial(c, g).max_abs_coefficient(); }

// ---------------------------------------------------------------------------
// Text form

std::string serialize(const Certificate& c) {
  const Schema& schema = c.basis.schema();
  const OperatorKind kind = schema.kind();
  std::ostringstream out;
  out << "# weighted sum-of-squares certificate\n";
  out << "bound\n" << fmt(c.bound) << "\n";
  out << "schema\n" << to_string(kind) << "\n";
  for (const auto& party : schema.outcomes()) {
    for (std::size_t s = 0; s < party.size(); ++s) out << (s ? " " : "") << party[s];
    out << "\n";
  }
  out << "basis\n";
  for (const auto& m : c.basis.entries()) out << to_string(m, kind) << "\n";
  out << "gram\n";
  for (Eigen::Index i = 0; i < c.gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.gram.cols(); ++j) out << (j ? " " : "") << fmt(c.gram(i, j));
    out << "\n";
  }
  out << "squares\n";
  for (const auto& sq : c.squares) {
    out << fmt(sq.weight);
    for (double v : sq.coefficients) out << " " << fmt(v);
    out << "\n";
  }
  out << "multipliers\n";
  for (const auto& m : c.multipliers) {
    if (m.kind == Multiplier::Kind::ring) {
      out << "ring " << fmt(m.weight) << " " << m.label << "\n";
    } else {
      out << "completeness " << fmt(m.weight) << " " << m.party << " " << m.setting << " | "
          << to_string(m.left, kind) << " | " << to_string(m.right, kind) << "\n";
    }
  }
  out << "residual\n" << fmt(c.residual) << "\n";
  return out.str();
}

namespace {

std::vector<double> parse_numbers(const std::string& line, std::size_t no) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ParseError(no, "not a number: " + tok);
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

}  // namespace

Certificate parse_certificate(std::string_view text) {
  static const std::vector<std::string> order = {"bound", "schema", "basis", "gram", "squares", "multipliers", "residual"};
  std::map<std::string, std::vector<std::pair<std::size_t, std::string>>> sections;
  std::map<std::string, std::size_t> header_line;
  std::string current;
  std::size_t no = 0, next_section = 0;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (next_section < order.size() && line == order[next_section]) {
        current = line;
        header_line[current] = no;
        sections[current];
        ++next_section;
        continue;
      }
      if (current.empty()) throw ParseError(no, "expected section 'bound'");
      sections[current].emplace_back(no, line);
    }
  }
  if (next_section < order.size()) throw ParseError(no + 1, "missing section '" + order[next_section] + "'");

  auto single = [&](const std::string& name) {
    const auto& lines = sections[name];
    if (lines.size() != 1) throw ParseError(header_line[name], "section '" + name + "' needs exactly one value");
    const auto v = parse_numbers(lines[0].second, lines[0].first);
    if (v.size() != 1) throw ParseError(lines[0].first, "expected one number");
    return v[0];
  };

  Certificate c;
  c.bound = single("bound");

  const auto& schema_lines = sections["schema"];
  if (schema_lines.size() < 2) throw ParseError(header_line["schema"], "schema needs a kind and one line per party");
  OperatorKind kind;
  try {
    kind = operator_kind_from_string(schema_lines[0].second);
  } catch (const Error& e) {
    throw ParseError(schema_lines[0].first, e.what());
  }
  std::vector<std::vector<int>> outcomes;
  for (std::size_t i = 1; i < schema_lines.size(); ++i) {
    std::vector<int> party;
    for (double v : parse_numbers(schema_lines[i].second, schema_lines[i].first)) {
      if (v != std::floor(v) || v < 1) throw ParseError(schema_lines[i].first, "outcome counts are positive integers");
      party.push_back(static_cast<int>(v));
    }
    outcomes.push_back(std::move(party));
  }
  std::shared_ptr<const Schema> schema;
  try {
    schema = std::make_shared<const Schema>(kind, std::move(outcomes));
  } catch (const Error& e) {
    throw ParseError(schema_lines[0].first, e.what());
  }

  std::vector<Monomial> entries;
  for (const auto& [line_no, line] : sections["basis"]) {
    try {
      entries.push_back(parse_monomial(line, *schema));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    c.basis = MonomialBasis(schema, std::move(entries));
  } catch (const Error& e) {
    throw ParseError(header_line["basis"], e.what());
  }
  const auto n = static_cast<Eigen::Index>(c.basis.size());

  const auto& gram_lines = sections["gram"];
  if (static_cast<Eigen::Index>(gram_lines.size()) != n)
    throw ParseError(gram_lines.empty() ? header_line["gram"] : gram_lines.back().first,
                     "gram needs " + std::to_string(n) + " rows");
  c.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = parse_numbers(gram_lines[i].second, gram_lines[i].first);
    if (static_cast<Eigen::Index>(v.size()) != n)
      throw ParseError(gram_lines[i].first, "gram row needs " + std::to_string(n) + " entries");
    for (Eigen::Index j = 0; j < n; ++j) c.gram(i, j) = v[j];
  }

  for (const auto& [line_no, line] : sections["squares"]) {
    const auto v = parse_numbers(line, line_no);
    if (static_cast<Eigen::Index>(v.size()) != n + 1)
      throw ParseError(line_no, "square needs a weight and " + std::to_string(n) + " coefficients");
    if (v[0] < 0) throw ParseError(line_no, "square weights must be nonnegative");
    c.squares.push_back({v[0], std::vector<double>(v.begin() + 1, v.end())});
  }

  for (const auto& [line_no, line] : sections["multipliers"]) {
    std::istringstream in(line);
    std::string kind_word, weight;
    in >> kind_word >> weight;
    Multiplier m;
    const auto w = parse_numbers(weight, line_no);
    if (w.size() != 1) throw ParseError(line_no, "multiplier needs a weight");
    m.weight = w[0];
    std::string rest;
    std::getline(in, rest);
    rest = trim(rest);
    if (kind_word == "ring") {
      m.label = rest;
    } else if (kind_word == "completeness") {
      m.kind = Multiplier::Kind::completeness;
      const auto bar1 = rest.find('|');
      const auto bar2 = bar1 == std::string::npos ? std::string::npos : rest.find('|', bar1 + 1);
      if (bar2 == std::string::npos) throw ParseError(line_no, "completeness: expected 'party setting | left | right'");
      const auto ps = parse_numbers(rest.substr(0, bar1), line_no);
      if (ps.size() != 2) throw ParseError(line_no, "completeness: expected party and setting");
      m.party = static_cast<int>(ps[0]);
      m.setting = static_cast<int>(ps[1]);
      try {
        m.left = parse_monomial(trim(rest.substr(bar1 + 1, bar2 - bar1 - 1)), *schema);
        m.right = parse_monomial(trim(rest.substr(bar2 + 1)), *schema);
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
    } else {
      throw ParseError(line_no, "unknown multiplier kind '" + kind_word + "'");
    }
    c.multipliers.push_back(std::move(m));
  }

  c.residual = single("residual");
  return c;
}

}  // namespace ncsos
