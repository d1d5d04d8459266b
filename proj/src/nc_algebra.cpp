#include "ncsos/nc_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace ncsos {

std::string_view to_string(OperatorKind kind) {
  return kind == OperatorKind::projector ? "projector" : "observable";
}

OperatorKind operator_kind_from_string(std::string_view text) {
  if (text == "projector") return OperatorKind::projector;
  if (text == "observable") return OperatorKind::observable;
  throw SchemaError("unknown operator kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Schema

Schema::Schema(OperatorKind kind, std::vector<std::vector<int>> outcomes)
    : kind_(kind), outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw SchemaError("schema needs at least one party");
  if (outcomes_.size() > 26) throw SchemaError("at most 26 parties are supported");
  for (std::size_t p = 0; p < outcomes_.size(); ++p) {
    if (outcomes_[p].empty())
      throw SchemaError("party " + std::to_string(p) + " has no settings");
    for (int m : outcomes_[p]) {
      if (m < 1) throw SchemaError("outcome counts must be positive");
      if (kind_ == OperatorKind::observable && m != 2)
        throw SchemaError("observable mode requires two outcomes per setting");
    }
  }
}

bool Schema::contains(const Generator& g) const noexcept {
  if (g.party >= outcomes_.size()) return false;
  const auto& settings = outcomes_[g.party];
  if (g.setting >= settings.size()) return false;
  if (kind_ == OperatorKind::observable) return g.outcome == 0;
  return g.outcome < settings[g.setting];
}

void Schema::check(const Generator& g) const {
  if (contains(g)) return;
  std::ostringstream msg;
  msg << "generator (party " << g.party << ", setting " << g.setting << ", outcome " << g.outcome
      << ") is outside the schema";
  throw SchemaError(msg.str());
}

std::vector<Generator> Schema::generators(bool drop_last_outcome) const {
  std::vector<Generator> out;
  for (std::size_t p = 0; p < outcomes_.size(); ++p) {
    for (std::size_t s = 0; s < outcomes_[p].size(); ++s) {
      int count = 1;
      if (kind_ == OperatorKind::projector)
        count = drop_last_outcome ? outcomes_[p][s] - 1 : outcomes_[p][s];
      for (int a = 0; a < count; ++a)
        out.push_back({static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(s),
                       static_cast<std::uint16_t>(a)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::zero() {
  Monomial m;
  m.zero_ = true;
  return m;
}

std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
  if (a.zero_ != b.zero_) return a.zero_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (a.word_.size() != b.word_.size()) return a.word_.size() <=> b.word_.size();
  return std::lexicographical_compare_three_way(a.word_.begin(), a.word_.end(), b.word_.begin(),
                                                b.word_.end());
}

Monomial reduce(std::span<const Generator> word, const Schema& schema, RewriteRules rules) {
  if (word.size() > kMaxWordLength)
    throw SchemaError("word of length " + std::to_string(word.size()) + " exceeds the cap of " +
                      std::to_string(kMaxWordLength));
  for (const auto& g : word) schema.check(g);

  std::vector<Generator> letters(word.begin(), word.end());
  if (rules.commute) {
    std::stable_sort(letters.begin(), letters.end(),
                     [](const Generator& x, const Generator& y) { return x.party < y.party; });
  }

  // Within a party segment letters only interact with their neighbours, so a
  // single left-to-right pass with a stack reaches the normal form: removing
  // an XX pair (observables) may expose a new adjacent pair, which the stack
  // top sees immediately.
  const bool observable = schema.kind() == OperatorKind::observable;
  std::vector<Generator> out;
  out.reserve(letters.size());
  for (const auto& g : letters) {
    if (!out.empty() && out.back().party == g.party && out.back().setting == g.setting) {
      if (out.back().outcome == g.outcome) {
        if (rules.idempotent) {
          if (observable) out.pop_back();
          continue;
        }
      } else if (rules.orthogonal) {
        return Monomial::zero();
      }
    }
    out.push_back(g);
  }
  return Monomial(std::move(out));
}

Monomial adjoint(const Monomial& m, const Schema& schema, RewriteRules rules) {
  if (m.is_zero()) return m;
  std::vector<Generator> reversed(m.word().rbegin(), m.word().rend());
  return reduce(reversed, schema, rules);
}

Monomial multiply(const Monomial& a, const Monomial& b, const Schema& schema, RewriteRules rules) {
  if (a.is_zero() || b.is_zero()) return Monomial::zero();
  std::vector<Generator> word;
  word.reserve(a.degree() + b.degree());
  word.insert(word.end(), a.word().begin(), a.word().end());
  word.insert(word.end(), b.word().begin(), b.word().end());
  return reduce(word, schema, rules);
}

Monomial inner(const Monomial& a, const Monomial& b, const Schema& schema, RewriteRules rules) {
  if (a.is_zero() || b.is_zero()) return Monomial::zero();
  std::vector<Generator> word;
  word.reserve(a.degree() + b.degree());
  word.insert(word.end(), a.word().rbegin(), a.word().rend());
  word.insert(word.end(), b.word().begin(), b.word().end());
  return reduce(word, schema, rules);
}

std::string to_string(const Monomial& m, OperatorKind kind) {
  if (m.is_zero()) return "0";
  if (m.is_identity()) return "I";
  std::string out;
  for (const auto& g : m.word()) {
    if (!out.empty()) out += ' ';
    out += static_cast<char>('A' + g.party);
    out += std::to_string(g.setting + 1);
    if (kind == OperatorKind::projector) {
      out += ':';
      out += std::to_string(g.outcome);
    }
  }
  return out;
}

namespace {

int parse_index(std::string_view digits, std::string_view token) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw SchemaError("malformed operator '" + std::string(token) + "'");
  if (digits.size() > 4) throw SchemaError("index too large in '" + std::string(token) + "'");
  return std::stoi(std::string(digits));
}

}  // namespace

Monomial parse_monomial(std::string_view text, const Schema& schema) {
  std::vector<Generator> word;
  std::istringstream in{std::string(text)};
  std::string token;
  bool saw_identity = false;
  while (in >> token) {
    if (token == "I" || token == "1") {
      saw_identity = true;
      continue;
    }
    if (token == "0") return Monomial::zero();
    const char letter = token[0];
    if (letter < 'A' || letter > 'Z') throw SchemaError("malformed operator '" + token + "'");
    const std::string_view rest = std::string_view(token).substr(1);
    const auto colon = rest.find(':');
    Generator g;
    g.party = static_cast<std::uint16_t>(letter - 'A');
    const int setting = parse_index(rest.substr(0, colon), token);
    if (setting < 1) throw SchemaError("settings are 1-based in '" + token + "'");
    g.setting = static_cast<std::uint16_t>(setting - 1);
    if (colon != std::string_view::npos) {
      if (schema.kind() != OperatorKind::projector)
        throw SchemaError("outcome given for observable '" + token + "'");
      g.outcome = static_cast<std::uint16_t>(parse_index(rest.substr(colon + 1), token));
    } else if (schema.kind() == OperatorKind::projector) {
      throw SchemaError("projector '" + token + "' needs an outcome (e.g. A1:0)");
    }
    word.push_back(g);
  }
  if (word.empty() && !saw_identity) throw SchemaError("empty monomial");
  return reduce(word, schema);
}

// ---------------------------------------------------------------------------
// NCPolynomial

NCPolynomial::NCPolynomial(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {
  if (!schema_) throw SchemaError("polynomial needs a schema");
}

NCPolynomial::NCPolynomial(std::shared_ptr<const Schema> schema, const Monomial& m, double c)
    : NCPolynomial(std::move(schema)) {
  add_term(m, c);
}

NCPolynomial NCPolynomial::identity(std::shared_ptr<const Schema> schema, double c) {
  return NCPolynomial(std::move(schema), Monomial(), c);
}

NCPolynomial NCPolynomial::from_word(std::shared_ptr<const Schema> schema,
                                     std::span<const Generator> word, RewriteRules rules) {
  const Monomial m = reduce(word, *schema, rules);
  return NCPolynomial(std::move(schema), m, 1.0);
}

double NCPolynomial::coefficient(const Monomial& m) const {
  const auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

std::size_t NCPolynomial::degree() const {
  std::size_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double NCPolynomial::max_abs_coefficient() const {
  double out = 0.0;
  for (const auto& [m, c] : terms_) out = std::max(out, std::abs(c));
  return out;
}

void NCPolynomial::add_term(const Monomial& m, double c) {
  if (m.is_zero() || c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void NCPolynomial::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

void NCPolynomial::require_same_schema(const NCPolynomial& other) const {
  if (schema_ != other.schema_ && !(*schema_ == *other.schema_))
    throw SchemaError("polynomials are over different schemas");
}

NCPolynomial& NCPolynomial::operator+=(const NCPolynomial& other) {
  require_same_schema(other);
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

NCPolynomial& NCPolynomial::operator-=(const NCPolynomial& other) {
  require_same_schema(other);
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

NCPolynomial& NCPolynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

NCPolynomial operator+(NCPolynomial a, const NCPolynomial& b) { return a += b; }
NCPolynomial operator-(NCPolynomial a, const NCPolynomial& b) { return a -= b; }
NCPolynomial operator*(NCPolynomial p, double s) { return p *= s; }
NCPolynomial operator*(double s, NCPolynomial p) { return p *= s; }

NCPolynomial multiply(const NCPolynomial& p, const NCPolynomial& q, RewriteRules rules) {
  if (!(p.schema() == q.schema())) throw SchemaError("polynomials are over different schemas");
  NCPolynomial out(p.schema_ptr());
  for (const auto& [mp, cp] : p.terms())
    for (const auto& [mq, cq] : q.terms()) out.add_term(multiply(mp, mq, p.schema(), rules), cp * cq);
  return out;
}

NCPolynomial operator*(const NCPolynomial& p, const NCPolynomial& q) { return multiply(p, q); }

NCPolynomial adjoint(const NCPolynomial& p) {
  NCPolynomial out(p.schema_ptr());
  for (const auto& [m, c] : p.terms()) out.add_term(adjoint(m, p.schema()), c);
  return out;
}

bool is_hermitian(const NCPolynomial& p, double tol) {
  for (const auto& [m, c] : p.terms())
    if (std::abs(c - p.coefficient(adjoint(m, p.schema()))) > tol) return false;
  return true;
}

std::string to_string(const NCPolynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (!first) out << (c < 0 ? " - " : " + ");
    else if (c < 0) out << "-";
    first = false;
    out << std::abs(c);
    if (!m.is_identity()) out << " " << to_string(m, p.schema().kind());
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Instantiation

template <typename Scalar>
Assignment<Scalar>::Assignment(std::shared_ptr<const Schema> schema,
                               std::map<Generator, DenseMatrix<Scalar>> matrices)
    : schema_(std::move(schema)), matrices_(std::move(matrices)) {
  if (!schema_) throw SchemaError("assignment needs a schema");
  for (const auto& g : schema_->generators()) {
    const auto it = matrices_.find(g);
    if (it == matrices_.end()) throw SchemaError("assignment is missing a generator");
    if (it->second.rows() != it->second.cols())
      throw SchemaError("assignment matrices must be square");
    if (dimension_ == 0) dimension_ = it->second.rows();
    if (it->second.rows() != dimension_) throw SchemaError("assignment dimension mismatch");
  }
  for (const auto& [g, mat] : matrices_) schema_->check(g);
}

template <typename Scalar>
const DenseMatrix<Scalar>& Assignment<Scalar>::operator[](const Generator& g) const {
  const auto it = matrices_.find(g);
  if (it == matrices_.end()) throw SchemaError("generator not in assignment");
  return it->second;
}

template <typename Scalar>
double Assignment<Scalar>::constraint_violation() const {
  using Mat = DenseMatrix<Scalar>;
  const Mat eye = Mat::Identity(dimension_, dimension_);
  double worst = 0.0;
  auto track = [&worst](const Mat& m) { worst = std::max(worst, m.cwiseAbs().maxCoeff()); };
  const Schema& s = *schema_;
  for (int p = 0; p < s.num_parties(); ++p) {
    for (int x = 0; x < s.num_settings(p); ++x) {
      const auto gen = [&](int a) {
        return Generator{static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(x),
                         static_cast<std::uint16_t>(a)};
      };
      if (s.kind() == OperatorKind::observable) {
        const Mat& o = matrices_.at(gen(0));
        track(o - o.adjoint());
        track(o * o - eye);
        continue;
      }
      Mat sum = Mat::Zero(dimension_, dimension_);
      for (int a = 0; a < s.num_outcomes(p, x); ++a) {
        const Mat& pa = matrices_.at(gen(a));
        track(pa - pa.adjoint());
        track(pa * pa - pa);
        for (int b = a + 1; b < s.num_outcomes(p, x); ++b) track(pa * matrices_.at(gen(b)));
        sum += pa;
      }
      track(sum - eye);
    }
  }
  return worst;
}

template <typename Scalar>
void Assignment<Scalar>::validate(double tol) const {
  const double v = constraint_violation();
  if (v > tol) {
    std::ostringstream msg;
    msg << "assignment violates the measurement constraints by " << v;
    throw SchemaError(msg.str());
  }
}

template <typename Scalar>
DenseMatrix<Scalar> instantiate(std::span<const Generator> word, const Assignment<Scalar>& a) {
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Identity(a.dimension(), a.dimension());
  for (const auto& g : word) out = out * a[g];
  return out;
}

template <typename Scalar>
DenseMatrix<Scalar> instantiate(const NCPolynomial& p, const Assignment<Scalar>& a) {
  if (!(p.schema() == a.schema())) throw SchemaError("assignment schema does not match polynomial");
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(a.dimension(), a.dimension());
  for (const auto& [m, c] : p.terms()) out += Scalar(c) * instantiate<Scalar>(m.word(), a);
  return out;
}

template class Assignment<double>;
template class Assignment<std::complex<double>>;
template DenseMatrix<double> instantiate(std::span<const Generator>, const Assignment<double>&);
template DenseMatrix<std::complex<double>> instantiate(std::span<const Generator>,
                                                       const Assignment<std::complex<double>>&);
template DenseMatrix<double> instantiate(const NCPolynomial&, const Assignment<double>&);
template DenseMatrix<std::complex<double>> instantiate(const NCPolynomial&,
                                                       const Assignment<std::complex<double>>&);

}  // namespace ncsos
