#include "abdd/ltf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "abdd/error.hpp"
#include "abdd/simplex.hpp"
#include "json.hpp"

namespace abdd {

std::size_t dimension_cap_from_env(std::size_t fallback) {
  if (const char* v = std::getenv("ABDD_CAP")) {
    char* end = nullptr;
    const long cap = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && cap > 0)
      return std::min<std::size_t>(static_cast<std::size_t>(cap), kHardDimensionCap);
  }
  return std::min(fallback, kHardDimensionCap);
}

void check_finite(const ThresholdFunction& f) {
  for (double w : f.weights)
    if (!std::isfinite(w)) throw InputError("threshold function has a non-finite weight");
  if (!std::isfinite(f.bias)) throw InputError("threshold function has a non-finite bias");
}

int eval_ltf(const ThresholdFunction& f, const BitVector& x) {
  if (x.size() != f.dimension()) throw InputError("eval_ltf: dimension mismatch");
  double s = f.bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += f.weights[i] * x[i];
  return s >= 0.0 ? 1 : -1;
}

namespace {

void check_cap(std::size_t n, std::size_t cap) {
  if (cap > kHardDimensionCap) cap = kHardDimensionCap;
  if (n > cap)
    throw ResourceError("dimension " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
}

}  // namespace

LabeledSample full_sample(const ThresholdFunction& f, std::size_t cap) {
  const std::size_t n = f.dimension();
  check_cap(n, cap);
  check_finite(f);
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Example> items;
  items.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    auto x = BitVector::from_index(k, n);
    const int y = eval_ltf(f, x);
    items.push_back({std::move(x), y});
  }
  return LabeledSample(n, std::move(items));
}

std::vector<Hypothesis> lifted_hypotheses(std::size_t n) {
  std::vector<Hypothesis> h;
  h.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) h.push_back(Hypothesis::projection(i));
  for (std::size_t i = 0; i < n; ++i) h.push_back(Hypothesis::negated(i));
  return h;
}

MarginCertificate margin(const ThresholdFunction& f, std::size_t cap) {
  const std::size_t n = f.dimension();
  check_cap(n, cap);
  check_finite(f);
  const std::size_t cube = std::size_t{1} << n;
  std::vector<int> label(cube);
  std::vector<BitVector> points;
  points.reserve(cube);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < cube; ++k) {
    points.push_back(BitVector::from_index(k, n));
    label[k] = eval_ltf(f, points.back());
    pos += label[k] > 0;
  }
  if (pos == 0 || pos == cube) throw TrivialFunction("margin: function is constant on the cube");

  // Dual LP:  min g  s.t.  sum_x d_x f(x) h_i(x) - g + s_i = 0   (i < 2n)
  //                         sum_x d_x f(x) = 0,  sum_x d_x = 1,  d, g, s >= 0.
  // Its multipliers are the primal (w+, b, rho).
  const std::size_t hyps = 2 * n;
  const std::size_t gcol = cube;
  const std::size_t cols = cube + 1 + hyps;
  const std::size_t rows = hyps + 2;
  lp::Matrix a(rows, cols);
  for (std::size_t k = 0; k < cube; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = label[k] * points[k][i];
      a(i, k) = v;
      a(n + i, k) = -v;
    }
    a(hyps, k) = label[k];
    a(hyps + 1, k) = 1.0;
  }
  for (std::size_t i = 0; i < hyps; ++i) {
    a(i, gcol) = -1.0;
    a(i, gcol + 1 + i) = 1.0;
  }
  std::vector<double> b(rows, 0.0);
  b[hyps + 1] = 1.0;
  std::vector<double> c(cols, 0.0);
  c[gcol] = 1.0;

  const auto sol = lp::solve_standard_form(a, b, c);
  if (sol.status != lp::Status::Optimal)
    throw Error("margin: LP solver did not reach an optimum");

  MarginCertificate cert;
  cert.pivots = sol.pivots;
  cert.lifted_weights.resize(hyps);
  double total = 0.0;
  for (std::size_t i = 0; i < hyps; ++i) {
    cert.lifted_weights[i] = std::max(0.0, -sol.duals[i]);
    total += cert.lifted_weights[i];
  }
  if (!(total > 0.0)) throw Error("margin: degenerate multipliers");
  for (auto& w : cert.lifted_weights) w /= total;
  cert.bias = -sol.duals[hyps] / total;

  cert.rho = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cube; ++k) {
    double s = cert.bias;
    for (std::size_t i = 0; i < n; ++i)
      s += (cert.lifted_weights[i] - cert.lifted_weights[n + i]) * points[k][i];
    cert.rho = std::min(cert.rho, label[k] * s);
  }

  cert.dual.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(cube));
  double dsum = 0.0;
  for (auto& d : cert.dual) {
    d = std::max(0.0, d);
    dsum += d;
  }
  for (auto& d : cert.dual) d /= dsum;
  cert.dual_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t k = 0; k < cube; ++k) e += cert.dual[k] * label[k] * points[k][i];
    cert.dual_value = std::max({cert.dual_value, e, -e});
  }
  cert.dual_support = static_cast<std::size_t>(
      std::count_if(cert.dual.begin(), cert.dual.end(), [](double d) { return d > 0.0; }));
  cert.gap = cert.dual_value - cert.rho;
  return cert;
}

ThresholdFunction folded(const MarginCertificate& cert) {
  const std::size_t n = cert.lifted_weights.size() / 2;
  ThresholdFunction f;
  f.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.weights[i] = cert.lifted_weights[i] - cert.lifted_weights[n + i];
  f.bias = cert.bias;
  return f;
}

IntegerWeights integer_scale(const std::vector<double>& w, double b, int digits) {
  if (digits < 1) throw DomainError("integer_scale: digits must be >= 1");
  double alpha = std::abs(b);
  for (double v : w) {
    if (!std::isfinite(v)) throw DomainError("integer_scale: non-finite weight");
    alpha = std::max(alpha, std::abs(v));
  }
  if (!(alpha > 0.0)) throw DomainError("integer_scale: all weights and bias are zero");
  const double scale = std::pow(10.0, digits) / alpha;
  IntegerWeights out;
  out.alpha = alpha;
  for (double v : w) out.weights.push_back(static_cast<std::int64_t>(std::floor(scale * v)));
  out.bias = static_cast<std::int64_t>(std::floor(scale * b));
  return out;
}

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational parse_decimal(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  cpp_int mantissa = 0;
  long exponent = 0;
  bool digits = false, dot = false;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch >= '0' && ch <= '9') {
      mantissa = mantissa * 10 + (ch - '0');
      if (dot) --exponent;
      digits = true;
    } else if (ch == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!digits) throw DomainError("not a decimal number: '" + text + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw DomainError("not a decimal number: '" + text + "'");
    const std::string rest = text.substr(i + 1);
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(rest, &used);
    } catch (const std::exception&) {
      throw DomainError("bad exponent in '" + text + "'");
    }
    if (used != rest.size()) throw DomainError("not a decimal number: '" + text + "'");
    exponent += e;
  }
  cpp_rational r(mantissa);
  cpp_int ten_pow = 1;
  for (long k = 0; k < std::labs(exponent); ++k) ten_pow *= 10;
  r = exponent >= 0 ? r * cpp_rational(ten_pow) : r / cpp_rational(ten_pow);
  return negative ? -r : r;
}

std::int64_t floor_to_int(const cpp_rational& r) {
  const cpp_int num = boost::multiprecision::numerator(r);
  const cpp_int den = boost::multiprecision::denominator(r);  // > 0
  cpp_int q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  return q.convert_to<std::int64_t>();
}

}  // namespace

IntegerWeights integer_scale_exact(const std::vector<std::string>& w, const std::string& b,
                                   int digits) {
  if (digits < 1) throw DomainError("integer_scale: digits must be >= 1");
  std::vector<cpp_rational> ws;
  for (const auto& s : w) ws.push_back(parse_decimal(s));
  const cpp_rational br = parse_decimal(b);
  cpp_rational alpha = abs(br);
  for (const auto& v : ws) alpha = std::max(alpha, cpp_rational(abs(v)));
  if (alpha == 0) throw DomainError("integer_scale: all weights and bias are zero");
  cpp_int ten_pow = 1;
  for (int k = 0; k < digits; ++k) ten_pow *= 10;
  const cpp_rational scale = cpp_rational(ten_pow) / alpha;
  IntegerWeights out;
  out.alpha = alpha.convert_to<double>();
  for (const auto& v : ws) out.weights.push_back(floor_to_int(scale * v));
  out.bias = floor_to_int(scale * br);
  return out;
}

ThresholdFunction ltf_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ThresholdFunction f;
    f.weights = j.at("weights").get<std::vector<double>>();
    f.bias = j.value("bias", 0.0);
    if (j.contains("n") && j["n"].get<std::size_t>() != f.weights.size())
      throw InputError("LTF JSON: n does not match the number of weights");
    check_finite(f);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("LTF JSON: ") + e.what());
  }
}

ThresholdFunction read_ltf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ltf_from_json(buf.str());
}

std::string to_json(const ThresholdFunction& f) {
  nlohmann::json j;
  j["n"] = f.dimension();
  j["weights"] = f.weights;
  j["bias"] = f.bias;
  return j.dump();
}

std::string margin_report_json(const MarginCertificate& cert) {
  nlohmann::json j;
  j["rho"] = cert.rho;
  j["dual_value"] = cert.dual_value;
  j["gap"] = cert.gap;
  j["lifted_weights"] = cert.lifted_weights;
  j["bias"] = cert.bias;
  j["dual_support"] = cert.dual_support;
  j["pivots"] = cert.pivots;
  return j.dump(1);
}

}  // namespace abdd
