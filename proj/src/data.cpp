#include "abdd/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "abdd/error.hpp"
#include "json.hpp"

namespace abdd {

BitVector::BitVector(std::vector<std::int8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_)
    if (b != 1 && b != -1) throw DomainError("BitVector entries must be -1 or +1");
}

BitVector::BitVector(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) {
    if (b != 1 && b != -1) throw DomainError("BitVector entries must be -1 or +1");
    bits_.push_back(static_cast<std::int8_t>(b));
  }
}

BitVector BitVector::from_index(std::uint64_t index, std::size_t n) {
  std::vector<std::int8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i)
    bits[i] = ((index >> (n - 1 - i)) & 1u) ? 1 : -1;
  BitVector v;
  v.bits_ = std::move(bits);
  return v;
}

std::uint64_t BitVector::index() const {
  if (bits_.size() > 64) throw DomainError("BitVector too long to index");
  std::uint64_t r = 0;
  for (auto b : bits_) r = (r << 1) | (b > 0 ? 1u : 0u);
  return r;
}

BitVector BitVector::flipped(std::size_t i) const {
  BitVector v = *this;
  v.bits_.at(i) = static_cast<std::int8_t>(-v.bits_[i]);
  return v;
}

std::string BitVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b > 0 ? '+' : '-');
  return s;
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw InputError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

LabeledSample::LabeledSample(std::size_t n, std::vector<Example> items)
    : n_(n), items_(std::move(items)) {
  if (items_.empty()) throw InputError("sample must contain at least one item");
  std::unordered_map<std::string, int> seen;
  seen.reserve(items_.size());
  for (const auto& e : items_) {
    if (e.x.size() != n_) throw InputError("sample item has wrong dimension");
    if (e.y != 1 && e.y != -1) throw InputError("labels must be -1 or +1");
    auto [it, inserted] = seen.emplace(e.x.to_string(), e.y);
    if (!inserted && it->second != e.y)
      throw InputError("sample is not functionally consistent at " + e.x.to_string());
    positives_ += e.y > 0;
  }
}

Distribution::Distribution(std::vector<double> weights) : w_(std::move(weights)) {
  double total = 0.0;
  for (double w : w_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("distribution weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("distribution weights must sum to 1");
}

Distribution Distribution::uniform(std::size_t m) {
  if (m == 0) throw DomainError("uniform distribution over empty set");
  return Distribution(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

std::string Hypothesis::to_string() const {
  switch (kind) {
    case Kind::Projection: return "x" + std::to_string(index);
    case Kind::NegatedProjection: return "-x" + std::to_string(index);
    case Kind::Constant: return value > 0 ? "+1" : "-1";
  }
  return "?";
}

double pseudo_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("pseudo_entropy: q outside [0,1]");
  return 2.0 * std::sqrt(q * (1.0 - q));
}

double edge(const Distribution& d, const LabeledSample& s, const Hypothesis& h) {
  if (d.size() != s.size()) throw InputError("edge: distribution/sample length mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (d[i] == 0.0) continue;
    e += d[i] * s[i].y * h(s[i].x);
  }
  return e;
}

Distribution balanced_distribution(std::span<const std::size_t> subset,
                                   const LabeledSample& s) {
  std::size_t pos = 0, neg = 0;
  for (auto i : subset) {
    if (i >= s.size()) throw InputError("balanced_distribution: index out of range");
    (s[i].y > 0 ? pos : neg)++;
  }
  if (pos == 0 || neg == 0) throw PureNode("balanced_distribution: node is pure");
  std::vector<double> w(s.size(), 0.0);
  const double wp = 0.5 / static_cast<double>(pos);
  const double wn = 0.5 / static_cast<double>(neg);
  for (auto i : subset) w[i] = s[i].y > 0 ? wp : wn;
  return Distribution(std::move(w));
}

Distribution balance(const Distribution& d, const LabeledSample& s) {
  if (d.size() != s.size()) throw InputError("balance: length mismatch");
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) (s[i].y > 0 ? pos : neg) += d[i];
  if (pos <= 0.0 || neg <= 0.0) throw PureNode("balance: one class has no mass");
  std::vector<double> w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    w[i] = d[i] / (2.0 * (s[i].y > 0 ? pos : neg));
  return Distribution(std::move(w));
}

double entropy(const Distribution& d, const LabeledSample& s) {
  if (d.size() != s.size()) throw InputError("entropy: length mismatch");
  double pos = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].y > 0) pos += d[i];
  return pseudo_entropy(std::clamp(pos, 0.0, 1.0));
}

double conditional_entropy_given_hypothesis(const Distribution& d,
                                            const LabeledSample& s,
                                            const Hypothesis& h) {
  if (d.size() != s.size()) throw InputError("conditional entropy: length mismatch");
  double mass[2] = {0.0, 0.0}, pos[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int side = h(s[i].x) > 0 ? 1 : 0;
    mass[side] += d[i];
    if (s[i].y > 0) pos[side] += d[i];
  }
  double h_cond = 0.0;
  for (int side = 0; side < 2; ++side) {
    if (mass[side] <= 0.0) continue;
    h_cond += mass[side] * pseudo_entropy(std::clamp(pos[side] / mass[side], 0.0, 1.0));
  }
  return h_cond;
}

namespace {

int parse_label(const std::string& tok) {
  if (tok == "+1" || tok == "1" || tok == "+") return 1;
  if (tok == "-1" || tok == "-") return -1;
  throw InputError("bad label '" + tok + "'");
}

BitVector parse_signs(const std::string& tok) {
  std::vector<std::int8_t> bits;
  bits.reserve(tok.size());
  for (char c : tok) {
    if (c == '+') bits.push_back(1);
    else if (c == '-') bits.push_back(-1);
    else throw InputError(std::string("bad instance character '") + c + "'");
  }
  return BitVector(std::move(bits));
}

BitVector json_bits(const nlohmann::json& arr) {
  std::vector<std::int8_t> bits;
  for (const auto& v : arr) {
    const int b = v.get<int>();
    if (b != 1 && b != -1) throw InputError("instance entries must be -1 or +1");
    bits.push_back(static_cast<std::int8_t>(b));
  }
  return BitVector(std::move(bits));
}

struct RawItem {
  BitVector x;
  int y = 0;  // 0 when unlabeled
};

std::vector<RawItem> parse_raw(std::istream& in, std::size_t& n_out) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<RawItem> items;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("sample JSON: ") + e.what());
    }
    try {
      for (const auto& it : j.at("items")) {
        RawItem r{json_bits(it.at("x")), it.contains("y") ? it["y"].get<int>() : 0};
        items.push_back(std::move(r));
      }
      n_out = j.contains("n") ? j["n"].get<std::size_t>()
                              : (items.empty() ? 0 : items.front().x.size());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("sample JSON: ") + e.what());
    }
    return items;
  }
  std::istringstream lines(text);
  std::string line;
  n_out = 0;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string xs, ys, extra;
    if (!(ls >> xs)) continue;
    RawItem r{parse_signs(xs), 0};
    if (ls >> ys) r.y = parse_label(ys);
    if (ls >> extra) throw InputError("trailing token in sample line: " + line);
    if (n_out == 0) n_out = r.x.size();
    items.push_back(std::move(r));
  }
  return items;
}

}  // namespace

LabeledSample read_sample(std::istream& in) {
  std::size_t n = 0;
  auto raw = parse_raw(in, n);
  std::vector<Example> items;
  items.reserve(raw.size());
  for (auto& r : raw) {
    if (r.y == 0) throw InputError("sample item without label");
    items.push_back({std::move(r.x), r.y});
  }
  return LabeledSample(n, std::move(items));
}

LabeledSample read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_sample(in);
}

void write_sample_text(std::ostream& out, const LabeledSample& s) {
  for (const auto& e : s.items()) out << e.x.to_string() << (e.y > 0 ? " +1\n" : " -1\n");
}

std::vector<BitVector> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::size_t n = 0;
  auto raw = parse_raw(in, n);
  std::vector<BitVector> out;
  out.reserve(raw.size());
  for (auto& r : raw) {
    if (r.x.size() != n) throw InputError("instance has wrong dimension");
    out.push_back(std::move(r.x));
  }
  if (out.empty()) throw InputError("no instances in " + path);
  return out;
}

}  // namespace abdd
