#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace abdd {

/// A point of {-1,+1}^n.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::vector<std::int8_t> bits);
  BitVector(std::initializer_list<int> bits);

  /// Point whose i-th coordinate is +1 iff bit (n-1-i) of `index` is set.
  static BitVector from_index(std::uint64_t index, std::size_t n);

  std::size_t size() const noexcept { return bits_.size(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::int8_t> bits() const noexcept { return bits_; }

  /// Inverse of from_index.
  std::uint64_t index() const;
  BitVector flipped(std::size_t i) const;
  std::string to_string() const;  // "+-+..."

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend auto operator<=>(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::int8_t> bits_;
};

std::size_t hamming_distance(const BitVector& a, const BitVector& b);

struct Example {
  BitVector x;
  int y = 1;  // -1 or +1
};

/// The labeled sample S. Functionally consistent: equal instances carry equal
/// labels.
class LabeledSample {
 public:
  LabeledSample(std::size_t n, std::vector<Example> items);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return items_.size(); }
  const Example& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<Example>& items() const noexcept { return items_; }
  std::size_t positives() const noexcept { return positives_; }

 private:
  std::size_t n_;
  std::vector<Example> items_;
  std::size_t positives_ = 0;
};

/// Probability mass over sample positions.
class Distribution {
 public:
  explicit Distribution(std::vector<double> weights);
  static Distribution uniform(std::size_t m);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

/// Base classifier: a (negated) projection onto one coordinate, or a constant.
struct Hypothesis {
  enum class Kind : std::uint8_t { Projection, NegatedProjection, Constant };

  Kind kind = Kind::Projection;
  std::size_t index = 0;  // coordinate for projections
  int value = 1;          // output for constants

  static Hypothesis projection(std::size_t i) { return {Kind::Projection, i, 1}; }
  static Hypothesis negated(std::size_t i) { return {Kind::NegatedProjection, i, 1}; }
  static Hypothesis constant(int v) { return {Kind::Constant, 0, v >= 0 ? 1 : -1}; }

  int operator()(const BitVector& x) const {
    switch (kind) {
      case Kind::Projection: return x[index];
      case Kind::NegatedProjection: return -x[index];
      case Kind::Constant: return value;
    }
    return value;
  }

  bool is_projection() const noexcept { return kind != Kind::Constant; }
  std::string to_string() const;  // "x3", "-x3", "+1"

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// G(q) = 2 sqrt(q(1-q)).
double pseudo_entropy(double q);

/// Sum_i d_i y_i h(x_i).
double edge(const Distribution& d, const LabeledSample& s, const Hypothesis& h);

/// Class-balanced distribution supported on `subset`: each class gets mass 1/2,
/// spread uniformly. Throws PureNode when the subset holds a single class.
Distribution balanced_distribution(std::span<const std::size_t> subset,
                                   const LabeledSample& s);

/// Reweights `d` so each class carries mass 1/2 while keeping within-class
/// proportions.
Distribution balance(const Distribution& d, const LabeledSample& s);

/// H_d(f) = G(Pr_d{y = +1}).
double entropy(const Distribution& d, const LabeledSample& s);

/// H_d(f|h); branches of zero probability contribute nothing.
double conditional_entropy_given_hypothesis(const Distribution& d,
                                            const LabeledSample& s,
                                            const Hypothesis& h);

// Sample I/O. Text: one `+-+- L` line per item, '#' comments. JSON:
// {"n":…, "items":[{"x":[…],"y":…}]}.
LabeledSample read_sample(std::istream& in);
LabeledSample read_sample_file(const std::string& path);
void write_sample_text(std::ostream& out, const LabeledSample& s);

/// Unlabeled instance list; accepts sample files with or without labels.
std::vector<BitVector> read_instances_file(const std::string& path);

}  // namespace abdd
