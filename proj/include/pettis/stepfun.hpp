// Coefficient schemes over the tree index set: selector-driven functions,
// restrictions to a subtree, and exact l1-combinations with the per-level
// weight merge.  Coefficients carry the irrational factor 2^(-k/2), so they
// are stored as signed squares; every norm downstream is then an exact
// rational.
#pragma once

#include "pettis/address.hpp"
#include "pettis/rational.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace pettis {

/// sign * sqrt(square); sign == 0 iff square == 0.
struct SignedSquare {
    int sign = 0;
    Rational square;

    SignedSquare() : square(0) {}
    SignedSquare(int s, Rational sq) : sign(s), square(std::move(sq)) {
        if ((sign == 0) != (this->square == 0) || this->square < 0 || sign < -1 || sign > 1)
            throw std::invalid_argument("SignedSquare: inconsistent sign/square");
    }

    static SignedSquare zero() { return SignedSquare(); }
    static SignedSquare from_value(const Rational& v) {
        return SignedSquare(sign_of(v), v * v);
    }

    bool is_zero() const { return sign == 0; }
    SignedSquare negated() const { return SignedSquare(-sign, square); }

    /// Multiply the represented value by a rational factor.
    SignedSquare scaled(const Rational& c) const {
        if (sign == 0 || c == 0) return zero();
        return SignedSquare(sign * sign_of(c), square * c * c);
    }

    bool operator==(const SignedSquare& o) const { return sign == o.sign && square == o.square; }
};

/// Sum of two signed-square values.  Exact only when sqrt(a/b) is rational
/// (always true for components of one function at one key, which share the
/// level factor 2^(-k/2)); throws otherwise.
SignedSquare add_commensurable(const SignedSquare& a, const SignedSquare& b);

/// Level selector n with n(k) <= k: either floor(t*k) for a rational slope,
/// or an explicit table.
class Selector {
  public:
    enum class Kind { slope, table };

    static Selector slope(const Rational& t);
    static Selector table(std::vector<int> values);

    Kind kind() const { return kind_; }
    const Rational& slope_value() const { return t_; }
    const std::vector<int>& table_values() const { return table_; }

    /// n(k); exact rational floor for slopes.
    int value(int k) const;

    /// Throws unless 0 <= n(k) <= k for all k <= kmax.
    void check_through(int kmax) const;

    bool operator==(const Selector& o) const;
    bool operator<(const Selector& o) const;

  private:
    Kind kind_ = Kind::slope;
    Rational t_;
    std::vector<int> table_;
};

struct ExplicitScheme {
    std::map<NodeKey, SignedSquare> coeffs;
};

struct FnScheme {
    Selector selector;
};

struct CombinedScheme {
    std::vector<std::pair<Rational, Selector>> terms;
};

/// A truncated basic function: coefficient access by key plus the per-level
/// support needed for aggregated evaluation.  Immutable after construction.
struct BasicFunction {
    int kmax = 0;
    std::variant<ExplicitScheme, FnScheme, CombinedScheme> scheme;
    std::optional<Address> restriction;  // coefficients vanish off [tau]

    bool is_explicit() const { return std::holds_alternative<ExplicitScheme>(scheme); }
};

/// Selector-driven function: coefficient 1/((k+1) 2^(k/2)) at (sigma, n(k)).
BasicFunction make_fn(const Selector& n, int kmax);

/// Explicit sparse coefficients (signed squares); depth must not exceed kmax.
BasicFunction make_explicit(std::map<NodeKey, SignedSquare> coeffs, int kmax);

/// Exact l1-combination sum_i weights[i] * fn(selectors[i]).
BasicFunction combine(const std::vector<Rational>& weights, const std::vector<Selector>& selectors,
                      int kmax);

/// f restricted to the subtree [tau]; idempotent under nested restriction.
BasicFunction restrict_fn(const BasicFunction& f, const Address& tau);

/// Exact signed square of the coefficient at a key (depth must be <= kmax).
SignedSquare coeff_sq(const BasicFunction& f, const NodeKey& key);

/// Merged per-level coefficients: the pairs (j, coefficient of (sigma, j))
/// shared by every sigma of depth k.  For combined schemes the coefficient
/// is d(k,j)/((k+1) 2^(k/2)) with d(k,j) the sum of the weights whose
/// selector picks j at level k.  Not defined for explicit schemes.
std::vector<std::pair<int, SignedSquare>> level_support(const BasicFunction& f, int k);

/// sum_j d(k,j)^2 style level weight: exact sum of coefficient squares over
/// one address at level k (zero off the restriction subtree is NOT applied
/// here; callers handle the subtree).
Rational level_coeff_sq_sum(const BasicFunction& f, int k);

/// sum_j |d(k,j)|: the merged l1 weight at level k (level factor excluded);
/// feeds the norm-integral divergence sums.
Rational level_weight_l1(const BasicFunction& f, int k);

}  // namespace pettis
