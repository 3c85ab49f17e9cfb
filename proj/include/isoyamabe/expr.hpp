#pragma once

// One-variable arithmetic expressions in t: parser, evaluator, symbolic
// derivative and canonical printer. Profiles of the 1D reduction (b, a, s,
// level volumes, conformal factors) are all represented as Expr.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isoyamabe::expr {

enum class Op { Num, Var, Pi, Add, Sub, Mul, Div, Pow, Neg, Call, Sampled };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Pow };

/// Natural cubic spline through strictly increasing abscissae. Used to embed
/// grid-sampled data into expressions; never produced by the parser.
class SampledCurve {
public:
    SampledCurve(std::vector<double> x, std::vector<double> y);

    /// Value (order 0) or derivative of order 1..3 of the spline at t.
    /// Outside [x.front(), x.back()] the end cubic pieces are extended.
    double eval(double t, int order = 0) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Num;
    double value = 0.0;                          // Num
    Func func = Func::Sin;                       // Call
    std::vector<NodePtr> args;                   // operands
    std::shared_ptr<const SampledCurve> curve;   // Sampled
    int order = 0;                               // derivative order of a Sampled leaf
};

/// Immutable expression handle. Copies share the tree.
class Expr {
public:
    Expr();  // literal 0
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    const Node& node() const { return *root_; }
    const NodePtr& ptr() const { return root_; }

    double operator()(double t) const;

    bool is_literal() const { return root_->op == Op::Num; }
    bool is_literal(double v) const { return is_literal() && root_->value == v; }
    /// True when the tree does not mention t.
    bool is_constant() const;
    /// True when the tree contains no Sampled leaves, so print() round-trips.
    bool is_printable() const;

private:
    NodePtr root_;
};

Expr parse(std::string_view src);
double eval(const Expr& e, double t);
Expr differentiate(const Expr& e);
/// Canonical serializer; parse(print(e)) evaluates identically to e.
/// Sampled leaves are printed as "<sampled>", which does not parse.
std::string print(const Expr& e);

// Builders with literal constant folding.
Expr literal(double v);
Expr variable();
Expr pi();
Expr sampled(std::shared_ptr<const SampledCurve> curve, int order = 0);
Expr call(Func f, Expr arg);
Expr pow(Expr base, Expr exponent);
Expr pow(Expr base, double exponent);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);

inline Expr operator+(Expr a, double b) { return std::move(a) + literal(b); }
inline Expr operator-(Expr a, double b) { return std::move(a) - literal(b); }
inline Expr operator*(double a, Expr b) { return literal(a) * std::move(b); }
inline Expr operator/(Expr a, double b) { return std::move(a) / literal(b); }
inline Expr operator-(double a, Expr b) { return literal(a) - std::move(b); }
inline Expr operator+(double a, Expr b) { return literal(a) + std::move(b); }

}  // namespace isoyamabe::expr
