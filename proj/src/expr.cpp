#include "isoyamabe/expr.hpp"

#include "isoyamabe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace isoyamabe::expr {

// ---------------------------------------------------------------------------
// SampledCurve

SampledCurve::SampledCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw InvalidSystem("sampled table needs at least two (x, y) pairs of equal length");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw InvalidSystem("sampled table abscissae must be strictly increasing");
        }
    }
    // Natural spline: tridiagonal system for the interior second derivatives.
    m_.assign(n, 0.0);
    if (n > 2) {
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
            const double diag = 2.0 * (hl + hr) - hl * c[i - 1];
            c[i] = hr / diag;
            d[i] = (rhs - hl * d[i - 1]) / diag;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
        }
    }
}

double SampledCurve::eval(double t, int order) const {
    const std::size_t n = x_.size();
    std::size_t i = 0;
    if (t >= x_[n - 1]) {
        i = n - 2;
    } else if (t > x_[0]) {
        i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    }
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    switch (order) {
        case 0:
            return a * y_[i] + b * y_[i + 1] +
                   ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        case 1:
            return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
                   (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
        case 2:
            return a * m_[i] + b * m_[i + 1];
        case 3:
            return (m_[i + 1] - m_[i]) / h;
        default:
            return 0.0;
    }
}

// ---------------------------------------------------------------------------
// Builders

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
}

bool lit(const Expr& e, double& v) {
    if (e.node().op != Op::Num) return false;
    v = e.node().value;
    return true;
}

bool mentions_var(const Node& n) {
    if (n.op == Op::Var || n.op == Op::Sampled) return true;
    return std::any_of(n.args.begin(), n.args.end(),
                       [](const NodePtr& c) { return mentions_var(*c); });
}

bool printable(const Node& n) {
    if (n.op == Op::Sampled) return false;
    return std::all_of(n.args.begin(), n.args.end(),
                       [](const NodePtr& c) { return printable(*c); });
}

}  // namespace

Expr::Expr() : root_(literal(0.0).ptr()) {}

bool Expr::is_constant() const { return !mentions_var(*root_); }
bool Expr::is_printable() const { return printable(*root_); }
double Expr::operator()(double t) const { return eval(*this, t); }

Expr literal(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Num;
    n->value = v;
    return Expr(n);
}

Expr variable() { return Expr(make_node(Op::Var)); }
Expr pi() { return Expr(make_node(Op::Pi)); }

Expr sampled(std::shared_ptr<const SampledCurve> curve, int order) {
    if (order > 3) return literal(0.0);
    auto n = std::make_shared<Node>();
    n->op = Op::Sampled;
    n->curve = std::move(curve);
    n->order = order;
    return Expr(n);
}

Expr call(Func f, Expr arg) {
    auto n = std::make_shared<Node>();
    n->op = Op::Call;
    n->func = f;
    n->args = {arg.ptr()};
    return Expr(n);
}

Expr pow(Expr base, Expr exponent) {
    double b = 0, e = 0;
    const bool lb = lit(base, b), le = lit(exponent, e);
    if (le && e == 0.0) return literal(1.0);
    if (le && e == 1.0) return base;
    if (lb && b == 1.0) return literal(1.0);
    if (lb && le && (b > 0.0 || std::nearbyint(e) == e)) return literal(std::pow(b, e));
    return Expr(make_node(Op::Pow, {base.ptr(), exponent.ptr()}));
}

Expr pow(Expr base, double exponent) { return pow(std::move(base), literal(exponent)); }

Expr operator+(Expr a, Expr b) {
    double x = 0, y = 0;
    const bool la = lit(a, x), lb = lit(b, y);
    if (la && lb) return literal(x + y);
    if (la && x == 0.0) return b;
    if (lb && y == 0.0) return a;
    return Expr(make_node(Op::Add, {a.ptr(), b.ptr()}));
}

Expr operator-(Expr a, Expr b) {
    double x = 0, y = 0;
    const bool la = lit(a, x), lb = lit(b, y);
    if (la && lb) return literal(x - y);
    if (lb && y == 0.0) return a;
    if (la && x == 0.0) return -b;
    return Expr(make_node(Op::Sub, {a.ptr(), b.ptr()}));
}

Expr operator*(Expr a, Expr b) {
    double x = 0, y = 0;
    const bool la = lit(a, x), lb = lit(b, y);
    if (la && lb) return literal(x * y);
    if ((la && x == 0.0) || (lb && y == 0.0)) return literal(0.0);
    if (la && x == 1.0) return b;
    if (lb && y == 1.0) return a;
    return Expr(make_node(Op::Mul, {a.ptr(), b.ptr()}));
}

Expr operator/(Expr a, Expr b) {
    double x = 0, y = 0;
    const bool la = lit(a, x), lb = lit(b, y);
    if (la && lb && y != 0.0) return literal(x / y);
    if (la && x == 0.0 && !(lb && y == 0.0)) return literal(0.0);
    if (lb && y == 1.0) return a;
    return Expr(make_node(Op::Div, {a.ptr(), b.ptr()}));
}

Expr operator-(Expr a) {
    double x = 0;
    if (lit(a, x)) return literal(-x);
    if (a.node().op == Op::Neg) return Expr(a.node().args[0]);
    return Expr(make_node(Op::Neg, {a.ptr()}));
}

// ---------------------------------------------------------------------------
// Printer

namespace {

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Abs: return "abs";
        case Func::Pow: return "pow";
    }
    return "?";
}

// 1: + -    2: * /    3: unary minus    4: ^    5: atoms and calls
int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        case Op::Num: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

void print_node(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::Num: out += format_number(n.value); return;
        case Op::Var: out += 't'; return;
        case Op::Pi: out += "pi"; return;
        case Op::Sampled: out += "<sampled>"; return;
        case Op::Neg:
            out += '-';
            print_child(*n.args[0], 4, out);
            return;
        case Op::Pow:
            print_child(*n.args[0], 5, out);
            out += '^';
            print_child(*n.args[1], 3, out);
            return;
        case Op::Call:
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print_node(*n.args[i], out);
            }
            out += ')';
            return;
        default: break;
    }
    const int p = precedence(n);
    const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
    print_child(*n.args[0], p, out);
    out += ' ';
    out += sym;
    out += ' ';
    print_child(*n.args[1], p + 1, out);
}

}  // namespace

std::string print(const Expr& e) {
    std::string out;
    print_node(e.node(), out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluator

namespace {

[[noreturn]] void domain_fail(const Node& n, const std::string& why) {
    std::string sub;
    print_node(n, sub);
    throw DomainError(why + " in '" + sub + "'");
}

double checked_pow(const Node& n, double base, double ex) {
    if (base < 0.0 && std::nearbyint(ex) != ex) domain_fail(n, "negative base with fractional exponent");
    if (base == 0.0 && ex < 0.0) domain_fail(n, "division by zero");
    return std::pow(base, ex);
}

double eval_node(const Node& n, double t) {
    double r = 0.0;
    switch (n.op) {
        case Op::Num: return n.value;
        case Op::Var: return t;
        case Op::Pi: return std::numbers::pi;
        case Op::Sampled: return n.curve->eval(t, n.order);
        case Op::Add: r = eval_node(*n.args[0], t) + eval_node(*n.args[1], t); break;
        case Op::Sub: r = eval_node(*n.args[0], t) - eval_node(*n.args[1], t); break;
        case Op::Mul: r = eval_node(*n.args[0], t) * eval_node(*n.args[1], t); break;
        case Op::Div: {
            const double num = eval_node(*n.args[0], t);
            const double den = eval_node(*n.args[1], t);
            if (den == 0.0) domain_fail(n, "division by zero");
            r = num / den;
            break;
        }
        case Op::Neg: return -eval_node(*n.args[0], t);
        case Op::Pow:
            r = checked_pow(n, eval_node(*n.args[0], t), eval_node(*n.args[1], t));
            break;
        case Op::Call: {
            const double x = eval_node(*n.args[0], t);
            switch (n.func) {
                case Func::Sin: r = std::sin(x); break;
                case Func::Cos: r = std::cos(x); break;
                case Func::Tan: r = std::tan(x); break;
                case Func::Exp: r = std::exp(x); break;
                case Func::Log:
                    if (x <= 0.0) domain_fail(n, "log of non-positive value");
                    r = std::log(x);
                    break;
                case Func::Sqrt:
                    if (x < 0.0) domain_fail(n, "sqrt of negative value");
                    r = std::sqrt(x);
                    break;
                case Func::Abs: r = std::fabs(x); break;
                case Func::Pow: r = checked_pow(n, x, eval_node(*n.args[1], t)); break;
            }
            break;
        }
    }
    if (!std::isfinite(r)) domain_fail(n, "non-finite result");
    return r;
}

}  // namespace

double eval(const Expr& e, double t) { return eval_node(e.node(), t); }

// ---------------------------------------------------------------------------
// Symbolic derivative

namespace {

Expr d_pow(const Expr& base, const Expr& ex) {
    const Expr db = differentiate(base);
    if (ex.is_constant()) {
        return ex * pow(base, ex - literal(1.0)) * db;
    }
    const Expr de = differentiate(ex);
    return pow(base, ex) * (de * call(Func::Log, base) + ex * db / base);
}

}  // namespace

Expr differentiate(const Expr& e) {
    const Node& n = e.node();
    auto arg = [&](std::size_t i) { return Expr(n.args[i]); };
    switch (n.op) {
        case Op::Num:
        case Op::Pi: return literal(0.0);
        case Op::Var: return literal(1.0);
        case Op::Sampled: return sampled(n.curve, n.order + 1);
        case Op::Add: return differentiate(arg(0)) + differentiate(arg(1));
        case Op::Sub: return differentiate(arg(0)) - differentiate(arg(1));
        case Op::Mul:
            return differentiate(arg(0)) * arg(1) + arg(0) * differentiate(arg(1));
        case Op::Div:
            return (differentiate(arg(0)) * arg(1) - arg(0) * differentiate(arg(1))) /
                   pow(arg(1), 2.0);
        case Op::Neg: return -differentiate(arg(0));
        case Op::Pow: return d_pow(arg(0), arg(1));
        case Op::Call: {
            const Expr x = arg(0);
            const Expr dx = differentiate(x);
            switch (n.func) {
                case Func::Sin: return call(Func::Cos, x) * dx;
                case Func::Cos: return -(call(Func::Sin, x) * dx);
                case Func::Tan: return dx / pow(call(Func::Cos, x), 2.0);
                case Func::Exp: return call(Func::Exp, x) * dx;
                case Func::Log: return dx / x;
                case Func::Sqrt: return dx / (literal(2.0) * call(Func::Sqrt, x));
                case Func::Abs: throw NonDifferentiable("abs is not differentiated; use a smooth profile");
                case Func::Pow: return d_pow(x, arg(1));
            }
        }
    }
    throw NonDifferentiable("unknown node");
}

// ---------------------------------------------------------------------------
// Parser (precedence climbing)

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse_all() {
        Expr e = parse_expr(1);
        skip_ws();
        if (pos_ < src_.size()) fail("operator or end of input", "unexpected character");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& expected, const std::string& what) const {
        throw SyntaxError(pos_, expected, pos_ >= src_.size() ? "unexpected end of input" : what);
    }

    static int infix_prec(char c) {
        switch (c) {
            case '+':
            case '-': return 1;
            case '*':
            case '/': return 2;
            default: return 0;
        }
    }

    Expr parse_expr(int min_prec) {
        Expr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) return lhs;
            const char c = src_[pos_];
            const int p = infix_prec(c);
            if (p == 0 || p < min_prec) return lhs;
            ++pos_;
            Expr rhs = parse_expr(p + 1);
            const Op op = c == '+' ? Op::Add : c == '-' ? Op::Sub : c == '*' ? Op::Mul : Op::Div;
            lhs = Expr(make_node(op, {lhs.ptr(), rhs.ptr()}));
        }
    }

    // unary minus binds looser than ^ and tighter than * /.
    Expr parse_unary() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '-') {
            ++pos_;
            Expr operand = parse_unary();
            return Expr(make_node(Op::Neg, {operand.ptr()}));
        }
        Expr base = parse_primary();
        skip_ws();
        // ^ is right-associative and its exponent may carry a unary minus.
        if (pos_ < src_.size() && src_[pos_] == '^') {
            ++pos_;
            Expr ex = parse_unary();
            return Expr(make_node(Op::Pow, {base.ptr(), ex.ptr()}));
        }
        return base;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= src_.size() || src_[pos_] != c) fail(std::string("\"") + c + "\"", "unexpected character");
        ++pos_;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("number, t, pi, function or \"(\"", "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr(1);
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail("number, t, pi, function or \"(\"", "unexpected character");
    }

    Expr parse_number() {
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{}) fail("number", "malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return literal(v);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);
        if (id == "t") return variable();
        if (id == "pi") return pi();
        static constexpr std::pair<std::string_view, Func> funcs[] = {
            {"sin", Func::Sin}, {"cos", Func::Cos},   {"tan", Func::Tan}, {"exp", Func::Exp},
            {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs}, {"pow", Func::Pow}};
        for (const auto& [name, f] : funcs) {
            if (id != name) continue;
            expect('(');
            Expr a0 = parse_expr(1);
            auto node = std::make_shared<Node>();
            node->op = Op::Call;
            node->func = f;
            node->args.push_back(a0.ptr());
            if (f == Func::Pow) {
                expect(',');
                Expr a1 = parse_expr(1);
                node->args.push_back(a1.ptr());
            }
            expect(')');
            return Expr(node);
        }
        pos_ = start;
        fail("t, pi or a function name", "unknown identifier '" + std::string(id) + "'");
    }
};

}  // namespace

Expr parse(std::string_view src) { return Parser(src).parse_all(); }

}  // namespace isoyamabe::expr
