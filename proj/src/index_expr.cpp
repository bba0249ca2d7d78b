#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>

#include "specwb/indices.hpp"
#include "specwb/io.hpp"
#include "specwb/preprocess.hpp"

namespace specwb {

namespace {

enum class Tok { Number, Band, Op, LParen, RParen, End };

struct Token {
    Tok kind = Tok::End;
    std::size_t pos = 0;  // 1-based
    double number = 0;
    BandSource source = BandSource::Reflectance;
    char op = 0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        Token t;
        t.pos = i_ + 1;
        if (i_ >= text_.size()) return t;
        const char c = text_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            t.kind = Tok::Number;
            t.number = readNumber(t.pos);
            return t;
        }
        if (c == 'R' || c == 'D') {
            t.kind = Tok::Band;
            ++i_;
            if (c == 'D') {
                if (i_ < text_.size() && (text_[i_] == '1' || text_[i_] == '2')) {
                    t.source = text_[i_] == '1' ? BandSource::FirstDerivative : BandSource::SecondDerivative;
                    ++i_;
                } else {
                    throw SyntaxError("derivative reference must be D1<nm> or D2<nm>", t.pos);
                }
            }
            if (i_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[i_])) || text_[i_] == '.'))
                throw SyntaxError("band reference needs a wavelength", i_ + 1);
            t.number = readNumber(i_ + 1);
            return t;
        }
        ++i_;
        switch (c) {
            case '+':
            case '-':
            case '*':
            case '/':
            case '^':
                t.kind = Tok::Op;
                t.op = c;
                return t;
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            default: throw SyntaxError(std::string("unknown token '") + c + "'", t.pos);
        }
    }

private:
    double readNumber(std::size_t pos) {
        const std::size_t start = i_;
        auto digits = [&] {
            std::size_t n = 0;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (i_ < text_.size() && text_[i_] == '.') {
            ++i_;
            n += digits();
        }
        if (n == 0) throw SyntaxError("malformed number", pos);
        if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
            std::size_t save = i_++;
            if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
            if (digits() == 0) i_ = save;
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + i_, v);
        if (ec != std::errc() || ptr != text_.data() + i_) throw SyntaxError("malformed number", pos);
        return v;
    }

    const std::string& text_;
    std::size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) { advance(); }

    IndexNodePtr parse() {
        auto root = expr();
        if (cur_.kind != Tok::End) throw SyntaxError("unexpected trailing input", cur_.pos);
        return root;
    }

private:
    void advance() { cur_ = lex_.next(); }

    static IndexNodePtr binary(char op, IndexNodePtr lhs, IndexNodePtr rhs) {
        return std::make_shared<IndexNode>(IndexNode{BinaryNode{op, std::move(lhs), std::move(rhs)}});
    }

    IndexNodePtr expr() {
        auto lhs = term();
        while (cur_.kind == Tok::Op && (cur_.op == '+' || cur_.op == '-')) {
            const char op = cur_.op;
            advance();
            lhs = binary(op, lhs, term());
        }
        return lhs;
    }

    IndexNodePtr term() {
        auto lhs = factor();
        while (cur_.kind == Tok::Op && (cur_.op == '*' || cur_.op == '/')) {
            const char op = cur_.op;
            advance();
            lhs = binary(op, lhs, factor());
        }
        return lhs;
    }

    IndexNodePtr factor() {
        auto b = base();
        if (cur_.kind == Tok::Op && cur_.op == '^') {
            advance();
            return binary('^', b, factor());
        }
        return b;
    }

    IndexNodePtr base() {
        const Token t = cur_;
        switch (t.kind) {
            case Tok::Number:
                advance();
                return std::make_shared<IndexNode>(IndexNode{NumberNode{t.number}});
            case Tok::Band:
                advance();
                return std::make_shared<IndexNode>(IndexNode{BandNode{t.source, t.number}});
            case Tok::LParen: {
                advance();
                auto inner = expr();
                if (cur_.kind != Tok::RParen)
                    throw SyntaxError(cur_.kind == Tok::End ? "missing ')'" : "expected ')'", cur_.pos);
                advance();
                return inner;
            }
            case Tok::End: throw SyntaxError("unexpected end of input", t.pos);
            default: throw SyntaxError("expected a number, band reference or '('", t.pos);
        }
    }

    Lexer lex_;
    Token cur_;
};

int precedence(const IndexNode& n) {
    if (const auto* b = std::get_if<BinaryNode>(&n.value)) {
        switch (b->op) {
            case '+':
            case '-': return 1;
            case '*':
            case '/': return 2;
            default: return 3;
        }
    }
    return 4;
}

void render(const IndexNode& n, std::string& out) {
    if (const auto* num = std::get_if<NumberNode>(&n.value)) {
        out += formatNumber(num->value);
        return;
    }
    if (const auto* band = std::get_if<BandNode>(&n.value)) {
        out += band->source == BandSource::Reflectance       ? "R"
               : band->source == BandSource::FirstDerivative ? "D1"
                                                             : "D2";
        out += formatNumber(band->wavelength);
        return;
    }
    const auto& b = std::get<BinaryNode>(n.value);
    const int p = precedence(n);
    const bool right_assoc = b.op == '^';
    const bool wrap_l = right_assoc ? precedence(*b.lhs) <= p : precedence(*b.lhs) < p;
    const bool wrap_r = right_assoc ? precedence(*b.rhs) < p : precedence(*b.rhs) <= p;
    if (wrap_l) out += '(';
    render(*b.lhs, out);
    if (wrap_l) out += ')';
    out += b.op;
    if (wrap_r) out += '(';
    render(*b.rhs, out);
    if (wrap_r) out += ')';
}

void collectBands(const IndexNode& n, std::vector<BandNode>& out) {
    if (const auto* band = std::get_if<BandNode>(&n.value)) {
        out.push_back(*band);
    } else if (const auto* b = std::get_if<BinaryNode>(&n.value)) {
        collectBands(*b->lhs, out);
        collectBands(*b->rhs, out);
    }
}

bool sameTree(const IndexNode& a, const IndexNode& b) {
    if (a.value.index() != b.value.index()) return false;
    if (const auto* x = std::get_if<NumberNode>(&a.value)) return x->value == std::get<NumberNode>(b.value).value;
    if (const auto* x = std::get_if<BandNode>(&a.value)) {
        const auto& y = std::get<BandNode>(b.value);
        return x->source == y.source && x->wavelength == y.wavelength;
    }
    const auto& x = std::get<BinaryNode>(a.value);
    const auto& y = std::get<BinaryNode>(b.value);
    return x.op == y.op && sameTree(*x.lhs, *y.lhs) && sameTree(*x.rhs, *y.rhs);
}

struct EvalContext {
    const Speclib& s;
    std::optional<Speclib> d1, d2;
    std::vector<bool> zero_division;

    const Speclib& source(BandSource src) {
        if (src == BandSource::Reflectance) return s;
        auto& slot = src == BandSource::FirstDerivative ? d1 : d2;
        if (!slot) slot = derivative(s, src == BandSource::FirstDerivative ? 1 : 2);
        return *slot;
    }
};

Eigen::ArrayXd evaluate(const IndexNode& n, EvalContext& ctx) {
    const Eigen::Index rows = static_cast<Eigen::Index>(ctx.s.samples());
    if (const auto* num = std::get_if<NumberNode>(&n.value)) return Eigen::ArrayXd::Constant(rows, num->value);
    if (const auto* band = std::get_if<BandNode>(&n.value)) {
        const Speclib& src = ctx.source(band->source);
        return src.spectra().col(static_cast<Eigen::Index>(src.nearestBand(band->wavelength))).array();
    }
    const auto& b = std::get<BinaryNode>(n.value);
    const Eigen::ArrayXd l = evaluate(*b.lhs, ctx);
    const Eigen::ArrayXd r = evaluate(*b.rhs, ctx);
    switch (b.op) {
        case '+': return l + r;
        case '-': return l - r;
        case '*': return l * r;
        case '^': return l.binaryExpr(r, [](double x, double y) { return std::pow(x, y); });
        default: break;
    }
    Eigen::ArrayXd out(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (r(i) == 0) {
            out(i) = std::numeric_limits<double>::quiet_NaN();
            ctx.zero_division[static_cast<std::size_t>(i)] = true;
        } else {
            out(i) = l(i) / r(i);
        }
    }
    return out;
}

}  // namespace

IndexExpr parseIndex(const std::string& text) { return IndexExpr(Parser(text).parse()); }

std::string IndexExpr::toString() const {
    std::string out;
    render(*root_, out);
    return out;
}

std::vector<BandNode> IndexExpr::bands() const {
    std::vector<BandNode> out;
    collectBands(*root_, out);
    return out;
}

bool IndexExpr::operator==(const IndexExpr& other) const { return sameTree(*root_, *other.root_); }

IndexValues evalIndex(const IndexExpr& expr, const Speclib& s) {
    const auto& wl = s.wavelengths();
    const double lo = wl.front() - s.fwhm().front() / 2;
    const double hi = wl.back() + s.fwhm().back() / 2;
    for (const auto& band : expr.bands()) {
        if (band.wavelength < lo || band.wavelength > hi)
            throw Error("wavelength out of range: " + formatNumber(band.wavelength) + " nm not within [" +
                        formatNumber(lo) + ", " + formatNumber(hi) + "]");
        if (band.source == BandSource::SecondDerivative && s.bands() < 3)
            throw Error("second derivative references need at least 3 bands");
        if (band.source == BandSource::FirstDerivative && s.bands() < 2)
            throw Error("first derivative references need at least 2 bands");
    }
    EvalContext ctx{s, std::nullopt, std::nullopt, std::vector<bool>(s.samples(), false)};
    const Eigen::ArrayXd v = evaluate(expr.root(), ctx);
    IndexValues out;
    out.values.assign(v.data(), v.data() + v.size());
    for (bool z : ctx.zero_division) out.division_by_zero += z ? 1 : 0;
    return out;
}

}  // namespace specwb
