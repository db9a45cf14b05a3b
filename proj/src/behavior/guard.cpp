#include "behavior/guard.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "core/error.hpp"

namespace agentest::behavior {

struct Guard::Node {
    enum class Op { literal, path, negate, all, any, eq, ne, lt, le, gt, ge };
    Op op = Op::literal;
    Value literal;
    std::string path;
    std::vector<std::shared_ptr<const Node>> children;
};

namespace {

using Node = Guard::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Token {
    enum class Kind { end, ident, number, string, op, lparen, rparen };
    Kind kind = Kind::end;
    std::string text;
    Value value;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ >= src_.size())
            return {};
        char c = src_[pos_];
        if (c == '(') { ++pos_; return {Token::Kind::lparen, "(", {}}; }
        if (c == ')') { ++pos_; return {Token::Kind::rparen, ")", {}}; }
        if (c == '"' || c == '\'')
            return string_token(c);
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
            return number_token();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return ident_token();
        for (std::string_view op : {"==", "!=", "<=", ">=", "&&", "||"}) {
            if (src_.substr(pos_, 2) == op) {
                pos_ += 2;
                return {Token::Kind::op, std::string(op), {}};
            }
        }
        if (c == '<' || c == '>' || c == '!') {
            ++pos_;
            return {Token::Kind::op, std::string(1, c), {}};
        }
        fail(Errc::invalid_model, "unexpected character '" + std::string(1, c) + "' in guard");
    }

private:
    Token string_token(char quote)
    {
        ++pos_;
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != quote) {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size())
                ++pos_;
            out.push_back(src_[pos_++]);
        }
        if (pos_ >= src_.size())
            fail(Errc::invalid_model, "unterminated string in guard");
        ++pos_;
        return {Token::Kind::string, out, Value(out)};
    }

    Token number_token()
    {
        std::size_t start = pos_;
        if (src_[pos_] == '-')
            ++pos_;
        bool real = false;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            real = real || src_[pos_] == '.';
            ++pos_;
        }
        auto text = src_.substr(start, pos_ - start);
        if (real) {
            double d = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
            if (ec != std::errc{} || p != text.data() + text.size())
                fail(Errc::invalid_model, "bad number '" + std::string(text) + "' in guard");
            return {Token::Kind::number, std::string(text), Value(d)};
        }
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
        if (ec != std::errc{} || p != text.data() + text.size())
            fail(Errc::invalid_model, "bad number '" + std::string(text) + "' in guard");
        return {Token::Kind::number, std::string(text), Value(i)};
    }

    Token ident_token()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '.'))
            ++pos_;
        return {Token::Kind::ident, std::string(src_.substr(start, pos_ - start)), {}};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { advance(); }

    NodePtr parse()
    {
        auto n = parse_or();
        if (cur_.kind != Token::Kind::end)
            fail(Errc::invalid_model, "unexpected '" + cur_.text + "' in guard");
        return n;
    }

private:
    void advance() { cur_ = lex_.next(); }

    bool accept_op(std::string_view sym, std::string_view word)
    {
        if ((cur_.kind == Token::Kind::op && cur_.text == sym) ||
            (cur_.kind == Token::Kind::ident && !word.empty() && cur_.text == word)) {
            advance();
            return true;
        }
        return false;
    }

    NodePtr parse_or()
    {
        auto lhs = parse_and();
        while (accept_op("||", "or"))
            lhs = binary(Node::Op::any, lhs, parse_and());
        return lhs;
    }

    NodePtr parse_and()
    {
        auto lhs = parse_unary();
        while (accept_op("&&", "and"))
            lhs = binary(Node::Op::all, lhs, parse_unary());
        return lhs;
    }

    NodePtr parse_unary()
    {
        if (accept_op("!", "not")) {
            auto n = std::make_shared<Node>();
            n->op = Node::Op::negate;
            n->children.push_back(parse_unary());
            return n;
        }
        return parse_compare();
    }

    NodePtr parse_compare()
    {
        auto lhs = parse_operand();
        static const std::pair<std::string_view, Node::Op> ops[] = {
            {"==", Node::Op::eq}, {"!=", Node::Op::ne}, {"<", Node::Op::lt},
            {"<=", Node::Op::le}, {">", Node::Op::gt}, {">=", Node::Op::ge},
        };
        if (cur_.kind == Token::Kind::op) {
            for (const auto& [sym, op] : ops) {
                if (cur_.text == sym) {
                    advance();
                    return binary(op, lhs, parse_operand());
                }
            }
        }
        return lhs;
    }

    NodePtr parse_operand()
    {
        auto n = std::make_shared<Node>();
        switch (cur_.kind) {
        case Token::Kind::number:
        case Token::Kind::string:
            n->literal = cur_.value;
            advance();
            return n;
        case Token::Kind::ident:
            if (cur_.text == "true" || cur_.text == "false") {
                n->literal = cur_.text == "true";
            } else if (cur_.text == "null") {
                n->literal = Value{};
            } else {
                if (cur_.text.front() == '.' || cur_.text.back() == '.' ||
                    cur_.text.find("..") != std::string::npos)
                    fail(Errc::invalid_model, "malformed path '" + cur_.text + "' in guard");
                n->op = Node::Op::path;
                n->path = cur_.text;
            }
            advance();
            return n;
        case Token::Kind::lparen: {
            advance();
            auto inner = parse_or();
            if (cur_.kind != Token::Kind::rparen)
                fail(Errc::invalid_model, "missing ')' in guard");
            advance();
            return inner;
        }
        default:
            fail(Errc::invalid_model,
                 cur_.kind == Token::Kind::end ? "guard ends unexpectedly" : "unexpected '" + cur_.text + "' in guard");
        }
    }

    static NodePtr binary(Node::Op op, NodePtr a, NodePtr b)
    {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->children = {std::move(a), std::move(b)};
        return n;
    }

    Lexer lex_;
    Token cur_;
};

bool require_bool(const Value& v)
{
    if (!v.is_bool())
        fail(Errc::guard_error, std::string("expected boolean, got ") + kind_name(v.kind()));
    return v.as_bool();
}

bool equal_values(const Value& a, const Value& b)
{
    if (a.is_number() && b.is_number())
        return (a.is_int() && b.is_int()) ? a.as_int() == b.as_int() : a.as_number() == b.as_number();
    return a == b;
}

int order_values(const Value& a, const Value& b)
{
    if (a.is_int() && b.is_int())
        return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    if (a.is_number() && b.is_number()) {
        double x = a.as_number(), y = b.as_number();
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (a.is_string() && b.is_string())
        return a.as_string().compare(b.as_string()) < 0 ? -1 : (a.as_string() == b.as_string() ? 0 : 1);
    fail(Errc::guard_error,
         std::string("cannot order ") + kind_name(a.kind()) + " against " + kind_name(b.kind()));
}

Value eval(const Node& n, const Value& scope)
{
    switch (n.op) {
    case Node::Op::literal: return n.literal;
    case Node::Op::path: {
        auto* v = scope.find_path(n.path);
        return v ? *v : Value{};
    }
    case Node::Op::negate: return !require_bool(eval(*n.children[0], scope));
    case Node::Op::all:
        return require_bool(eval(*n.children[0], scope)) && require_bool(eval(*n.children[1], scope));
    case Node::Op::any:
        return require_bool(eval(*n.children[0], scope)) || require_bool(eval(*n.children[1], scope));
    case Node::Op::eq: return equal_values(eval(*n.children[0], scope), eval(*n.children[1], scope));
    case Node::Op::ne: return !equal_values(eval(*n.children[0], scope), eval(*n.children[1], scope));
    case Node::Op::lt: return order_values(eval(*n.children[0], scope), eval(*n.children[1], scope)) < 0;
    case Node::Op::le: return order_values(eval(*n.children[0], scope), eval(*n.children[1], scope)) <= 0;
    case Node::Op::gt: return order_values(eval(*n.children[0], scope), eval(*n.children[1], scope)) > 0;
    case Node::Op::ge: return order_values(eval(*n.children[0], scope), eval(*n.children[1], scope)) >= 0;
    }
    return Value{};
}

void collect(const Node& n, std::set<std::string>& out)
{
    if (n.op == Node::Op::path)
        out.insert(n.path.substr(0, n.path.find('.')));
    for (const auto& c : n.children)
        collect(*c, out);
}

} // namespace

Guard Guard::parse(std::string_view text)
{
    Guard g;
    g.text_ = std::string(text);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return g;
    g.root_ = Parser(text).parse();
    return g;
}

bool Guard::evaluate(const Value& scope) const
{
    if (!root_)
        return true;
    return require_bool(eval(*root_, scope));
}

std::vector<std::string> Guard::variables() const
{
    std::set<std::string> out;
    if (root_)
        collect(*root_, out);
    return {out.begin(), out.end()};
}

} // namespace agentest::behavior
