#include <ddedtm/model.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include <ddedtm/error.hpp>

namespace ddedtm
{

int TruncationOrders::at(int segment) const
{
    if (per_segment.empty()) {
        return kDefaultTruncationOrder;
    }
    const auto i = static_cast<std::size_t>(std::max(segment, 1) - 1);
    return i < per_segment.size() ? per_segment[i] : per_segment.back();
}

double DelayModel::max_delay() const noexcept
{
    double m = 0.0;
    for (const auto &d : delays) {
        m = std::max(m, d.value);
    }
    return m;
}

bool DelayModel::all_delays_exact() const noexcept
{
    return std::all_of(delays.begin(), delays.end(), [](const Delay &d) { return d.exact.has_value(); });
}

namespace
{

bool is_digit(char c)
{
    return c >= '0' && c <= '9';
}

class ExprParser
{
public:
    ExprParser(std::string_view src, int line, int column_base) : src_(src), line_(line), column_base_(column_base) {}

    ExprPtr parse()
    {
        auto e = expr();
        skip_ws();
        if (pos_ != src_.size()) {
            fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string &msg, ErrorCode code = ErrorCode::SyntaxError) const
    {
        throw Error(code, msg, line_, column_base_ + static_cast<int>(pos_));
    }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
    }

    char peek()
    {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    void expect(char c)
    {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    ExprPtr expr()
    {
        auto acc = term();
        bool acc_is_loop_add = false;
        for (;;) {
            const char c = peek();
            if (c == '+') {
                ++pos_;
                auto rhs = term();
                if (acc_is_loop_add) {
                    auto terms = std::get<node::Add>(acc->node).terms;
                    terms.push_back(std::move(rhs));
                    acc = make_add(std::move(terms));
                } else {
                    acc = make_add({acc, std::move(rhs)});
                    acc_is_loop_add = true;
                }
            } else if (c == '-') {
                ++pos_;
                acc = make_sub(acc, term());
                acc_is_loop_add = false;
            } else {
                return acc;
            }
        }
    }

    ExprPtr term()
    {
        auto acc = factor();
        bool acc_is_loop_mul = false;
        for (;;) {
            const char c = peek();
            if (c == '*') {
                ++pos_;
                auto rhs = factor();
                if (acc_is_loop_mul) {
                    auto factors = std::get<node::Mul>(acc->node).factors;
                    factors.push_back(std::move(rhs));
                    acc = make_mul(std::move(factors));
                } else {
                    acc = make_mul({acc, std::move(rhs)});
                    acc_is_loop_mul = true;
                }
            } else if (c == '/') {
                ++pos_;
                acc = make_div(acc, factor());
                acc_is_loop_mul = false;
            } else {
                return acc;
            }
        }
    }

    ExprPtr factor()
    {
        auto base = atom();
        if (peek() != '^') {
            return base;
        }
        ++pos_;
        skip_ws();
        const auto start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) {
            ++pos_;
        }
        const bool more_number = pos_ < src_.size()
                                 && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E' || is_digit(src_[pos_]));
        if (start == pos_ || more_number) {
            pos_ = start;
            fail("exponent must be a non-negative integer literal", ErrorCode::NonIntegerExponent);
        }
        unsigned value = 0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc{}) {
            pos_ = start;
            fail("exponent out of range", ErrorCode::NonIntegerExponent);
        }
        return make_pow(std::move(base), value);
    }

    ExprPtr atom()
    {
        const char c = peek();
        if (c == '\0') {
            fail("unexpected end of expression");
        }
        if (c == '(') {
            ++pos_;
            auto e = expr();
            expect(')');
            return e;
        }
        if (c == '-') {
            ++pos_;
            return make_neg(atom());
        }
        if (is_digit(c) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const auto start = pos_;
            while (pos_ < src_.size()
                   && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            const auto word = src_.substr(start, pos_ - start);
            if (word == "t") {
                return make_time();
            }
            if (word == "u") {
                return state_ref();
            }
            if (word == "exp") {
                expect('(');
                auto arg = expr();
                expect(')');
                return make_exp(std::move(arg));
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    ExprPtr state_ref()
    {
        int deriv = 0;
        while (pos_ < src_.size() && src_[pos_] == '\'') {
            ++deriv;
            ++pos_;
        }
        int delay = 0;
        if (pos_ < src_.size() && src_[pos_] == '[') {
            ++pos_;
            skip_ws();
            const auto start = pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                ++pos_;
            }
            if (start == pos_) {
                fail("expected a delay index");
            }
            const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, delay);
            if (res.ec != std::errc{} || delay < 1) {
                pos_ = start;
                fail("delay indices start at 1", ErrorCode::UnknownDelayIndex);
            }
            expect(']');
        }
        return make_state(deriv, delay);
    }

    ExprPtr number()
    {
        const auto start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) {
            ++pos_;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                ++pos_;
            }
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            auto p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) {
                ++p;
            }
            if (p < src_.size() && is_digit(src_[p])) {
                pos_ = p;
                while (pos_ < src_.size() && is_digit(src_[pos_])) {
                    ++pos_;
                }
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc{} || res.ptr != src_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return make_const(value);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
    int column_base_;
};

ExprPtr parse_expr_at(std::string_view text, int line, int column_base)
{
    return ExprParser(text, line, column_base).parse();
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

struct Field {
    std::string_view value;
    int line = 0;
    int column = 0; // 1-based column of the first character of value
};

[[noreturn]] void fail_at(const Field &f, const std::string &msg, ErrorCode code = ErrorCode::SyntaxError)
{
    throw Error(code, msg, f.line, f.column);
}

double parse_double(const Field &f, std::string_view text)
{
    text = trim(text);
    double v = 0.0;
    const auto *first = text.data();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        fail_at(f, "expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

int parse_int(const Field &f, std::string_view text)
{
    text = trim(text);
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        fail_at(f, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> parse_list(const Field &f)
{
    const auto v = trim(f.value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
        fail_at(f, "expected a bracketed list");
    }
    const auto body = trim(v.substr(1, v.size() - 2));
    std::vector<std::string_view> items;
    if (body.empty()) {
        return items;
    }
    std::size_t start = 0;
    for (;;) {
        const auto comma = body.find(',', start);
        const auto item = trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start));
        if (item.empty()) {
            fail_at(f, "empty list element");
        }
        items.push_back(item);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

bool is_integer_literal(std::string_view s)
{
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

Delay parse_delay(const Field &f, std::string_view item)
{
    if (item.find('/') != std::string_view::npos || is_integer_literal(item)) {
        try {
            return Delay::from_rational(Rational::parse(item));
        } catch (const std::exception &e) {
            fail_at(f, "bad delay '" + std::string(item) + "': " + e.what());
        }
    }
    return Delay::from_double(parse_double(f, item));
}

ExprPtr parse_quoted_expr(const Field &f)
{
    const auto v = f.value;
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
        fail_at(f, "expected a double-quoted expression");
    }
    return parse_expr_at(v.substr(1, v.size() - 2), f.line, f.column + 1);
}

} // namespace

ExprPtr parse_expr(std::string_view text)
{
    return parse_expr_at(text, 1, 1);
}

void check_model(const DelayModel &m)
{
    if (m.order < 1) {
        throw Error(ErrorCode::InvalidModel, "order must be at least 1");
    }
    if (!m.rhs || !m.history) {
        throw Error(ErrorCode::InvalidModel, "both rhs and history are required");
    }
    if (!std::isfinite(m.t0) || !std::isfinite(m.T)) {
        throw Error(ErrorCode::InvalidModel, "t0 and T must be finite");
    }
    if (!(m.T > m.t0)) {
        throw Error(ErrorCode::InvalidModel, "T must be greater than t0");
    }
    std::set<double> seen;
    for (const auto &d : m.delays) {
        if (!(d.value > 0.0) || !std::isfinite(d.value)) {
            throw Error(ErrorCode::InvalidModel, "delays must be positive and finite");
        }
        if (!seen.insert(d.value).second) {
            throw Error(ErrorCode::InvalidModel, "delays must be pairwise distinct");
        }
    }
    if (m.truncation.per_segment.empty()) {
        throw Error(ErrorCode::InvalidModel, "truncation order list is empty");
    }
    for (int n : m.truncation.per_segment) {
        if (n < 1 || n < m.order) {
            throw Error(ErrorCode::InvalidModel, "truncation order must be at least 1 and at least the equation order");
        }
    }
    const int r = static_cast<int>(m.delays.size());
    walk(*m.rhs, [&](const Expr &e) {
        if (const auto *s = std::get_if<node::State>(&e.node)) {
            if (s->delay > r) {
                throw Error(ErrorCode::UnknownDelayIndex,
                            "delay index " + std::to_string(s->delay) + " exceeds the " + std::to_string(r)
                                + " declared delays");
            }
            if (s->deriv > m.order) {
                throw Error(ErrorCode::DerivativeOrderTooHigh,
                            "derivative order " + std::to_string(s->deriv) + " exceeds the equation order "
                                + std::to_string(m.order));
            }
        }
    });
    if (contains_state(*m.history)) {
        throw Error(ErrorCode::HistoryContainsState, "history must be a function of t only");
    }
    if (m.initial_values) {
        const auto &ic = *m.initial_values;
        if (static_cast<int>(ic.size()) != m.order) {
            throw Error(ErrorCode::InvalidModel, "ic must list exactly order values");
        }
        ExprPtr phi = m.history;
        for (int i = 0; i < m.order; ++i) {
            const double expected = evaluate(*phi, m.t0);
            if (!(std::abs(ic[static_cast<std::size_t>(i)] - expected) <= 1e-9 * std::max(1.0, std::abs(expected)))) {
                throw Error(ErrorCode::InconsistentInitialValues,
                            "ic[" + std::to_string(i) + "] does not match derivative " + std::to_string(i)
                                + " of the history at t0");
            }
            phi = differentiate(*phi);
        }
    }
}

DelayModel parse_model(std::string_view text)
{
    std::map<std::string, Field, std::less<>> fields;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        ++line_no;
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::SyntaxError, "expected 'key = value'", line_no,
                        static_cast<int>(content.data() - line.data()) + 1);
        }
        const auto key = trim(line.substr(0, eq));
        auto raw_value = line.substr(eq + 1);
        const auto value = trim(raw_value);
        const int value_column = static_cast<int>(value.data() - line.data()) + 1;
        static const std::set<std::string_view> known{"order", "delays", "rhs", "history", "t0", "T", "N", "ic"};
        if (!known.contains(key)) {
            throw Error(ErrorCode::SyntaxError, "unknown key '" + std::string(key) + "'", line_no,
                        static_cast<int>(key.data() - line.data()) + 1);
        }
        if (!fields.emplace(std::string(key), Field{value, line_no, value_column}).second) {
            throw Error(ErrorCode::SyntaxError, "duplicate key '" + std::string(key) + "'", line_no,
                        static_cast<int>(key.data() - line.data()) + 1);
        }
    }

    for (const char *required : {"rhs", "history", "T"}) {
        if (!fields.contains(required)) {
            throw Error(ErrorCode::SyntaxError, std::string("missing required key '") + required + "'", line_no, 1);
        }
    }

    DelayModel m;
    if (const auto it = fields.find("order"); it != fields.end()) {
        m.order = parse_int(it->second, it->second.value);
    }
    if (const auto it = fields.find("delays"); it != fields.end()) {
        for (const auto item : parse_list(it->second)) {
            m.delays.push_back(parse_delay(it->second, item));
        }
    }
    if (const auto it = fields.find("t0"); it != fields.end()) {
        m.t0 = parse_double(it->second, it->second.value);
    }
    {
        const auto &f = fields.at("T");
        m.T = parse_double(f, f.value);
    }
    if (const auto it = fields.find("N"); it != fields.end()) {
        const auto &f = it->second;
        if (!f.value.empty() && f.value.front() == '[') {
            m.truncation.per_segment.clear();
            for (const auto item : parse_list(f)) {
                m.truncation.per_segment.push_back(parse_int(f, item));
            }
        } else {
            m.truncation = TruncationOrders::uniform(parse_int(f, f.value));
        }
    }
    if (const auto it = fields.find("ic"); it != fields.end()) {
        std::vector<double> ic;
        for (const auto item : parse_list(it->second)) {
            ic.push_back(parse_double(it->second, item));
        }
        m.initial_values = std::move(ic);
    }
    m.rhs = parse_quoted_expr(fields.at("rhs"));
    m.history = parse_quoted_expr(fields.at("history"));

    try {
        check_model(m);
    } catch (const Error &e) {
        if (e.line() != 0) {
            throw;
        }
        // Attribute expression-level violations to the offending line.
        const char *key = nullptr;
        switch (e.code()) {
            case ErrorCode::UnknownDelayIndex:
            case ErrorCode::DerivativeOrderTooHigh:
                key = "rhs";
                break;
            case ErrorCode::HistoryContainsState:
                key = "history";
                break;
            case ErrorCode::InconsistentInitialValues:
                key = "ic";
                break;
            default:
                throw;
        }
        const auto &f = fields.at(key);
        std::string msg = e.what();
        msg.erase(0, to_string(e.code()).size() + 2);
        throw Error(e.code(), msg, f.line, f.column);
    }
    return m;
}

std::string_view to_string(ModelClass c) noexcept
{
    switch (c) {
        case ModelClass::Ode:
            return "ODE";
        case ModelClass::Delayed:
            return "delayed";
        case ModelClass::Neutral:
            return "neutral";
    }
    return "unknown";
}

bool ModelReport::blocked() const noexcept
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic &d) { return d.severity == Severity::Blocking; });
}

ModelClass classify(const DelayModel &m)
{
    bool delayed = false;
    bool neutral = false;
    walk(*m.rhs, [&](const Expr &e) {
        if (const auto *s = std::get_if<node::State>(&e.node); s && s->delay > 0) {
            delayed = true;
            neutral = neutral || s->deriv == m.order;
        }
    });
    return neutral ? ModelClass::Neutral : delayed ? ModelClass::Delayed : ModelClass::Ode;
}

ModelReport validate_model(const DelayModel &m)
{
    ModelReport report;
    report.model_class = classify(m);
    bool bad_den = false;
    bool bad_exp = false;
    bool implicit = false;
    walk(*m.rhs, [&](const Expr &e) {
        if (const auto *d = std::get_if<node::Div>(&e.node)) {
            bad_den = bad_den || contains_current_state(*d->den);
        } else if (const auto *x = std::get_if<node::Exp>(&e.node)) {
            bad_exp = bad_exp || contains_current_state(*x->arg);
        } else if (const auto *s = std::get_if<node::State>(&e.node)) {
            implicit = implicit || (s->delay == 0 && s->deriv >= m.order);
        }
    });
    if (bad_den) {
        report.diagnostics.push_back({"UnsupportedCurrentStateDenominator", Severity::Blocking,
                                      "a denominator depends on the current-time unknown"});
    }
    if (bad_exp) {
        report.diagnostics.push_back({"UnsupportedCurrentStateInExp", Severity::Blocking,
                                      "an exp() argument depends on the current-time unknown"});
    }
    if (implicit) {
        report.diagnostics.push_back({"ImplicitRecurrence", Severity::Blocking,
                                      "the right-hand side references the highest derivative at the current time"});
    }
    std::vector<bool> used(m.delays.size(), false);
    walk(*m.rhs, [&](const Expr &e) {
        if (const auto *s = std::get_if<node::State>(&e.node); s && s->delay > 0
                                                                && s->delay <= static_cast<int>(used.size())) {
            used[static_cast<std::size_t>(s->delay - 1)] = true;
        }
    });
    for (std::size_t i = 0; i < used.size(); ++i) {
        if (!used[i]) {
            report.diagnostics.push_back({"UnusedDelay", Severity::Warning,
                                          "delay " + std::to_string(i + 1) + " is never referenced"});
        }
    }
    return report;
}

} // namespace ddedtm
