#pragma once

// Literals, normalized pseudo-Boolean constraints and the cutting-planes
// algebra shared by the solver, the proof logger and the proof checker.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace maxbb {

using Var = int; // 1-based

struct CoeffOverflow : std::runtime_error {
    CoeffOverflow() : std::runtime_error("coefficient arithmetic overflow") {}
};

// Checked 128-bit signed integer. Theorem-1 style derivations multiply
// clause weights up to the total objective weight, so arithmetic either
// succeeds exactly or throws; it never wraps.
class Coeff {
public:
    Coeff() = default;
    Coeff(long long x) : v_(x) {}

    static Coeff raw(__int128 v) { Coeff c; c.v_ = v; return c; }
    __int128 value() const { return v_; }

    friend Coeff operator+(Coeff a, Coeff b) {
        __int128 r;
        if (__builtin_add_overflow(a.v_, b.v_, &r)) throw CoeffOverflow{};
        return raw(r);
    }
    friend Coeff operator-(Coeff a, Coeff b) {
        __int128 r;
        if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw CoeffOverflow{};
        return raw(r);
    }
    friend Coeff operator*(Coeff a, Coeff b) {
        __int128 r;
        if (__builtin_mul_overflow(a.v_, b.v_, &r)) throw CoeffOverflow{};
        return raw(r);
    }
    Coeff operator-() const { return Coeff(0) - *this; }
    Coeff& operator+=(Coeff b) { *this = *this + b; return *this; }
    Coeff& operator-=(Coeff b) { *this = *this - b; return *this; }

    // ceil(a / b) for a >= 0, b >= 1
    Coeff ceil_div(Coeff b) const {
        assert(b.v_ >= 1 && v_ >= 0);
        return raw((v_ + b.v_ - 1) / b.v_);
    }

    friend bool operator==(Coeff a, Coeff b) { return a.v_ == b.v_; }
    friend auto operator<=>(Coeff a, Coeff b) { return a.v_ <=> b.v_; }

    bool fits_longlong() const {
        return v_ >= INT64_MIN && v_ <= INT64_MAX;
    }
    long long to_longlong() const {
        if (!fits_longlong()) throw CoeffOverflow{};
        return static_cast<long long>(v_);
    }

    std::string str() const {
        if (v_ == 0) return "0";
        __int128 x = v_ < 0 ? -v_ : v_;
        std::string s;
        while (x > 0) { s.push_back(char('0' + int(x % 10))); x /= 10; }
        if (v_ < 0) s.push_back('-');
        std::reverse(s.begin(), s.end());
        return s;
    }
    // Returns nullopt on malformed input or magnitude beyond ~38 digits.
    static std::optional<Coeff> parse(std::string_view s) {
        if (s.empty()) return std::nullopt;
        bool neg = false;
        size_t i = 0;
        if (s[0] == '+' || s[0] == '-') { neg = s[0] == '-'; i = 1; }
        if (i == s.size()) return std::nullopt;
        __int128 v = 0;
        const __int128 limit = (__int128(1) << 120);
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
            if (v > limit) return std::nullopt;
        }
        return raw(neg ? -v : v);
    }

private:
    __int128 v_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Coeff c) { return os << c.str(); }

// A literal is a variable or its negation; encoded as 2*var (positive)
// or 2*var+1 (negated) so it can index watch and occurrence lists.
struct Lit {
    int code = 0; // 0/1 unused; var >= 1

    Lit() = default;
    static Lit positive(Var v) { assert(v >= 1); return Lit{2 * v}; }
    static Lit negative(Var v) { assert(v >= 1); return Lit{2 * v + 1}; }
    // From DIMACS-style signed int: 3 -> x3, -3 -> ~x3
    static Lit from_dimacs(int s) { return s > 0 ? positive(s) : negative(-s); }

    Var var() const { return code >> 1; }
    bool negated() const { return code & 1; }
    Lit operator~() const { return Lit{code ^ 1}; }
    int to_dimacs() const { return negated() ? -var() : var(); }
    bool defined() const { return code >= 2; }

    friend bool operator==(Lit a, Lit b) { return a.code == b.code; }
    friend auto operator<=>(Lit a, Lit b) { return a.code <=> b.code; }

    std::string str() const { return (negated() ? "~x" : "x") + std::to_string(var()); }

private:
    explicit Lit(int c) : code(c) {}
    friend struct LitFromCode;
};

struct LitFromCode {
    static Lit make(int code) { Lit l; l.code = code; return l; }
};

inline Lit lit_from_code(int code) { return LitFromCode::make(code); }

struct Term {
    Coeff coeff;
    Lit lit;
};

// Normalized PB constraint: sum of positive-coefficient terms over distinct
// variables, compared with >= against a non-negative degree. The textual
// form shared with the proof format is "+3 x1 +5 ~x2 >= 2 ;".
class PBConstraint {
public:
    PBConstraint() = default; // 0 >= 0

    enum class Cmp { Geq, Leq };

    static PBConstraint normalized(std::vector<Term> terms, Coeff bound, Cmp cmp = Cmp::Geq) {
        if (cmp == Cmp::Leq) {
            for (auto& t : terms) t.coeff = -t.coeff;
            bound = -bound;
        }
        PBConstraint c;
        c.terms_ = std::move(terms);
        c.degree_ = bound;
        c.normalize();
        return c;
    }

    static PBConstraint clause(const std::vector<Lit>& lits) {
        std::vector<Term> ts;
        ts.reserve(lits.size());
        for (Lit l : lits) ts.push_back({Coeff(1), l});
        return normalized(std::move(ts), Coeff(1));
    }

    static PBConstraint literal_axiom(Lit l) {
        return normalized({{Coeff(1), l}}, Coeff(0));
    }

    static PBConstraint contradiction() { return normalized({}, Coeff(1)); }

    const std::vector<Term>& terms() const { return terms_; }
    Coeff degree() const { return degree_; }

    bool is_tautology() const { return degree_ == Coeff(0); }
    bool is_contradiction() const { return terms_.empty() && degree_ > Coeff(0); }
    bool is_clause() const {
        if (degree_ != Coeff(1)) return false;
        for (const auto& t : terms_)
            if (t.coeff != Coeff(1)) return false;
        return true;
    }

    Coeff coeff_sum() const {
        Coeff s = 0;
        for (const auto& t : terms_) s += t.coeff;
        return s;
    }
    Coeff max_coeff() const {
        Coeff m = 0;
        for (const auto& t : terms_) m = std::max(m, t.coeff);
        return m;
    }
    Coeff coeff_of(Lit l) const {
        for (const auto& t : terms_) {
            if (t.lit == l) return t.coeff;
            if (t.lit.var() > l.var()) break;
        }
        return 0;
    }

    // Satisfied by exactly the assignments violating *this.
    PBConstraint negated() const {
        // not(sum >= A)  <=>  sum <= A-1
        return normalized(terms_, degree_ - Coeff(1), Cmp::Leq);
    }

    PBConstraint multiplied(Coeff k) const {
        if (k < Coeff(1)) throw std::invalid_argument("multiplier must be >= 1");
        std::vector<Term> ts = terms_;
        for (auto& t : ts) t.coeff = t.coeff * k;
        return normalized(std::move(ts), degree_ * k);
    }

    PBConstraint divided(Coeff k) const {
        if (k < Coeff(1)) throw std::invalid_argument("divisor must be >= 1");
        std::vector<Term> ts = terms_;
        for (auto& t : ts) t.coeff = t.coeff.ceil_div(k);
        return normalized(std::move(ts), degree_.ceil_div(k));
    }

    PBConstraint saturated() const {
        std::vector<Term> ts = terms_;
        for (auto& t : ts) t.coeff = std::min(t.coeff, degree_);
        return normalized(std::move(ts), degree_);
    }

    static PBConstraint sum(const PBConstraint& a, const PBConstraint& b) {
        std::vector<Term> ts;
        ts.reserve(a.terms_.size() + b.terms_.size());
        ts.insert(ts.end(), a.terms_.begin(), a.terms_.end());
        ts.insert(ts.end(), b.terms_.begin(), b.terms_.end());
        return normalized(std::move(ts), a.degree_ + b.degree_);
    }

    // value(v): 1 true, 0 false, -1 unassigned. Satisfied iff the
    // satisfiable-side weight reaches the degree no matter how the
    // unassigned variables go (i.e. evaluates as a total assignment when
    // everything is assigned).
    template <typename ValueFn>
    bool satisfied(ValueFn&& value) const {
        Coeff got = 0;
        for (const auto& t : terms_) {
            int v = value(t.lit.var());
            if (v < 0) continue;
            if ((v == 1) != t.lit.negated()) got += t.coeff;
        }
        return got >= degree_;
    }

    friend bool operator==(const PBConstraint& a, const PBConstraint& b) {
        if (a.degree_ != b.degree_ || a.terms_.size() != b.terms_.size()) return false;
        for (size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].lit != b.terms_[i].lit || a.terms_[i].coeff != b.terms_[i].coeff)
                return false;
        return true;
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& t : terms_)
            os << '+' << t.coeff.str() << ' ' << t.lit.str() << ' ';
        os << ">= " << degree_.str() << " ;";
        return os.str();
    }

    // Parses the canonical textual form; accepts '-' coefficients and
    // renormalizes. Returns nullopt on malformed input.
    static std::optional<PBConstraint> parse(std::string_view text);

private:
    std::vector<Term> terms_;
    Coeff degree_ = 0;

    void normalize() {
        // negative coefficients flip the literal:  -a*l == a*~l - a
        for (auto& t : terms_) {
            if (t.coeff < Coeff(0)) {
                t.coeff = -t.coeff;
                t.lit = ~t.lit;
                degree_ += t.coeff;
            }
        }
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
            return a.lit.code < b.lit.code;
        });
        // merge duplicate literals, cancel opposite ones
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (size_t i = 0; i < terms_.size();) {
            Var v = terms_[i].lit.var();
            Coeff pos = 0, neg = 0;
            while (i < terms_.size() && terms_[i].lit.var() == v) {
                (terms_[i].lit.negated() ? neg : pos) += terms_[i].coeff;
                ++i;
            }
            Coeff cancel = std::min(pos, neg);
            pos -= cancel;
            neg -= cancel;
            degree_ -= cancel;
            if (pos > Coeff(0)) out.push_back({pos, Lit::positive(v)});
            if (neg > Coeff(0)) out.push_back({neg, Lit::negative(v)});
        }
        terms_ = std::move(out);
        if (degree_ <= Coeff(0)) degree_ = 0;
    }
};

// Linear objective to minimise: strictly positive costs over pairwise
// distinct literals, never on both polarities of a variable.
class Objective {
public:
    void add(long long cost, Lit l) {
        assert(cost > 0 && cost_of(l) == 0 && cost_of(~l) == 0);
        terms_.push_back({cost, l});
        by_code_[l.code] = terms_.size() - 1;
    }
    void add_to(long long extra, Lit l) {
        auto it = by_code_.find(l.code);
        assert(it != by_code_.end());
        long long r;
        if (__builtin_add_overflow(terms_[it->second].cost, extra, &r)) throw CoeffOverflow{};
        terms_[it->second].cost = r;
    }

    struct ObjTerm {
        long long cost;
        Lit lit;
    };
    const std::vector<ObjTerm>& terms() const { return terms_; }
    size_t size() const { return terms_.size(); }

    long long cost_of(Lit l) const {
        auto it = by_code_.find(l.code);
        return it == by_code_.end() ? 0 : terms_[it->second].cost;
    }
    bool is_objective_lit(Lit l) const { return by_code_.count(l.code) != 0; }

    Coeff total() const {
        Coeff s = 0;
        for (const auto& t : terms_) s += Coeff(t.cost);
        return s;
    }

    template <typename ValueFn> // value(var) in {0,1}
    Coeff value_under(ValueFn&& value) const {
        Coeff s = 0;
        for (const auto& t : terms_)
            if ((value(t.lit.var()) == 1) != t.lit.negated()) s += Coeff(t.cost);
        return s;
    }

    // The solution-improving constraint O <= bound, normalized.
    PBConstraint improving_constraint(Coeff bound) const {
        std::vector<Term> ts;
        ts.reserve(terms_.size());
        for (const auto& t : terms_) ts.push_back({Coeff(t.cost), t.lit});
        return PBConstraint::normalized(std::move(ts), bound, PBConstraint::Cmp::Leq);
    }

private:
    std::vector<ObjTerm> terms_;
    std::unordered_map<int, size_t> by_code_;
};

inline std::optional<PBConstraint> PBConstraint::parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string tok;
    std::vector<Term> terms;
    std::optional<Coeff> pending;
    bool saw_cmp = false;
    Coeff bound = 0;
    PBConstraint::Cmp cmp = PBConstraint::Cmp::Geq;
    bool saw_bound = false, saw_semi = false;
    while (is >> tok) {
        if (saw_semi) return std::nullopt;
        if (tok == ";") {
            if (!saw_bound) return std::nullopt;
            saw_semi = true;
            continue;
        }
        if (saw_cmp) {
            auto c = Coeff::parse(tok);
            if (!c || saw_bound) return std::nullopt;
            bound = *c;
            saw_bound = true;
            continue;
        }
        if (tok == ">=" || tok == "<=") {
            if (pending) return std::nullopt;
            cmp = tok == ">=" ? PBConstraint::Cmp::Geq : PBConstraint::Cmp::Leq;
            saw_cmp = true;
            continue;
        }
        if (tok[0] == 'x' || (tok[0] == '~' && tok.size() > 1 && tok[1] == 'x')) {
            bool neg = tok[0] == '~';
            auto num = Coeff::parse(tok.substr(neg ? 2 : 1));
            if (!num || *num < Coeff(1) || !num->fits_longlong() ||
                num->to_longlong() > INT32_MAX / 2 - 1)
                return std::nullopt;
            Var v = int(num->to_longlong());
            if (!pending) return std::nullopt;
            terms.push_back({*pending, neg ? Lit::negative(v) : Lit::positive(v)});
            pending.reset();
            continue;
        }
        auto c = Coeff::parse(tok);
        if (!c || pending) return std::nullopt;
        pending = *c;
    }
    if (!saw_semi || pending) return std::nullopt;
    return PBConstraint::normalized(std::move(terms), bound, cmp);
}

} // namespace maxbb
