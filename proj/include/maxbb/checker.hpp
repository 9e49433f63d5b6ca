#pragma once

// Independent verifier for the pseudo-Boolean proof format: replays
// cutting-planes steps, checks RUP by PB propagation, validates redundance
// steps (fresh reification witnesses and empty-witness contradiction
// subproofs), solution steps and the conclusion. Shares only the PB core
// with the solver; no solver state is consulted.

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pb.hpp"
#include "propagate.hpp"
#include "wcnf.hpp"

namespace maxbb {

struct CheckerCensus {
    long long pol = 0, rup = 0, red_reif = 0, red_subproof = 0;
    long long soli = 0, del = 0, subproof_steps = 0;
};

enum class Conclusion { None, Bounds, Unsat };

struct CheckResult {
    bool accepted = false;
    long long line = 0;
    std::string reason;
    Conclusion conclusion = Conclusion::None;
    Coeff bound = 0;
    CheckerCensus census;

    static CheckResult rejection(long long line, std::string why) {
        CheckResult r;
        r.accepted = false;
        r.line = line;
        r.reason = std::move(why);
        return r;
    }
};

class ProofChecker {
public:
    // Incremental interface: feed steps one line at a time. Used both by
    // check_proof below and as the logger's optional live verifier.
    explicit ProofChecker(const PboInstance& inst) : inst_(inst) {
        for (const auto& t : inst.objective.terms()) see_var(t.lit.var());
        for (const auto& c : inst.formula)
            for (const auto& t : c.terms()) see_var(t.lit.var());
    }

    // Returns nullopt while the proof is still acceptable and unfinished;
    // a CheckResult once the proof is finished (accepted) or broken.
    std::optional<CheckResult> feed_line(const std::string& raw) {
        ++line_no_;
        if (done_) {
            auto toks = tokenize(raw);
            if (toks.empty()) return std::nullopt;
            return fail("content after proof end");
        }
        try {
            return handle(raw);
        } catch (const CoeffOverflow&) {
            return fail("coefficient overflow");
        }
    }

    CheckResult finish() {
        if (done_) return *final_;
        return *fail(in_subproof_ ? "unterminated subproof" : "missing conclusion");
    }

    const CheckerCensus& census() const { return census_; }
    long long line_no() const { return line_no_; }

private:
    const PboInstance& inst_;
    PbStore store_;
    long long next_id_ = 1;
    long long line_no_ = 0;
    bool saw_header_ = false, saw_f_ = false;
    bool has_contradiction_ = false;
    bool any_solution_ = false;
    Coeff best_value_ = 0;
    long long live_sic_ = 0;
    std::vector<bool> seen_var_;
    CheckerCensus census_;

    // subproof state
    bool in_subproof_ = false;
    long long watermark_ = 0;
    PBConstraint pending_;
    PBConstraint last_sub_;
    bool any_sub_step_ = false;

    // conclusion state
    bool saw_output_ = false, saw_conclusion_ = false;
    bool done_ = false;
    std::optional<CheckResult> final_;
    Conclusion conclusion_ = Conclusion::None;
    Coeff bound_ = 0;

    void see_var(Var v) {
        if (v >= int(seen_var_.size())) seen_var_.resize(v + 1, false);
        seen_var_[v] = true;
    }
    bool var_seen(Var v) const { return v < int(seen_var_.size()) && seen_var_[v]; }
    void see_constraint(const PBConstraint& c) {
        for (const auto& t : c.terms()) see_var(t.lit.var());
    }

    static std::vector<std::string> tokenize(const std::string& line) {
        std::vector<std::string> toks;
        std::istringstream is(line);
        std::string t;
        while (is >> t) toks.push_back(t);
        return toks;
    }

    std::optional<CheckResult> fail(std::string why) {
        final_ = CheckResult::rejection(line_no_, std::move(why));
        final_->census = census_;
        done_ = true;
        return final_;
    }

    std::optional<CheckResult> accept() {
        CheckResult r;
        r.accepted = true;
        r.conclusion = conclusion_;
        r.bound = bound_;
        r.census = census_;
        final_ = r;
        done_ = true;
        return final_;
    }

    static std::optional<Lit> parse_lit(const std::string& tok) {
        bool neg = !tok.empty() && tok[0] == '~';
        const std::string& body = neg ? tok.substr(1) : tok;
        if (body.size() < 2 || body[0] != 'x') return std::nullopt;
        auto n = Coeff::parse(body.substr(1));
        if (!n || *n < Coeff(1) || !n->fits_longlong() || n->to_longlong() > INT32_MAX / 4)
            return std::nullopt;
        Var v = int(n->to_longlong());
        return neg ? Lit::negative(v) : Lit::positive(v);
    }

    // Parses constraint tokens [from..), stopping after the ';'. Returns
    // the position past the ';' or nullopt on syntax error.
    std::optional<size_t> parse_constraint(const std::vector<std::string>& toks, size_t from,
                                           PBConstraint& out) {
        std::vector<Term> terms;
        size_t i = from;
        bool saw_cmp = false, saw_bound = false;
        Coeff bound = 0;
        for (; i < toks.size(); ++i) {
            const std::string& t = toks[i];
            if (t == ";") {
                if (!saw_bound) return std::nullopt;
                out = PBConstraint::normalized(std::move(terms), bound);
                return i + 1;
            }
            if (t == ">=") {
                if (saw_cmp) return std::nullopt;
                saw_cmp = true;
                continue;
            }
            if (saw_cmp) {
                auto c = Coeff::parse(t);
                if (!c || saw_bound) return std::nullopt;
                bound = *c;
                saw_bound = true;
                continue;
            }
            auto c = Coeff::parse(t);
            if (!c) return std::nullopt;
            ++i;
            if (i >= toks.size()) return std::nullopt;
            auto l = parse_lit(toks[i]);
            if (!l) return std::nullopt;
            terms.push_back({*c, *l});
        }
        return std::nullopt; // no ';'
    }

    long long add_constraint(PBConstraint c) {
        long long id = next_id_++;
        if (c.is_contradiction()) has_contradiction_ = true;
        see_constraint(c);
        store_.add(id, std::move(c));
        return id;
    }

    std::optional<CheckResult> handle(const std::string& raw) {
        auto toks = tokenize(raw);
        if (toks.empty() || toks[0] == "*") return std::nullopt; // blank / comment
        const std::string& kind = toks[0];

        if (!saw_header_) {
            if (raw.find("pseudo-Boolean proof version 2.0") == std::string::npos ||
                kind != "pseudo-Boolean")
                return fail("expected proof header");
            saw_header_ = true;
            return std::nullopt;
        }

        if (in_subproof_) {
            if (kind == "end") return end_subproof();
            if (kind == "pol" || kind == "rup") {
                ++census_.subproof_steps;
                return kind == "pol" ? do_pol(toks, true) : do_rup(toks, true);
            }
            return fail("only pol/rup steps allowed inside a subproof");
        }

        if (!saw_f_) {
            if (kind != "f") return fail("expected formula load 'f <n>'");
            if (toks.size() != 2) return fail("malformed f line");
            auto n = Coeff::parse(toks[1]);
            if (!n || !n->fits_longlong()) return fail("malformed f line");
            if (n->to_longlong() != (long long)inst_.formula.size())
                return fail("f count does not match instance constraint count");
            for (const auto& c : inst_.formula) add_constraint(c);
            saw_f_ = true;
            return std::nullopt;
        }

        if (saw_output_ || saw_conclusion_) return do_conclusion_tail(toks);

        if (kind == "pol") return do_pol(toks, false);
        if (kind == "rup") return do_rup(toks, false);
        if (kind == "red") return do_red(toks);
        if (kind == "soli") return do_soli(toks);
        if (kind == "del") return do_del(toks);
        if (kind == "output") return do_conclusion_tail(toks);
        if (kind == "conclusion") return fail("conclusion before 'output NONE'");
        if (kind == "end") return fail("'end' outside subproof");
        return fail("unknown step kind '" + kind + "'");
    }

    std::optional<CheckResult> do_pol(const std::vector<std::string>& toks, bool sub) {
        struct Entry {
            bool is_num;
            Coeff num;
            PBConstraint c;
        };
        std::vector<Entry> stack;
        auto resolve = [&](Entry& e) -> bool {
            if (!e.is_num) return true;
            if (!e.num.fits_longlong()) return false;
            long long id = e.num.to_longlong();
            if (!store_.contains(id)) return false;
            e.c = store_.get(id);
            e.is_num = false;
            return true;
        };
        for (size_t i = 1; i < toks.size(); ++i) {
            const std::string& t = toks[i];
            if (t == "+") {
                if (stack.size() < 2) return fail("pol stack underflow on '+'");
                Entry b = std::move(stack.back());
                stack.pop_back();
                Entry a = std::move(stack.back());
                stack.pop_back();
                if (!resolve(a) || !resolve(b)) return fail("pol references a dead id");
                stack.push_back({false, 0, PBConstraint::sum(a.c, b.c)});
            } else if (t == "*" || t == "d") {
                if (stack.size() < 2) return fail("pol stack underflow");
                Entry b = std::move(stack.back());
                stack.pop_back();
                Entry a = std::move(stack.back());
                stack.pop_back();
                if (!b.is_num) return fail("pol operand must be an integer");
                if (b.num < Coeff(1)) return fail("pol multiplier/divisor must be positive");
                if (!resolve(a)) return fail("pol references a dead id");
                stack.push_back({false, 0, t == "*" ? a.c.multiplied(b.num) : a.c.divided(b.num)});
            } else if (t == "s") {
                if (stack.empty()) return fail("pol stack underflow on 's'");
                Entry a = std::move(stack.back());
                stack.pop_back();
                if (!resolve(a)) return fail("pol references a dead id");
                stack.push_back({false, 0, a.c.saturated()});
            } else if (t[0] == 'x' || t[0] == '~') {
                auto l = parse_lit(t);
                if (!l) return fail("malformed pol token '" + t + "'");
                stack.push_back({false, 0, PBConstraint::literal_axiom(*l)});
            } else {
                auto n = Coeff::parse(t);
                if (!n || *n < Coeff(0)) return fail("malformed pol token '" + t + "'");
                stack.push_back({true, *n, {}});
            }
        }
        if (stack.size() != 1) return fail("pol must leave exactly one result");
        if (!resolve(stack[0])) return fail("pol references a dead id");
        if (sub)
            last_sub_ = stack[0].c, any_sub_step_ = true;
        ++census_.pol;
        add_constraint(std::move(stack[0].c));
        return std::nullopt;
    }

    std::optional<CheckResult> do_rup(const std::vector<std::string>& toks, bool sub) {
        PBConstraint c;
        auto pos = parse_constraint(toks, 1, c);
        if (!pos || *pos != toks.size()) return fail("malformed rup constraint");
        PBConstraint neg = c.negated();
        for (const auto& t : neg.terms()) store_.ensure_var(t.lit.var());
        auto r = store_.propagate({}, &neg);
        if (!r.conflict) return fail("rup constraint does not propagate to contradiction");
        if (sub)
            last_sub_ = c, any_sub_step_ = true;
        ++census_.rup;
        add_constraint(std::move(c));
        return std::nullopt;
    }

    std::optional<CheckResult> do_red(const std::vector<std::string>& toks) {
        PBConstraint c;
        auto pos = parse_constraint(toks, 1, c);
        if (!pos) return fail("malformed red constraint");
        size_t i = *pos;
        if (i < toks.size() && toks[i] == ";") {
            // proof by contradiction: "red <c> ; ; begin"
            if (i + 2 != toks.size() || toks[i + 1] != "begin")
                return fail("malformed red subproof header");
            pending_ = c;
            watermark_ = next_id_;
            in_subproof_ = true;
            any_sub_step_ = false;
            PBConstraint neg = pending_.negated();
            see_constraint(neg);
            store_.add(next_id_++, std::move(neg));
            return std::nullopt;
        }
        // reification: "red <c> ; x<k> -> 0|1"
        if (i + 3 != toks.size() || toks[i + 1] != "->")
            return fail("red requires a witness or a subproof");
        auto wl = parse_lit(toks[i]);
        if (!wl || wl->negated()) return fail("malformed witness variable");
        if (toks[i + 2] != "0" && toks[i + 2] != "1") return fail("witness value must be 0 or 1");
        bool bit = toks[i + 2] == "1";
        Var v = wl->var();
        if (inst_.objective.is_objective_lit(Lit::positive(v)) ||
            inst_.objective.is_objective_lit(Lit::negative(v)))
            return fail("witness variable occurs in the objective");
        // c restricted to the witness must be a tautology, i.e. the witness
        // literal's coefficient covers the whole degree (eq. reification shapes)
        Coeff cover = c.coeff_of(bit ? Lit::positive(v) : Lit::negative(v));
        if (cover == Coeff(0)) return fail("witness variable does not occur in the constraint");
        if (cover < c.degree()) return fail("constraint is not reification-shaped for the witness");
        // every stored constraint mentioning v must be re-derivable under
        // the witness from the negated claim: trivially true for a fresh v,
        // and true by weakening for the second half of a reification pair
        if (var_seen(v)) {
            PBConstraint neg = c.negated();
            for (long long id : store_.ids_mentioning(v)) {
                PBConstraint sub = restrict_to(store_.get(id), v, bit);
                if (!weakening_entails(neg, sub))
                    return fail("witness variable is not fresh and constraint " +
                                std::to_string(id) + " is not re-derivable under the witness");
            }
        }
        ++census_.red_reif;
        add_constraint(std::move(c));
        return std::nullopt;
    }

    static PBConstraint restrict_to(const PBConstraint& d, Var v, bool bit) {
        std::vector<Term> ts;
        Coeff degree = d.degree();
        for (const auto& t : d.terms()) {
            if (t.lit.var() != v) {
                ts.push_back(t);
                continue;
            }
            if (t.lit.negated() != bit) degree -= t.coeff; // satisfied by the witness
        }
        return PBConstraint::normalized(std::move(ts), degree);
    }

    // sufficient syntactic check that `a` entails `e`: e arises from a by
    // dropping terms or lowering coefficients, paying the drop on the degree
    static bool weakening_entails(const PBConstraint& a, const PBConstraint& e) {
        if (e.is_tautology()) return true;
        Coeff drop = 0;
        for (const auto& t : a.terms()) drop += t.coeff;
        for (const auto& t : e.terms()) {
            Coeff w = a.coeff_of(t.lit);
            if (w < t.coeff) return false;
            drop -= t.coeff;
        }
        return e.degree() <= a.degree() - drop;
    }

    std::optional<CheckResult> end_subproof() {
        if (!any_sub_step_ || !last_sub_.is_contradiction())
            return fail("subproof does not end in a contradiction");
        for (long long id = watermark_; id < next_id_; ++id)
            if (store_.contains(id)) store_.remove(id);
        in_subproof_ = false;
        ++census_.red_subproof;
        add_constraint(std::move(pending_));
        return std::nullopt;
    }

    std::optional<CheckResult> do_soli(const std::vector<std::string>& toks) {
        std::vector<int8_t> val; // by var, default 0
        auto setv = [&](Var v, bool b) {
            if (v >= int(val.size())) val.resize(v + 1, -1);
            if (val[v] >= 0 && val[v] != int(b)) return false;
            val[v] = b ? 1 : 0;
            return true;
        };
        for (size_t i = 1; i < toks.size(); ++i) {
            auto l = parse_lit(toks[i]);
            if (!l) return fail("malformed soli literal '" + toks[i] + "'");
            if (!setv(l->var(), !l->negated())) return fail("contradictory soli literals");
            see_var(l->var());
        }
        auto value = [&](Var v) { return v < int(val.size()) && val[v] == 1 ? 1 : 0; };
        for (long long id = 1; id < next_id_; ++id) {
            if (!store_.contains(id)) continue;
            if (!store_.get(id).satisfied(value))
                return fail("soli assignment violates constraint " + std::to_string(id));
        }
        Coeff v = inst_.objective.value_under(value);
        if (any_solution_ && v >= best_value_)
            return fail("soli does not improve on the best logged value");
        any_solution_ = true;
        best_value_ = v;
        ++census_.soli;
        live_sic_ = add_constraint(inst_.objective.improving_constraint(v - Coeff(1)));
        return std::nullopt;
    }

    std::optional<CheckResult> do_del(const std::vector<std::string>& toks) {
        if (toks.size() != 3 || toks[1] != "id") return fail("malformed del step");
        auto n = Coeff::parse(toks[2]);
        if (!n || !n->fits_longlong() || !store_.contains(n->to_longlong()))
            return fail("del of a dead id");
        store_.remove(n->to_longlong());
        ++census_.del;
        return std::nullopt;
    }

    std::optional<CheckResult> do_conclusion_tail(const std::vector<std::string>& toks) {
        if (!saw_output_) {
            if (toks.size() != 2 || toks[0] != "output" || toks[1] != "NONE")
                return fail("expected 'output NONE'");
            saw_output_ = true;
            return std::nullopt;
        }
        if (!saw_conclusion_) {
            if (toks.empty() || toks[0] != "conclusion") return fail("expected conclusion");
            if (toks.size() == 2 && toks[1] == "UNSAT") {
                if (!has_contradiction_) return fail("UNSAT conclusion without a derived contradiction");
                if (any_solution_) return fail("UNSAT conclusion after a logged solution");
                conclusion_ = Conclusion::Unsat;
            } else if (toks.size() == 4 && toks[1] == "BOUNDS") {
                auto lb = Coeff::parse(toks[2]), ub = Coeff::parse(toks[3]);
                if (!lb || !ub) return fail("malformed bounds");
                if (*lb != *ub) return fail("only exact optimality bounds are accepted");
                if (!any_solution_ || *ub != best_value_)
                    return fail("bound does not match the best logged solution");
                if (!has_contradiction_)
                    return fail("optimality claimed without a derived contradiction");
                conclusion_ = Conclusion::Bounds;
                bound_ = *ub;
            } else {
                return fail("malformed conclusion");
            }
            saw_conclusion_ = true;
            return std::nullopt;
        }
        if (toks.size() == 3 && toks[0] == "end" && toks[1] == "pseudo-Boolean" &&
            toks[2] == "proof")
            return accept();
        return fail("expected 'end pseudo-Boolean proof'");
    }
};

// Whole-proof entry point used by the CLI and tests.
inline CheckResult check_proof(const PboInstance& inst, std::istream& proof) {
    ProofChecker chk(inst);
    std::string line;
    while (std::getline(proof, line)) {
        if (auto r = chk.feed_line(line)) return *r;
    }
    return chk.finish();
}

inline CheckResult check_proof(const PboInstance& inst, const std::string& text) {
    std::istringstream is(text);
    return check_proof(inst, is);
}

} // namespace maxbb
