#pragma once

// MaxSAT instance parsing (2022 MSE WCNF format), serialisation and the
// conversion to the pseudo-Boolean optimisation view.

#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pb.hpp"

namespace maxbb {

struct ParseError : std::runtime_error {
    long long line;
    ParseError(long long line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct SoftClause {
    long long weight;
    std::vector<Lit> lits;
};

struct MaxSatInstance {
    int num_vars = 0;
    std::vector<std::vector<Lit>> hard;
    std::vector<SoftClause> soft;
};

// New-format WCNF only: comment lines "c ...", hard lines "h <lits> 0",
// soft lines "<weight> <lits> 0". Legacy "p wcnf" headers are rejected.
inline MaxSatInstance parse_wcnf(std::istream& in) {
    MaxSatInstance inst;
    std::string line;
    long long line_no = 0;
    constexpr long long kMaxWeight = 1000000000000000000LL; // 1e18
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream is(line);
        std::string tok;
        if (!(is >> tok)) continue; // blank
        if (tok == "c") continue;
        if (tok == "p")
            throw ParseError(line_no, "legacy 'p wcnf' header not supported; "
                                      "use the 2022 format (h/weight prefixed lines)");
        bool is_hard = tok == "h";
        long long weight = 0;
        if (!is_hard) {
            try {
                size_t pos = 0;
                weight = std::stoll(tok, &pos);
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(line_no, "expected 'c', 'h' or a weight, got '" + tok + "'");
            }
            if (weight <= 0) throw ParseError(line_no, "soft clause weight must be positive");
            if (weight > kMaxWeight) throw ParseError(line_no, "weight too large");
        }
        std::vector<Lit> lits;
        bool terminated = false;
        long long v;
        while (is >> v) {
            if (v == 0) {
                terminated = true;
                break;
            }
            long long a = v < 0 ? -v : v;
            if (a > INT32_MAX / 4) throw ParseError(line_no, "variable index too large");
            inst.num_vars = std::max(inst.num_vars, int(a));
            lits.push_back(Lit::from_dimacs(int(v)));
        }
        if (!terminated) throw ParseError(line_no, "clause not terminated by 0");
        std::string rest;
        if (is >> rest) throw ParseError(line_no, "trailing tokens after terminating 0");
        if (is_hard)
            inst.hard.push_back(std::move(lits));
        else {
            if (lits.empty()) throw ParseError(line_no, "empty soft clause");
            inst.soft.push_back({weight, std::move(lits)});
        }
    }
    return inst;
}

inline MaxSatInstance parse_wcnf(const std::string& text) {
    std::istringstream is(text);
    return parse_wcnf(is);
}

inline std::string write_wcnf(const MaxSatInstance& inst) {
    std::ostringstream os;
    for (const auto& c : inst.hard) {
        os << 'h';
        for (Lit l : c) os << ' ' << l.to_dimacs();
        os << " 0\n";
    }
    for (const auto& s : inst.soft) {
        os << s.weight;
        for (Lit l : s.lits) os << ' ' << l.to_dimacs();
        os << " 0\n";
    }
    return os.str();
}

struct PboInstance {
    std::vector<PBConstraint> formula; // all clauses; ids 1..n in the proof
    Objective objective;
    int num_instance_vars = 0; // variables of the WCNF file
    int num_vars = 0;          // including relaxation literals
    // soft clause index -> the objective literal that pays for falsifying it
    std::vector<Lit> soft_cost_lit;
};

// Unit soft clauses contribute the negation of their literal to the
// objective directly; non-unit ones (and units whose complement already
// carries cost) get a fresh relaxation literal appended after all instance
// variables, in soft-clause order. Hard clauses are copied first, so the
// solver and the checker agree on constraint numbering.
inline PboInstance to_pbo(const MaxSatInstance& inst) {
    PboInstance pbo;
    pbo.num_instance_vars = inst.num_vars;
    pbo.num_vars = inst.num_vars;
    for (const auto& c : inst.hard) pbo.formula.push_back(PBConstraint::clause(c));
    for (const auto& s : inst.soft) {
        if (s.lits.size() == 1) {
            Lit cost_lit = ~s.lits[0];
            if (pbo.objective.cost_of(~cost_lit) == 0) {
                if (pbo.objective.cost_of(cost_lit) > 0)
                    pbo.objective.add_to(s.weight, cost_lit);
                else
                    pbo.objective.add(s.weight, cost_lit);
                pbo.soft_cost_lit.push_back(cost_lit);
                continue;
            }
            // both polarities soft: fall through to relaxation
        }
        Lit b = Lit::positive(++pbo.num_vars);
        std::vector<Lit> relaxed = s.lits;
        relaxed.push_back(b);
        pbo.formula.push_back(PBConstraint::clause(relaxed));
        pbo.objective.add(s.weight, b);
        pbo.soft_cost_lit.push_back(b);
    }
    return pbo;
}

} // namespace maxbb
