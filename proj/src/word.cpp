#include "projlab/word.hpp"

#include "projlab/linalg.hpp"

#include <cctype>
#include <functional>
#include <unordered_map>

namespace projlab {

namespace {

const PowerWord& child(const PowerWord::Factor& f) { return *std::get<1>(f.atom); }
bool is_letter(const PowerWord::Factor& f) { return f.atom.index() == 0; }

bool atoms_equal(const PowerWord::Atom& a, const PowerWord::Atom& b) {
    if (a.index() != b.index()) return false;
    if (a.index() == 0) return std::get<0>(a) == std::get<0>(b);
    const auto& pa = std::get<1>(a);
    const auto& pb = std::get<1>(b);
    return pa == pb || structurally_equal(*pa, *pb);
}

}  // namespace

bool structurally_equal(const PowerWord& a, const PowerWord& b) {
    if (a.factors_.size() != b.factors_.size()) return false;
    if (!(a.length_ == b.length_)) return false;
    for (std::size_t i = 0; i < a.factors_.size(); ++i) {
        if (!(a.factors_[i].exponent == b.factors_[i].exponent)) return false;
        if (!atoms_equal(a.factors_[i].atom, b.factors_[i].atom)) return false;
    }
    return true;
}

PowerWord::PowerWord(int alphabet_size) : alphabet_size_(alphabet_size) {
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    counts_.assign(static_cast<std::size_t>(alphabet_size) + 1, BigNat(0u));
}

PowerWord::PowerWord(int alphabet_size, std::vector<Factor> factors) : PowerWord(alphabet_size) {
    factors_ = std::move(factors);
    canonicalize();
}

PowerWord PowerWord::letter(int alphabet_size, int index) {
    return PowerWord(alphabet_size, {Factor{index, BigNat(1u)}});
}

void PowerWord::canonicalize() {
    std::vector<Factor> out;
    auto push = [&out](Factor f) {
        if (!out.empty() && atoms_equal(out.back().atom, f.atom)) {
            out.back().exponent += f.exponent;
            return;
        }
        out.push_back(std::move(f));
    };
    for (auto& f : factors_) {
        if (f.exponent.is_zero()) throw std::invalid_argument("exponent must be at least 1");
        if (is_letter(f)) {
            int l = std::get<0>(f.atom);
            if (l < 1 || l > alphabet_size_) throw std::invalid_argument("letter index out of range");
            push(std::move(f));
            continue;
        }
        const PowerWord& c = child(f);
        if (!std::get<1>(f.atom)) throw std::invalid_argument("null nested word");
        if (c.max_letter() > alphabet_size_) throw std::invalid_argument("nested word uses letters beyond the alphabet");
        if (c.empty()) continue;
        if (c.factors_.size() == 1) {
            push(Factor{c.factors_[0].atom, c.factors_[0].exponent * f.exponent});
        } else if (f.exponent == BigNat(1u)) {
            for (const auto& g : c.factors_) push(g);
        } else {
            push(std::move(f));
        }
    }
    factors_ = std::move(out);
    length_ = BigNat(0u);
    counts_.assign(static_cast<std::size_t>(alphabet_size_) + 1, BigNat(0u));
    for (const auto& f : factors_) {
        if (is_letter(f)) {
            length_ += f.exponent;
            counts_[static_cast<std::size_t>(std::get<0>(f.atom))] += f.exponent;
        } else {
            const PowerWord& c = child(f);
            length_ += c.length_ * f.exponent;
            for (int l = 1; l <= c.alphabet_size_ && l <= alphabet_size_; ++l)
                if (!c.counts_[static_cast<std::size_t>(l)].is_zero())
                    counts_[static_cast<std::size_t>(l)] += c.counts_[static_cast<std::size_t>(l)] * f.exponent;
        }
    }
}

const BigNat& PowerWord::occurrences(int letter) const {
    if (letter < 1 || letter > alphabet_size_) throw std::invalid_argument("letter index out of range");
    return counts_[static_cast<std::size_t>(letter)];
}

int PowerWord::max_letter() const {
    for (int l = alphabet_size_; l >= 1; --l)
        if (!counts_[static_cast<std::size_t>(l)].is_zero()) return l;
    return 0;
}

std::string PowerWord::to_string() const {
    std::string out;
    for (const auto& f : factors_) {
        if (is_letter(f)) {
            std::string a = "a" + std::to_string(std::get<0>(f.atom));
            out += f.exponent == BigNat(1u) ? a : "(" + a + ")^" + f.exponent.to_string();
        } else {
            out += "(" + child(f).to_string() + ")^" + f.exponent.to_string();
        }
    }
    return out;
}

namespace {

struct Parser {
    std::string_view s;
    std::size_t pos = 0;
    int alphabet;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("word parse error at offset " + std::to_string(pos) + ": " + what);
    }
    PowerWord word(bool nested) {
        std::vector<PowerWord::Factor> fs;
        for (;;) {
            skip();
            if (pos >= s.size()) break;
            char c = s[pos];
            if (c == ')') break;
            if (c == 'a') {
                ++pos;
                std::size_t start = pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                if (start == pos) fail("letter index expected");
                int idx = std::stoi(std::string(s.substr(start, pos - start)));
                if (idx < 1 || idx > alphabet) fail("letter index out of range");
                fs.push_back({idx, BigNat(1u)});
            } else if (c == '(') {
                ++pos;
                PowerWord inner = word(true);
                skip();
                if (pos >= s.size() || s[pos] != ')') fail("')' expected");
                ++pos;
                skip();
                if (pos >= s.size() || s[pos] != '^') fail("'^' expected after ')'");
                ++pos;
                skip();
                std::size_t start = pos;
                while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '*' ||
                                          s[pos] == '^' || s[pos] == '+'))
                    ++pos;
                if (start == pos) fail("exponent expected");
                BigNat e;
                try {
                    e = BigNat::parse(s.substr(start, pos - start));
                } catch (const std::exception& ex) {
                    fail(ex.what());
                }
                if (e.is_zero()) fail("exponent must be at least 1");
                if (inner.empty()) fail("empty group");
                fs.push_back({std::make_shared<const PowerWord>(std::move(inner)), e});
            } else {
                fail(std::string("unexpected character '") + c + "'");
            }
        }
        if (nested && fs.empty()) fail("empty group");
        return PowerWord(alphabet, std::move(fs));
    }
};

}  // namespace

PowerWord PowerWord::parse(std::string_view text, int alphabet_size) {
    Parser p{text, 0, alphabet_size};
    PowerWord w = p.word(false);
    p.skip();
    if (p.pos != text.size()) p.fail("unbalanced ')'");
    return w;
}

PowerWord concat(const PowerWord& w1, const PowerWord& w2) {
    if (w1.alphabet_size() != w2.alphabet_size()) throw std::invalid_argument("concat: alphabet mismatch");
    std::vector<PowerWord::Factor> fs = w1.factors();
    fs.insert(fs.end(), w2.factors().begin(), w2.factors().end());
    return PowerWord(w1.alphabet_size(), std::move(fs));
}

PowerWord power(const PowerWord& w, const BigNat& e) {
    if (e.is_zero()) throw std::invalid_argument("power: exponent must be at least 1");
    if (w.empty()) return w;
    return PowerWord(w.alphabet_size(), {PowerWord::Factor{std::make_shared<const PowerWord>(w), e}});
}

namespace {

using Memo = std::unordered_map<const PowerWord*, std::shared_ptr<const PowerWord>>;

PowerWord rewrite(const PowerWord& w, int alphabet, const std::function<PowerWord::Atom(int)>& map_letter, Memo& memo) {
    std::vector<PowerWord::Factor> fs;
    fs.reserve(w.factors().size());
    for (const auto& f : w.factors()) {
        if (f.atom.index() == 0) {
            fs.push_back({map_letter(std::get<0>(f.atom)), f.exponent});
        } else {
            const auto& ptr = std::get<1>(f.atom);
            auto it = memo.find(ptr.get());
            if (it == memo.end())
                it = memo.emplace(ptr.get(), std::make_shared<const PowerWord>(rewrite(*ptr, alphabet, map_letter, memo))).first;
            fs.push_back({it->second, f.exponent});
        }
    }
    return PowerWord(alphabet, std::move(fs));
}

}  // namespace

PowerWord substitute(const PowerWord& w, int letter, const PowerWord& replacement, int result_alphabet) {
    if (letter < 1 || letter > w.alphabet_size()) throw std::invalid_argument("substitute: letter out of range");
    int alphabet = result_alphabet > 0 ? result_alphabet : std::max(w.alphabet_size(), replacement.alphabet_size());
    auto repl = std::make_shared<const PowerWord>(replacement);
    Memo memo;
    return rewrite(w, alphabet, [&](int l) -> PowerWord::Atom {
        if (l == letter) return repl;
        return l;
    }, memo);
}

PowerWord transpose_letters(const PowerWord& w, int a, int b) {
    Memo memo;
    return rewrite(w, w.alphabet_size(), [&](int l) -> PowerWord::Atom {
        if (l == a) return b;
        if (l == b) return a;
        return l;
    }, memo);
}

BigNat occurrences(const PowerWord& w, int letter) { return w.occurrences(letter); }

namespace {

// Streams maximal letter runs of the flattened word.
class RunStream {
public:
    explicit RunStream(const PowerWord& w) {
        if (!w.empty()) open(&w);
    }
    bool next(int& letter, cpp_int& count) {
        if (!raw(letter, count)) return false;
        int l2;
        cpp_int c2;
        while (peek(l2, c2) && l2 == letter) {
            count += c2;
            has_peek_ = false;
        }
        return true;
    }

private:
    struct Frame {
        const PowerWord* w;
        std::size_t idx;
        cpp_int left;
    };
    std::vector<Frame> stack_;
    bool has_peek_ = false;
    int peek_letter_ = 0;
    cpp_int peek_count_;

    void open(const PowerWord* w) { stack_.push_back({w, 0, w->factors()[0].exponent.to_cpp_int()}); }

    bool peek(int& l, cpp_int& c) {
        if (!has_peek_) {
            if (!pull(peek_letter_, peek_count_)) return false;
            has_peek_ = true;
        }
        l = peek_letter_;
        c = peek_count_;
        return true;
    }
    bool raw(int& l, cpp_int& c) {
        if (has_peek_) {
            has_peek_ = false;
            l = peek_letter_;
            c = peek_count_;
            return true;
        }
        return pull(l, c);
    }
    void advance(Frame& f) {
        ++f.idx;
        if (f.idx < f.w->factors().size()) f.left = f.w->factors()[f.idx].exponent.to_cpp_int();
    }
    bool pull(int& l, cpp_int& c) {
        while (!stack_.empty()) {
            Frame& f = stack_.back();
            if (f.idx >= f.w->factors().size()) {
                stack_.pop_back();
                if (stack_.empty()) return false;
                Frame& parent = stack_.back();
                parent.left -= 1;
                if (parent.left == 0)
                    advance(parent);
                else
                    open(std::get<1>(parent.w->factors()[parent.idx].atom).get());
                continue;
            }
            const auto& fac = f.w->factors()[f.idx];
            if (fac.atom.index() == 0) {
                l = std::get<0>(fac.atom);
                c = f.left;
                advance(f);
                return true;
            }
            open(std::get<1>(fac.atom).get());
        }
        return false;
    }
};

}  // namespace

bool semantically_equal(const PowerWord& a, const PowerWord& b, std::size_t run_budget) {
    if (!(a.length() == b.length())) return false;
    int top = std::max(a.alphabet_size(), b.alphabet_size());
    for (int l = 1; l <= top; ++l) {
        BigNat ca = l <= a.alphabet_size() ? a.occurrences(l) : BigNat(0u);
        BigNat cb = l <= b.alphabet_size() ? b.occurrences(l) : BigNat(0u);
        if (!(ca == cb)) return false;
    }
    if (structurally_equal(a, b)) return true;
    RunStream sa(a), sb(b);
    int la = 0, lb = 0;
    cpp_int ca = 0, cb = 0;
    for (std::size_t steps = 0;; ++steps) {
        if (steps > run_budget) throw std::domain_error("word equality needs more runs than the budget allows");
        if (ca == 0 && !sa.next(la, ca)) return cb == 0 && !sb.next(lb, cb);
        if (cb == 0 && !sb.next(lb, cb)) return false;
        if (la != lb) return false;
        cpp_int m = ca < cb ? ca : cb;
        ca -= m;
        cb -= m;
    }
}

int OperatorAssignment::dimension() const {
    if (ops.empty()) throw std::invalid_argument("empty operator assignment");
    return static_cast<int>(ops.begin()->second.rows());
}

namespace {

Eigen::MatrixXd eval_rec(const PowerWord& w, const OperatorAssignment& a, int d) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(d, d);
    for (const auto& f : w.factors()) {
        Eigen::MatrixXd m;
        if (f.atom.index() == 0) {
            auto it = a.ops.find(std::get<0>(f.atom));
            if (it == a.ops.end()) throw std::invalid_argument("unassigned letter a" + std::to_string(std::get<0>(f.atom)));
            m = f.exponent == BigNat(1u) ? it->second : power_by_squaring(it->second, f.exponent);
        } else {
            const PowerWord& c = child(f);
            auto hint = a.spectral.find(c.to_string());
            if (hint != a.spectral.end()) {
                const Real e = to_real(f.exponent);
                const auto& h = hint->second;
                m = Eigen::MatrixXd::Zero(d, d);
                for (Eigen::Index t = 0; t < h.basis.cols(); ++t) {
                    double lam = to_double(exp(e * h.log_eigenvalues[static_cast<std::size_t>(t)]));
                    if (lam != 0) m += lam * h.basis.col(t) * h.basis.col(t).transpose();
                }
            } else {
                Eigen::MatrixXd inner = eval_rec(c, a, d);
                m = f.exponent == BigNat(1u) ? inner : power_by_squaring(inner, f.exponent);
            }
        }
        result = result * m;
    }
    return result;
}

}  // namespace

Eigen::MatrixXd evaluate(const PowerWord& w, const OperatorAssignment& a) {
    int d = a.dimension();
    for (const auto& [l, m] : a.ops) {
        if (m.rows() != d || m.cols() != d) throw std::invalid_argument("operator dimension mismatch");
        auto c = a.contraction.find(l);
        if (c != a.contraction.end() && c->second && operator_norm(m) > 1 + a.tol)
            throw std::domain_error("letter a" + std::to_string(l) + " declared a contraction but is not");
    }
    for (int l = 1; l <= w.alphabet_size(); ++l)
        if (!w.occurrences(l).is_zero() && !a.ops.count(l)) throw std::invalid_argument("unassigned letter a" + std::to_string(l));
    return eval_rec(w, a, d);
}

ContinuityCheck check_word_continuity(const PowerWord& psi, const OperatorAssignment& a,
                                      const OperatorAssignment& b, const Eigen::MatrixXd& e) {
    const double tol = a.tol;
    auto require = [&](const OperatorAssignment& s, const char* name) {
        for (const auto& [l, m] : s.ops) {
            double n = operator_norm(m);
            if (n > 1 + tol)
                throw PreconditionError(std::string(name) + ": a" + std::to_string(l) + " is not a contraction", n);
            double comm = operator_norm(m * e - e * m);
            if (comm > tol)
                throw PreconditionError(std::string(name) + ": a" + std::to_string(l) + " does not commute with E", comm);
        }
    };
    double ne = operator_norm(e);
    if (ne > 1 + tol) throw PreconditionError("E is not a contraction", ne);
    require(a, "A");
    require(b, "B");
    ContinuityCheck out;
    out.lhs = operator_norm(evaluate(psi, a) * e - evaluate(psi, b) * e);
    for (int l = 1; l <= psi.alphabet_size(); ++l) {
        const BigNat& n = psi.occurrences(l);
        if (n.is_zero()) continue;
        double d = operator_norm(a.ops.at(l) * e - b.ops.at(l) * e);
        if (d == 0) continue;
        out.rhs += to_double(to_real(n)) * d;
    }
    out.holds = out.lhs <= out.rhs + tol;
    return out;
}

}  // namespace projlab
