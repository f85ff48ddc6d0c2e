#include "bianchi/cli_io.hpp"

#include "bianchi/adjoint_l.hpp"
#include "bianchi/amice.hpp"
#include "bianchi/distributions.hpp"
#include "bianchi/hecke.hpp"
#include "bianchi/stab_pairing.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace bianchi {

namespace {

constexpr const char* kVersion = "1.0.0";

using Cx = std::complex<long double>;

std::string qs(const Q& x) { return q_to_string(x); }

std::string num(long double x) {
    std::ostringstream o;
    o << std::setprecision(18) << x;
    return o.str();
}

std::string cx_string(const Cx& z) {
    if (z.imag() == 0) return num(z.real());
    return num(z.real()) + (z.imag() < 0 ? " - " : " + ") + num(std::fabs(z.imag())) + "i";
}

bool is_prime_power(unsigned long n) {
    if (n < 2) return false;
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            while (n % d == 0) n /= d;
            return n == 1;
        }
    return true;
}

// Root i of X^2 - lam X + P: (lam + (-1)^i sqrt(lam^2 - 4P)) / 2, so root 1 = lam - root 0.
Cx root(const Q& lam, const Q& P, int i) {
    const long double l = lam.get_d();
    Cx s = std::sqrt(Cx(l * l - 4 * (long double)P.get_d(), 0));
    return (Cx(l, 0) + (i == 0 ? s : -s)) / (long double)2;
}

Cx eval_c(const StabScalar& x, const Q& lam, const Q& lamb, const Cx& a, const Cx& b) {
    const auto& c = x.coeffs();
    return Cx(c[0].eval(lam, lamb).get_d()) + Cx(c[1].eval(lam, lamb).get_d()) * a +
           Cx(c[2].eval(lam, lamb).get_d()) * b + Cx(c[3].eval(lam, lamb).get_d()) * a * b;
}

// exact rational root, when the discriminant is a square
bool rational_root(const Q& lam, const Q& P, int i, Q& out) {
    Q d = lam * lam - 4 * P;
    if (d < 0) return false;
    Z n = d.get_num(), m = d.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(m.get_mpz_t())) return false;
    Z rn, rm;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rm.get_mpz_t(), m.get_mpz_t());
    Q s(rn, rm);
    out = (lam + (i == 0 ? s : Q(-s))) / 2;
    out.canonicalize();
    return true;
}

Q P_of(unsigned long p, unsigned k) { return Q(zpow(Z(p), k + 1)); }

struct Recorder {
    Json records = Json::array();
    bool all_ok = true;
    void add(const std::string& anchor, const std::string& name, bool ok, const std::string& residual) {
        records.push_back({{"anchor", anchor}, {"name", name}, {"ok", ok}, {"residual", ok ? "0" : residual}});
        all_ok = all_ok && ok;
    }
};

std::string tag(unsigned long p, unsigned k) { return " (p=" + std::to_string(p) + ", k=" + std::to_string(k) + ")"; }

Json header(const std::string& cmd) { return Json{{"command", cmd}, {"version", kVersion}}; }

}  // namespace

// ---------------------------------------------------------------- input

void RunConfig::validate() const {
    if (N == 0 || M <= 0 || B == 0 || coset_exponent == 0)
        throw InputError("config", "trunc, prec, euler-bound and coset exponent must be positive");
    if (k_min > k_max) throw InputError("config", "k range is empty");
    for (unsigned long p : primes)
        if (p < 3 || !is_prime(p)) throw InputError("config", "primes must be odd primes");
}

Q parse_rational(const Json& v, const std::string& field) {
    if (v.is_number_integer()) return Q(v.get<long>());
    if (!v.is_string()) throw InputError(field, "expected an integer or a rational string \"a/b\"");
    const std::string s = v.get<std::string>();
    Q x;
    if (s.empty() || s.find_first_not_of("-0123456789/") != std::string::npos || x.set_str(s, 10) != 0 ||
        x.get_den() == 0)
        throw InputError(field, "not a rational: \"" + s + "\"");
    x.canonicalize();
    return x;
}

EigenformRecord parse_eigenform_json(const Json& j) {
    if (!j.is_object()) throw InputError("(root)", "expected an object");
    static const std::set<std::string> known{"disc_K", "level", "k", "p", "lambda_p", "lambda_pbar", "eigenvalues"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InputError(key, "unknown field");
    for (const char* req : {"disc_K", "k", "p", "lambda_p", "lambda_pbar"})
        if (!j.contains(req)) throw InputError(req, "missing");
    auto get_int = [&](const char* f) -> long {
        if (!j.at(f).is_number_integer()) throw InputError(f, "expected an integer");
        return j.at(f).get<long>();
    };

    EigenformRecord r;
    r.disc_K = get_int("disc_K");
    if (r.disc_K >= 0 || !is_fundamental_discriminant(r.disc_K))
        throw InputError("disc_K", "must be a negative fundamental discriminant");
    const long k = get_int("k");
    if (k < 0 || k > 64) throw InputError("k", "must lie in [0, 64]");
    r.k = unsigned(k);
    const long p = get_int("p");
    if (p < 3 || !is_prime(static_cast<unsigned long>(p))) throw InputError("p", "must be an odd prime");
    r.p = static_cast<unsigned long>(p);
    if (kronecker_split(r.disc_K, r.p) != Splitting::split)
        throw InputError("p", "p = " + std::to_string(p) + " does not split in K (" +
                                  to_string(kronecker_split(r.disc_K, r.p)) + ")");
    if (j.contains("level")) {
        if (!j.at("level").is_string()) throw InputError("level", "expected a string");
        r.level = j.at("level").get<std::string>();
    } else {
        r.level = "1";
    }
    r.lam_p = parse_rational(j.at("lambda_p"), "lambda_p");
    r.lam_pbar = parse_rational(j.at("lambda_pbar"), "lambda_pbar");

    if (j.contains("eigenvalues")) {
        const Json& t = j.at("eigenvalues");
        if (!t.is_array()) throw InputError("eigenvalues", "expected an array");
        std::set<std::string> labels;
        for (std::size_t n = 0; n < t.size(); ++n) {
            const std::string f = "eigenvalues[" + std::to_string(n) + "]";
            const Json& e = t[n];
            if (!e.is_object() || !e.contains("norm") || !e.contains("label") || !e.contains("a"))
                throw InputError(f, "expected {norm, label, a}");
            for (const auto& [key, _] : e.items())
                if (key != "norm" && key != "label" && key != "a") throw InputError(f + "." + key, "unknown field");
            if (!e.at("norm").is_number_integer() || e.at("norm").get<long>() < 2)
                throw InputError(f + ".norm", "expected an integer >= 2");
            if (!e.at("label").is_string()) throw InputError(f + ".label", "expected a string");
            EigenvalueEntry ent;
            ent.norm = e.at("norm").get<unsigned long>();
            ent.label = e.at("label").get<std::string>();
            ent.a = parse_rational(e.at("a"), f + ".a");
            if (!is_prime_power(ent.norm)) throw InputError(f + ".norm", "not a prime power");
            if (!labels.insert(ent.label).second) throw InputError(f + ".label", "duplicate label " + ent.label);
            r.table.push_back(ent);
        }
    }

    r.roots_p = hecke_poly_rootdata(r.lam_p, r.p, r.k);
    r.roots_pbar = hecke_poly_rootdata(r.lam_pbar, r.p, r.k);
    r.complex_roots_p = r.roots_p.discriminant < 0;
    r.complex_roots_pbar = r.roots_pbar.discriminant < 0;
    // the level is a free-form label; only a plain integer is checked
    if (!r.level.empty() && r.level.find_first_not_of("0123456789") == std::string::npos && r.level.size() < 18) {
        if (std::stoull(r.level) % r.p == 0) r.advisories.push_back("p divides the level " + r.level);
    } else {
        r.advisories.push_back("level \"" + r.level + "\" not checked against p");
    }
    return r;
}

EigenformRecord parse_eigenform_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw InputError("line " + std::to_string(line), e.what());
    }
    return parse_eigenform_json(j);
}

EigenformRecord parse_eigenform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path, "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_eigenform_text(ss.str());
}

std::pair<Q, Q> root_valuations(const Q& lam, unsigned long p, unsigned k) {
    const Q half(long(k) + 1, 2);
    if (lam == 0) return {half, half};
    const Q v(valuation(lam, p));
    if (v >= half) return {half, half};
    return {v, Q(long(k) + 1) - v};
}

// ---------------------------------------------------------------- commands

Report cmd_verify_identities(const RunConfig& cfg) {
    cfg.validate();
    Recorder rec;
    Json gram = Json::object();
    for (unsigned long p : cfg.primes) {
        for (HeckeOp op : {HeckeOp::U_frakp, HeckeOp::U_frakpbar, HeckeOp::U_p, HeckeOp::T_frakp, HeckeOp::T_frakpbar}) {
            const std::string where = to_string(op) + " at p=" + std::to_string(p);
            DecompositionReport d = verify_decomposition(enumerate_coset_reps(op, p), cfg.coset_exponent);
            rec.add("double coset decomposition", where + " (printed representatives)", d.ok(), d.detail);
            if (op == HeckeOp::T_frakp || op == HeckeOp::T_frakpbar) {
                DecompositionReport c = verify_decomposition(corrected_coset_reps(op, p), cfg.coset_exponent);
                rec.add("double coset decomposition", where + " (corrected representatives)", c.ok(), c.detail);
            }
        }
        for (unsigned k = cfg.k_min; k <= cfg.k_max; ++k) {
            const WeightK w = WeightK::parallel(k);
            for (bool second : {false, true}) {
                const std::string which = second ? "U_frakpbar" : "U_frakp";
                Matrix<Q> R = key_identity_residual(second, p, w);
                std::size_t nz = 0;
                for (const auto& x : R.data()) nz += x != 0;
                rec.add("key stabilization identity", which + "(upsilon^* mu) = p^{k+1} mu" + tag(p, k), nz == 0,
                        std::to_string(nz) + " nonzero entries");
                rec.add("key stabilization identity",
                        which + " upsilon^* through Iwahori factors" + tag(p, k),
                        key_factorization_holds(second, p, w), "factorization does not reproduce the operator");
            }
            for (const VerificationRecord& v : verification_report(p, k))
                rec.add("stabilization and pairing suite", v.name, v.ok, v.residual);

            GramSolution g = solve_gram(p, k);
            Json entries = Json::array();
            for (std::size_t a = 0; a < 4; ++a) {
                Json row = Json::array();
                for (std::size_t b = 0; b < 4; ++b) row.push_back(g.G(a, b).to_string());
                entries.push_back(row);
            }
            gram["p=" + std::to_string(p) + ",k=" + std::to_string(k)] = entries;

            if (cfg.inject_omega_sign_flip) {
                HeckeMatrices H = build_hecke_matrices(p, k);
                OperatorMatrix4 om = build_al_matrices(p, k).omega_p;
                om(1, 2) = -om(1, 2);
                GramSolution bad = solve_gram_with(H.U_frakp, H.U_frakpbar, om);
                rec.add("Gram matrix uniqueness", "solution space is one-dimensional, omega_p sign flipped" + tag(p, k),
                        bad.consistent && bad.unique && bad.homogeneous_nullity == 1,
                        "nullity " + std::to_string(bad.homogeneous_nullity) +
                            (bad.consistent ? "" : ", normalized system inconsistent"));
            }
        }
    }
    Report r;
    r.body = header("verify-identities");
    r.body["records"] = rec.records;
    r.body["gram"] = gram;
    r.body["all_pass"] = rec.all_ok;
    r.exit_code = rec.all_ok ? kAllPass : kVerificationFailure;
    return r;
}

Report cmd_stabilize(const EigenformRecord& in, const RunConfig& cfg) {
    cfg.validate();
    const unsigned long p = in.p;
    const unsigned k = in.k;
    const Q P = P_of(p, k);
    Recorder rec;
    Report r;
    r.body = header("stabilize");
    auto prime_data = [&](const Q& lam, const QuadRootPair& rd) {
        auto [v0, v1] = root_valuations(lam, p, k);
        return Json{{"lambda", qs(lam)},
                    {"trace", qs(rd.trace)},
                    {"norm", qs(rd.norm)},
                    {"discriminant", qs(rd.discriminant)},
                    {"complex_roots", rd.discriminant < 0},
                    {"root_valuations", {qs(v0), qs(v1)}}};
    };
    r.body["frakp"] = prime_data(in.lam_p, in.roots_p);
    r.body["frakpbar"] = prime_data(in.lam_pbar, in.roots_pbar);
    const auto vp = root_valuations(in.lam_p, p, k), vq = root_valuations(in.lam_pbar, p, k);

    const Matrix<RatFunc> Up = hecke_class_matrix(HeckeOp::U_p, p, k);
    Json st = Json::array();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            StabVector v = stabilize(i, j, p, k);
            StabScalar ev = alpha_choice(i, p, k) * alphabar_choice(j, p, k);
            StabVector img = apply_class(Up, v);
            bool ok = true;
            for (std::size_t n = 0; n < 4; ++n) ok = ok && img[n] == ev * v[n];
            rec.add("U_p eigenvector", "M_U_p v_(" + std::to_string(i) + "," + std::to_string(j) + ") = alpha alphabar v" +
                                           tag(p, k),
                    ok, "componentwise mismatch");
            const Q va = i == 0 ? vp.first : vp.second, vb = j == 0 ? vq.first : vq.second;
            SlopeVerdict sv = noncritical_slope(va, vb, k);
            Json vec = Json::array();
            for (const auto& c : v) vec.push_back(c.to_string());
            const Cx a = root(in.lam_p, P, i), b = root(in.lam_pbar, P, j);
            st.push_back({{"i", i},
                          {"j", j},
                          {"vector", vec},
                          {"eigenvalue", ev.to_string()},
                          {"eigenvalue_numeric", cx_string(a * b)},
                          {"slopes", {qs(va), qs(vb)}},
                          {"noncritical", sv.noncritical},
                          {"ordinary", sv.ordinary}});
        }
    r.body["stabilizations"] = st;
    r.body["records"] = rec.records;
    r.body["advisories"] = in.advisories;
    r.exit_code = rec.all_ok ? kAllPass : kVerificationFailure;
    return r;
}

namespace {

void require_nonzero_lambdas(const EigenformRecord& in) {
    if (in.lam_p == 0 || in.lam_pbar == 0)
        throw PreconditionError("Hecke eigenvalues at p are nonzero",
                                "lambda at " + std::string(in.lam_p == 0 ? "frakp" : "frakpbar") +
                                    " is 0; the stabilized pairing needs both eigenvalues at p nonzero");
}

struct ThetaValue {
    int i, j;
    Cx value;
    bool exact = false;
    Q exact_value;
    std::string symbolic;
    bool derived_zero = false;
};

std::vector<ThetaValue> theta_values(const EigenformRecord& in) {
    const Q P = P_of(in.p, in.k);
    std::vector<ThetaValue> out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ThetaValue t{i, j, {}, false, 0, {}, false};
            StabScalar th = theta_closed_form(i, j, in.p, in.k);
            t.symbolic = th.to_string();
            t.value = eval_c(th, in.lam_p, in.lam_pbar, root(in.lam_p, P, i), root(in.lam_pbar, P, j));
            Q a, b;
            if (rational_root(in.lam_p, P, i, a) && rational_root(in.lam_pbar, P, j, b)) {
                t.exact = true;
                t.exact_value = th.eval(in.lam_p, in.lam_pbar, a, b);
            }
            t.derived_zero = pair_stabilized(i, j, in.p, in.k).is_zero();
            out.push_back(t);
        }
    return out;
}

}  // namespace

Report cmd_theta(const EigenformRecord& in, const RunConfig& cfg) {
    cfg.validate();
    require_nonzero_lambdas(in);
    Report r;
    r.body = header("theta");
    r.body["p"] = in.p;
    r.body["k"] = in.k;
    Json vals = Json::array();
    for (const ThetaValue& t : theta_values(in)) {
        Json e{{"i", t.i}, {"j", t.j}, {"closed_form", t.symbolic}, {"numeric", cx_string(t.value)}};
        if (t.exact) e["exact"] = qs(t.exact_value);
        e["derived_pairing_vanishes"] = t.derived_zero;
        vals.push_back(e);
    }
    r.body["theta"] = vals;
    r.body["advisories"] = in.advisories;
    return r;
}

Report cmd_adjoint_l(const EigenformRecord& in, const RunConfig& cfg) {
    cfg.validate();
    if (in.k == 0) throw PreconditionError("weight k nonzero", "the adjoint L-value formula needs k != 0");
    require_nonzero_lambdas(in);
    std::vector<EulerData> data;
    for (const auto& e : in.table) data.push_back(EulerData::make(e.label, e.norm, e.a, in.k));
    Report r;
    r.body = header("adjoint-l");
    PartialL L;
    try {
        L = partial_adjoint_l(data, 1.0, cfg.B, in.disc_K);
    } catch (const MissingEulerData& m) {
        r.body["error"] = m.what();
        r.body["missing"] = m.missing;
        r.exit_code = kInputError;
        return r;
    }
    const ArchFactor D = d_infinity(in.k);
    r.body["euler_bound"] = cfg.B;
    r.body["factors"] = L.factors;
    r.body["partial_value"] = num(L.value);
    r.body["log_tail_bound"] = num(L.log_tail);
    r.body["first_order_tail_unbounded"] = L.first_order_unbounded;
    Json hist = Json::array();
    for (const auto& [b, v] : L.history) hist.push_back({{"bound", b}, {"value", num(v)}});
    r.body["history"] = hist;
    r.body["d_infinity"] = {{"coefficient", qs(D.coefficient)}, {"pi_exponent", D.pi_exponent}, {"value", D.digits}};
    r.body["iwahori_index"] = iwahori_index(in.p);
    Json vals = Json::array();
    for (const ThetaValue& t : theta_values(in)) {
        Json e{{"i", t.i}, {"j", t.j}, {"theta", cx_string(t.value)}};
        if (t.value == Cx(0)) {
            e["refused"] = "theta = 0 (trivial zero)";
        } else {
            auto part = [&](double th) {
                AdjointBracket b = assemble_adjoint_value(th, L, in.k, in.disc_K, in.p);
                return Json{{"lower", num(b.lower)}, {"value", num(b.value)}, {"upper", num(b.upper)}};
            };
            e["prefactor"] = qs(assemble_adjoint_value(1.0, L, in.k, in.disc_K, in.p).rational_prefactor) +
                             " * pi^" + std::to_string(D.pi_exponent - 1) + " * theta";
            if (t.value.real() != 0) e["pairing_real"] = part(double(t.value.real()));
            if (t.value.imag() != 0) e["pairing_imag"] = part(double(t.value.imag()));
        }
        vals.push_back(e);
    }
    r.body["pairings"] = vals;
    r.body["advisories"] = in.advisories;
    return r;
}

Report cmd_slopes(unsigned k, unsigned long p, const RunConfig& cfg) {
    cfg.validate();
    if (p < 3 || !is_prime(p)) throw InputError("p", "must be an odd prime");
    Report r;
    r.body = header("slopes");
    r.body["p"] = p;
    r.body["k"] = k;
    r.body["trunc"] = cfg.N;
    r.body["prec"] = cfg.M;
    const Matrix<Q> U = up_moment_matrix(k, p, cfg.N);
    const NewtonPolygon np = char_poly_and_newton(U, p, cfg.M);
    Json segs = Json::array();
    bool below_ok = true;
    for (const auto& s : np.segments) {
        segs.push_back({{"slope", qs(s.slope)}, {"length", s.length}, {"certified", s.certified}});
        if (s.slope < Q(long(k) + 1) && !s.certified) below_ok = false;
    }
    r.body["segments"] = segs;
    Json below = Json::array();
    for (const Q& s : np.slopes_below(Q(long(k) + 1))) below.push_back(qs(s));
    r.body["noncritical_slopes"] = below;
    r.body["margin"] = kDefaultMargin;
    r.body["certified_below_k_plus_1"] = below_ok;
    r.exit_code = below_ok ? kAllPass : kPrecisionExhausted;
    return r;
}

Report cmd_amice_check(const RunConfig& cfg) {
    cfg.validate();
    Recorder rec;
    for (unsigned long p : {3ul, 5ul})
        for (auto [r1, r2] : std::vector<std::pair<unsigned, unsigned>>{{1, 2}, {1, 3}, {2, 3}}) {
            std::size_t bad = 0, n = 0;
            for (unsigned long i = 0; i <= 64; ++i)
                for (unsigned long j : {0ul, 1ul, 7ul, 64ul}) {
                    AmiceIndex idx{i, j};
                    ++n;
                    if (scaling_valuation_factorial(idx, r1, r2, p) != scaling_valuation_floor_sum(idx, r1, r2, p))
                        ++bad;
                }
            rec.add("Amice basis scaling", "factorial quotient = floor sum, p=" + std::to_string(p) + ", r=" +
                                               std::to_string(r1) + ", r'=" + std::to_string(r2),
                    bad == 0, std::to_string(bad) + " of " + std::to_string(n) + " indices differ");
        }
    for (unsigned long p : {3ul, 5ul}) {
        AnalyticCoeffVector f;
        f.p = p;
        for (unsigned long a = 0; a <= 64; a += 5)
            for (unsigned long b = 0; b <= 64; b += 9) f.coeffs[{a, b}] = PAdicNum::from_integer(Z(long(a * 31 + b + 1)), p, 12);
        auto g = embed_cr_into_crprime(f, 2);
        auto h = embed_cr_into_crprime(g.value, 3);
        auto direct = embed_cr_into_crprime(f, 3);
        bool ok = true;
        for (const auto& [i, c] : direct.value.coeffs)
            ok = ok && h.value.coeffs.at(i).to_rational() == c.to_rational() &&
                 h.value.coeffs.at(i).abs_prec() == c.abs_prec();
        rec.add("Amice embeddings", "C^1 -> C^2 -> C^3 equals C^1 -> C^3, p=" + std::to_string(p), ok,
                "coefficients differ");
    }
    Report r;
    r.body = header("amice-check");
    r.body["records"] = rec.records;
    r.body["all_pass"] = rec.all_ok;
    r.exit_code = rec.all_ok ? kAllPass : kVerificationFailure;
    return r;
}

// ---------------------------------------------------------------- output

std::string render(const Report& r) { return r.body.dump(2) + "\n"; }

std::string render_text(const Report& r) {
    if (!r.body.contains("records")) return render(r);
    std::string out;
    for (const auto& rec : r.body.at("records")) {
        out += rec.at("ok").get<bool>() ? "PASS  " : "FAIL  ";
        out += rec.at("anchor").get<std::string>() + ": " + rec.at("name").get<std::string>();
        if (!rec.at("ok").get<bool>()) out += "  [" + rec.at("residual").get<std::string>() + "]";
        out += "\n";
    }
    return out;
}

}  // namespace bianchi
