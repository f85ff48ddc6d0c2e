#pragma once

#include "bianchi/padic.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace bianchi {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kAllPass = 0, kVerificationFailure = 1, kInputError = 2, kPrecisionExhausted = 3 };

struct EigenvalueEntry {
    unsigned long norm = 0;
    std::string label;
    Q a;
};

struct EigenformRecord {
    long disc_K = 0;
    std::string level;  // informational
    unsigned k = 0;
    unsigned long p = 0;
    Q lam_p, lam_pbar;
    std::vector<EigenvalueEntry> table;

    // derived
    QuadRootPair roots_p, roots_pbar;
    bool complex_roots_p = false, complex_roots_pbar = false;  // lambda^2 < 4 p^{k+1}
    std::vector<std::string> advisories;
};

// Schema or value problem; `field` names the offending key.
struct InputError : std::runtime_error {
    std::string field;
    InputError(const std::string& f, const std::string& what) : std::runtime_error(f + ": " + what), field(f) {}
};

// A command's precondition does not hold for this record.
struct PreconditionError : std::runtime_error {
    std::string condition;
    PreconditionError(std::string c, const std::string& what) : std::runtime_error(what), condition(std::move(c)) {}
};

struct RunConfig {
    unsigned N = 8;              // truncation per variable
    long M = 30;                 // p-adic digits
    unsigned long B = 500;       // Euler bound
    unsigned k_min = 1, k_max = 2;
    std::vector<unsigned long> primes{3};
    unsigned coset_exponent = 3;  // enumerate modulo p^e
    std::string out;
    bool inject_omega_sign_flip = false;  // negative control
    void validate() const;
};

// Rationals accept "a/b", integers, or JSON integers.
Q parse_rational(const Json& v, const std::string& field);
EigenformRecord parse_eigenform_json(const Json& j);
EigenformRecord parse_eigenform_text(const std::string& text);
EigenformRecord parse_eigenform(const std::string& path);

struct Report {
    Json body;
    int exit_code = kAllPass;
};

Report cmd_verify_identities(const RunConfig& cfg);
Report cmd_stabilize(const EigenformRecord& rec, const RunConfig& cfg);
Report cmd_theta(const EigenformRecord& rec, const RunConfig& cfg);
Report cmd_adjoint_l(const EigenformRecord& rec, const RunConfig& cfg);
Report cmd_slopes(unsigned k, unsigned long p, const RunConfig& cfg);
Report cmd_amice_check(const RunConfig& cfg);

// Valuations of the two roots of X^2 - lam X + p^{k+1}, smaller first.
std::pair<Q, Q> root_valuations(const Q& lam, unsigned long p, unsigned k);

// Two-space indented JSON with a trailing newline; byte-stable for equal input.
std::string render(const Report& r);
// Plain text: one line per record.
std::string render_text(const Report& r);

}  // namespace bianchi
