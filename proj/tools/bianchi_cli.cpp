// Command-line front end. Exit codes: 0 all pass, 1 verification failure,
// 2 input error, 3 precision exhausted.
#include "bianchi/cli_io.hpp"
#include "bianchi/distributions.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace bianchi;

int main(int argc, char** argv) {
    CLI::App app{"Adjoint pairing and adjoint L-value toolkit for Bianchi eigenforms"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string input;
    bool json = false;
    unsigned long p = 3;
    unsigned k = 2;
    bool flip = false;

    auto common = [&](CLI::App* c) {
        c->add_option("--trunc", cfg.N, "truncation N per variable")->capture_default_str();
        c->add_option("--prec", cfg.M, "p-adic precision M")->capture_default_str();
        c->add_option("--euler-bound", cfg.B, "Euler product bound B")->capture_default_str();
        c->add_option("--out", cfg.out, "write the report to FILE");
        c->add_flag("--json", json, "JSON report (default for record commands)");
    };

    auto* verify = app.add_subcommand("verify-identities", "run the identity suites");
    common(verify);
    verify->add_option("--p", cfg.primes, "primes (repeatable)");
    verify->add_option("--k-min", cfg.k_min)->capture_default_str();
    verify->add_option("--k-max", cfg.k_max)->capture_default_str();
    verify->add_option("--coset-exponent", cfg.coset_exponent, "enumerate modulo p^e")->capture_default_str();
    verify->add_flag("--inject-omega-sign-flip", flip, "negative control");

    std::vector<CLI::App*> record_cmds;
    for (const char* name : {"stabilize", "theta", "adjoint-l"}) {
        auto* c = app.add_subcommand(name);
        common(c);
        c->add_option("--input", input, "eigenform JSON")->required()->check(CLI::ExistingFile);
        record_cmds.push_back(c);
    }
    record_cmds[0]->description("p-stabilizations and slope verdicts");
    record_cmds[1]->description("stabilized pairing factor per (i, j)");
    record_cmds[2]->description("partial adjoint L-value and assembled pairing");

    auto* slopes = app.add_subcommand("slopes", "Newton slopes of the truncated U_p");
    common(slopes);
    slopes->add_option("--p", p)->capture_default_str();
    slopes->add_option("--k", k)->capture_default_str();

    auto* amice = app.add_subcommand("amice-check", "Amice basis valuation suite");
    common(amice);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kInputError;
    }

    Report rep;
    bool records_view = false;
    try {
        cfg.inject_omega_sign_flip = flip;
        if (verify->parsed()) {
            rep = cmd_verify_identities(cfg);
            records_view = true;
        } else if (slopes->parsed()) {
            rep = cmd_slopes(k, p, cfg);
        } else if (amice->parsed()) {
            rep = cmd_amice_check(cfg);
            records_view = true;
        } else {
            EigenformRecord rec = parse_eigenform(input);
            if (record_cmds[0]->parsed()) rep = cmd_stabilize(rec, cfg);
            if (record_cmds[1]->parsed()) rep = cmd_theta(rec, cfg);
            if (record_cmds[2]->parsed()) rep = cmd_adjoint_l(rec, cfg);
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition failed (" << e.condition << "): " << e.what() << "\n";
        return kInputError;
    } catch (const InsufficientPrecision& e) {
        std::cerr << "precision exhausted: " << e.what() << " (need " << e.required << " digits)\n";
        return kPrecisionExhausted;
    }

    const std::string text = (records_view && !json) ? render_text(rep) : render(rep);
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream o(cfg.out);
        if (!o) {
            std::cerr << "cannot write " << cfg.out << "\n";
            return kInputError;
        }
        o << text;
    }
    return rep.exit_code;
}
