#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bianchi/adjoint_l.hpp"
#include "bianchi/cli_io.hpp"

#include <sys/wait.h>

#include <complex>
#include <cstdlib>
#include <fstream>
#include <random>

using namespace bianchi;

namespace {

const char* kMinimal = R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 10, "lambda_pbar": "-3/2"})";

// disc -4: 2 ramified, 3 inert (norm 9), 5 split
const char* kComplete = R"({"disc_K": -4, "level": "1", "p": 5, "k": 2, "lambda_p": 10, "lambda_pbar": -4,
  "eigenvalues": [{"norm": 2, "label": "2.1", "a": 3}, {"norm": 5, "label": "5.1", "a": 10},
                  {"norm": 5, "label": "5.2", "a": -4}, {"norm": 9, "label": "9.1", "a": "7/2"}]})";

std::string field_of(const std::string& text) {
    try {
        parse_eigenform_text(text);
    } catch (const InputError& e) {
        return e.field;
    }
    return "";
}

int run_cli(const std::string& args) {
    int st = std::system((std::string(BIANCHI_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_tmp(const std::string& name, const std::string& text) {
    std::string path = std::string("/tmp/bianchi_cli_test_") + name + ".json";
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("parsing") {
    SUBCASE("minimal record") {
        EigenformRecord r = parse_eigenform_text(kMinimal);
        CHECK(r.disc_K == -4);
        CHECK(r.p == 5);
        CHECK(r.k == 2);
        CHECK(r.lam_pbar == Q(-3, 2));
        CHECK(r.table.empty());
        CHECK(r.level == "1");
        CHECK(r.roots_p.norm == 125);
        CHECK(r.roots_p.discriminant == 100 - 500);
        CHECK(r.advisories.empty());
    }
    SUBCASE("complex root flag is lambda^2 < 4 p^{k+1}") {
        std::mt19937_64 rng(2);
        std::uniform_int_distribution<long> d(-80, 80);
        for (int n = 0; n < 100; ++n) {
            const long a = d(rng);
            Json j = Json::parse(kMinimal);
            j["lambda_p"] = a;
            EigenformRecord r = parse_eigenform_json(j);
            CHECK(r.complex_roots_p == (a * a < 4 * 125));
        }
    }
    SUBCASE("rejections") {
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 1})") == "lambda_pbar");
        CHECK(field_of(R"({"disc_K": -4, "p": 3, "k": 2, "lambda_p": 1, "lambda_pbar": 1})") == "p");
        CHECK(field_of(R"({"disc_K": -12, "p": 5, "k": 2, "lambda_p": 1, "lambda_pbar": 1})") == "disc_K");
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": "1/0", "lambda_pbar": 1})") == "lambda_p");
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 1.5, "lambda_pbar": 1})") == "lambda_p");
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 1, "lambda_pbar": 1, "x": 0})") == "x");
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 1, "lambda_pbar": 1,
            "eigenvalues": [{"norm": 5, "label": "a", "a": 1}, {"norm": 5, "label": "a", "a": 2}]})") ==
              "eigenvalues[1].label");
        CHECK(field_of(R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 1, "lambda_pbar": 1,
            "eigenvalues": [{"norm": 6, "label": "a", "a": 1}]})") == "eigenvalues[0].norm");
        CHECK(field_of("{\n\"disc_K\": -4,\n\"p\": }") == "line 3");
    }
    SUBCASE("level advisory") {
        Json j = Json::parse(kMinimal);
        j["level"] = "10";
        CHECK(parse_eigenform_json(j).advisories.size() == 1);
        j["level"] = "(2+i)";
        CHECK(parse_eigenform_json(j).advisories.size() == 1);
        j["level"] = "3";
        CHECK(parse_eigenform_json(j).advisories.empty());
    }
}

TEST_CASE("root valuations") {
    // rational roots r and P/r: valuations read off directly
    std::mt19937_64 rng(4);
    for (unsigned long p : {3ul, 5ul, 7ul})
        for (unsigned k = 0; k <= 4; ++k)
            for (int n = 0; n < 20; ++n) {
                const unsigned long e = rng() % (k + 2);
                const long u = long(rng() % 20) + 1;
                if (u % long(p) == 0) continue;
                const Q P(zpow(Z(p), k + 1));
                const Q r1 = Q(zpow(Z(p), e)) * u, r2 = P / r1;
                Q lam = r1 + r2;
                lam.canonicalize();
                if (lam == 0) continue;
                auto [a, b] = root_valuations(lam, p, k);
                Q lo(long(std::min<long>(e, long(k) + 1 - long(e)))), hi = Q(long(k) + 1) - lo;
                if (2 * long(e) == long(k) + 1) {
                    // equal valuations: cancellation can only raise v(lam)
                    CHECK(a == Q(long(k) + 1, 2));
                    CHECK(b == a);
                } else {
                    CHECK(a == lo);
                    CHECK(b == hi);
                }
            }
    CHECK(root_valuations(0, 3, 2) == std::make_pair(Q(3, 2), Q(3, 2)));
}

TEST_CASE("stabilize") {
    EigenformRecord r = parse_eigenform_text(kMinimal);
    Report rep = cmd_stabilize(r, RunConfig{});
    CHECK(rep.exit_code == kAllPass);
    REQUIRE(rep.body["stabilizations"].size() == 4);
    for (const auto& s : rep.body["stabilizations"]) {
        CHECK(s["vector"].size() == 4);
        CHECK(s["vector"][0] == "1");
    }
    for (const auto& rec : rep.body["records"]) CHECK(rec["ok"] == true);
    // slopes of the roots: v(10) = 1 at frakp, v(-3/2) = 0 at frakpbar
    CHECK(rep.body["frakp"]["root_valuations"] == Json::array({"1", "2"}));
    CHECK(rep.body["frakpbar"]["root_valuations"] == Json::array({"0", "3"}));
    CHECK(rep.body["stabilizations"][0]["noncritical"] == true);
    CHECK(rep.body["stabilizations"][3]["noncritical"] == false);  // slope 3 = k + 1
}

TEST_CASE("theta") {
    SUBCASE("refusal at lambda = 0") {
        Json j = Json::parse(kMinimal);
        j["lambda_pbar"] = 0;
        try {
            cmd_theta(parse_eigenform_json(j), RunConfig{});
            FAIL("expected refusal");
        } catch (const PreconditionError& e) {
            CHECK(e.condition == "Hecke eigenvalues at p are nonzero");
        }
    }
    SUBCASE("rational roots give exact values") {
        // X^2 - 130 X + 625 at p = 5, k = 3: roots 125 and 5
        Json j{{"disc_K", -4}, {"p", 5}, {"k", 3}, {"lambda_p", 130}, {"lambda_pbar", 626}};
        Report rep = cmd_theta(parse_eigenform_json(j), RunConfig{});
        REQUIRE(rep.body["theta"].size() == 4);
        for (const auto& t : rep.body["theta"]) {
            REQUIRE(t.contains("exact"));
            Q x;
            x.set_str(t["exact"].get<std::string>(), 10);
            x.canonicalize();
            CHECK(std::stod(t["numeric"].get<std::string>()) == doctest::Approx(x.get_d()).epsilon(1e-12));
            CHECK(t["derived_pairing_vanishes"] == true);
        }
    }
}

TEST_CASE("adjoint-l") {
    SUBCASE("missing ideals") {
        RunConfig cfg;
        cfg.B = 20;
        Report rep = cmd_adjoint_l(parse_eigenform_text(kComplete), cfg);
        CHECK(rep.exit_code == kInputError);
        CHECK(rep.body["missing"].size() == 4);
    }
    SUBCASE("assembled values") {
        RunConfig cfg;
        cfg.B = 10;
        EigenformRecord r = parse_eigenform_text(kComplete);
        Report rep = cmd_adjoint_l(r, cfg);
        CHECK(rep.exit_code == kAllPass);
        CHECK(rep.body["factors"] == 4);
        CHECK(rep.body["iwahori_index"] == 36);
        CHECK(rep.body["d_infinity"]["coefficient"] == "351/2");
        std::vector<EulerData> d;
        for (const auto& e : r.table) d.push_back(EulerData::make(e.label, e.norm, e.a, 2));
        PartialL L = partial_adjoint_l(d, 1.0, 10, -4);
        CHECK(std::stod(rep.body["partial_value"].get<std::string>()) == doctest::Approx(L.value).epsilon(1e-15));
        for (const auto& pr : rep.body["pairings"]) {
            REQUIRE(pr.contains("pairing_real"));
            const double v = std::stod(pr["pairing_real"]["value"].get<std::string>());
            const double lo = std::stod(pr["pairing_real"]["lower"].get<std::string>());
            const double hi = std::stod(pr["pairing_real"]["upper"].get<std::string>());
            CHECK(lo <= v);
            CHECK(v <= hi);
        }
    }
    SUBCASE("k = 0 refused") {
        Json j = Json::parse(kMinimal);
        j["k"] = 0;
        CHECK_THROWS_AS(cmd_adjoint_l(parse_eigenform_json(j), RunConfig{}), PreconditionError);
    }
}

TEST_CASE("slopes") {
    RunConfig cfg;
    cfg.N = 8;
    Report rep = cmd_slopes(2, 3, cfg);
    CHECK(rep.exit_code == kAllPass);
    CHECK(rep.body["noncritical_slopes"] == Json::array({"2"}));
    CHECK(rep.body["certified_below_k_plus_1"] == true);
    // U_p is triangular with diagonal p^{|i|+2}: slope 2 + s has multiplicity min(s, 2N - s) + 1
    for (const auto& s : rep.body["segments"]) {
        const long sl = std::stol(s["slope"].get<std::string>()) - 2;
        CHECK(s["length"] == std::min<long>(sl, 16 - sl) + 1);
    }
}

TEST_CASE("verify-identities") {
    RunConfig cfg;
    cfg.k_min = 1;
    cfg.k_max = 2;
    Report rep = cmd_verify_identities(cfg);
    // the printed T representatives and the literal key identity do not hold
    CHECK(rep.exit_code == kVerificationFailure);
    CHECK(rep.body["all_pass"] == false);
    bool corrected_ok = false, matrix_ok = true;
    for (const auto& r : rep.body["records"]) {
        const std::string name = r["name"];
        if (name.find("corrected") != std::string::npos) corrected_ok = r["ok"];
        if (name.find("M_U_p = M_U_frakp M_U_frakpbar") != std::string::npos) matrix_ok = matrix_ok && r["ok"];
        CHECK(!r["anchor"].get<std::string>().empty());
        if (r["ok"] == true) CHECK(r["residual"] == "0");
    }
    CHECK(corrected_ok);
    CHECK(matrix_ok);
    REQUIRE(rep.body["gram"].contains("p=3,k=1"));
    CHECK(rep.body["gram"]["p=3,k=1"].size() == 4);
    CHECK(rep.body["gram"]["p=3,k=1"][0][0] == "1");

    SUBCASE("negative control") {
        cfg.inject_omega_sign_flip = true;
        Report bad = cmd_verify_identities(cfg);
        bool seen = false;
        for (const auto& r : bad.body["records"])
            if (r["name"].get<std::string>().find("sign flipped") != std::string::npos) {
                seen = true;
                CHECK(r["ok"] == false);
            }
        CHECK(seen);
    }
    SUBCASE("deterministic") { CHECK(render(cmd_verify_identities(cfg)) == render(rep)); }
}

TEST_CASE("amice-check") {
    Report rep = cmd_amice_check(RunConfig{});
    CHECK(rep.exit_code == kAllPass);
    CHECK(rep.body["records"].size() == 8);
    CHECK(render_text(rep).find("FAIL") == std::string::npos);
}

TEST_CASE("config validation") {
    RunConfig c;
    c.primes = {4};
    CHECK_THROWS_AS(c.validate(), InputError);
    c = RunConfig{};
    c.k_min = 3;
    c.k_max = 1;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("command-line exit codes") {
    const std::string minimal = write_tmp("minimal", kMinimal);
    const std::string bad = write_tmp("bad", R"({"disc_K": -4, "p": 3, "k": 2, "lambda_p": 1, "lambda_pbar": 1})");
    const std::string zero = write_tmp("zero", R"({"disc_K": -4, "p": 5, "k": 2, "lambda_p": 0, "lambda_pbar": 1})");
    CHECK(run_cli("stabilize --input " + minimal) == 0);
    CHECK(run_cli("stabilize --input " + bad) == 2);
    CHECK(run_cli("theta --input " + zero) == 2);
    CHECK(run_cli("theta --input /nonexistent/file.json") == 2);
    CHECK(run_cli("slopes --p 3 --k 2 --trunc 6") == 0);
    CHECK(run_cli("amice-check") == 0);
    CHECK(run_cli("verify-identities --k-min 1 --k-max 1") == 1);
    CHECK(run_cli("no-such-command") == 2);
}
