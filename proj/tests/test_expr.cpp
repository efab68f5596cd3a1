#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "levcross/errors.hpp"
#include "levcross/expr.hpp"

using levcross::errc;
using levcross::error;
using levcross::expr::Expr;

namespace {

// deterministic uniforms in [-3, 3] for property checks
struct MiniRng {
    uint64_t s;
    double next() {
        s += 0x9E3779B97F4A7C15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return (static_cast<double>(z >> 11) / 9007199254740992.0) * 6.0 - 3.0;
    }
};

}  // namespace

TEST_CASE("arithmetic and precedence examples") {
    CHECK(Expr::parse("0.5*x^2 + 1").eval(2.0) == doctest::Approx(3.0));
    CHECK(Expr::parse("exp(-x)").eval(0.0) == doctest::Approx(1.0));
    CHECK(Expr::parse("-x").eval(3.0) == doctest::Approx(-3.0));
    CHECK(Expr::parse("2^3^2").eval(0.0) == doctest::Approx(512.0));  // right assoc
    CHECK(Expr::parse("2^-1").eval(0.0) == doctest::Approx(0.5));
    CHECK(Expr::parse("-2^2").eval(0.0) == doctest::Approx(-4.0));  // ^ binds tighter
    CHECK(Expr::parse("tanh(0*x)").eval(5.0) == doctest::Approx(0.0));
    CHECK(Expr::parse("abs(x)").eval(-2.5) == doctest::Approx(2.5));
    CHECK(Expr::parse(" 1 + 2 * 3 ").eval(0.0) == doctest::Approx(7.0));
}

TEST_CASE("syntax errors carry byte offset and expectation") {
    try {
        Expr::parse("1/(x");
        FAIL("expected a parse error");
    } catch (const error& e) {
        CHECK(e.kind() == errc::validation);
        CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
        CHECK(std::string(e.what()).find("')'") != std::string::npos);
    }
    CHECK_THROWS_AS(Expr::parse(""), error);
    CHECK_THROWS_AS(Expr::parse("2 +"), error);
    CHECK_THROWS_AS(Expr::parse("foo(x)"), error);
    CHECK_THROWS_AS(Expr::parse("1 2"), error);
}

TEST_CASE("domain violations are errors, not NaN") {
    try {
        Expr::parse("log(x)").eval(-1.0);
        FAIL("expected a domain error");
    } catch (const error& e) {
        CHECK(e.kind() == errc::numerical);
        CHECK(std::string(e.what()).find("log") != std::string::npos);
    }
    CHECK_THROWS_AS(Expr::parse("sqrt(-1 - x^2)").eval(1.0), error);
    CHECK_THROWS_AS(Expr::parse("(0*x)^(-1)").eval(2.0), error);
    // 0/0 produces NaN under IEEE; converted at the eval boundary
    CHECK_THROWS_AS(Expr::parse("(0*x)/(0*x)").eval(1.0), error);
}

TEST_CASE("associativity properties at random points") {
    auto lhs1 = Expr::parse("x-0.7-1.3");
    auto rhs1 = Expr::parse("(x-0.7)-1.3");
    auto lhs2 = Expr::parse("1.1^1.3^x");
    auto rhs2 = Expr::parse("1.1^(1.3^x)");
    MiniRng rng{7};
    for (int k = 0; k < 200; ++k) {
        double x = rng.next();
        CHECK(lhs1.eval(x) == doctest::Approx(rhs1.eval(x)).epsilon(1e-12));
        CHECK(lhs2.eval(x) == doctest::Approx(rhs2.eval(x)).epsilon(1e-12));
    }
}

TEST_CASE("print/parse round trip evaluates identically") {
    const char* sources[] = {
        "0.5*x^2 + 1",
        "exp(-x) * tanh(x/3) - sqrt(abs(x) + 2)",
        "1/(1+x^2) + 2^-x",
        "-(x - 1.5)*(x + 2.5)/3.25",
        "log(abs(x) + 1.0e-3) + x^3",
    };
    MiniRng rng{12345};
    for (const char* src : sources) {
        auto e = Expr::parse(src);
        auto round = Expr::parse(e.to_string());
        for (int k = 0; k < 100; ++k) {
            double x = rng.next();
            double a = e.eval(x);
            double b = round.eval(x);
            CHECK(b == doctest::Approx(a).epsilon(1e-12));
        }
    }
}
