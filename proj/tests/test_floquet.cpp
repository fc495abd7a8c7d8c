#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "trieig/floquet.hpp"
#include "trieig/perron.hpp"

using namespace trieig;

namespace {

ModelParams table1() { return build_running_example(0.5, 5.0, 1.0, 2.0, 1.0, 6.0); }

/// Test-local matrix exponential by scaling and squaring on the Taylor
/// series; the oracle for constant-coefficient monodromies.
Mat3 expm(const Mat3& M) {
    int s = 0;
    double nrm = row_sum_norm(M);
    while (nrm > 0.25) {
        nrm *= 0.5;
        ++s;
    }
    const double scale = std::ldexp(1.0, -s);
    const Mat3 A = scale * M;
    Mat3 term = Mat3::identity();
    Mat3 sum = Mat3::identity();
    for (int k = 1; k <= 24; ++k) {
        term = (1.0 / k) * (term * A);
        sum = sum + term;
    }
    for (int k = 0; k < s; ++k) sum = sum * sum;
    return sum;
}

double alpha_star_table1() {
    static const double v = optimize_perron(table1()).alpha_star;
    return v;
}

ControlSignal perturbed_square(double mean, double eps, double theta) {
    return ControlSignal::square(mean, eps, theta);
}

} // namespace

TEST_CASE("monodromy against the matrix exponential") {
    const ModelParams p = table1();

    SECTION("constant control") {
        for (double al : {0.7, 3.35, 6.0}) {
            const FloquetResult r = monodromy(p, ControlSignal::constant(al), 1.0);
            const Mat3 E = expm(p.system_matrix(al));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    CHECK(r.monodromy(i, j) == Catch::Approx(E(i, j)).margin(1e-10));
        }
    }

    SECTION("square wave equals the product of two exponentials") {
        const double theta = 1.0;
        const ControlSignal sq = perturbed_square(3.0, 2.0, theta);
        const FloquetResult r = monodromy(p, sq);
        const Mat3 E = expm((theta / 2.0) * p.system_matrix(1.0))
                     * expm((theta / 2.0) * p.system_matrix(5.0));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(r.monodromy(i, j) == Catch::Approx(E(i, j)).margin(1e-9));
    }

    SECTION("short period expands as I + theta (G + mean alpha F)") {
        const double theta = 1e-4;
        const ControlSignal sq = perturbed_square(2.0, 1.0, theta);
        const FloquetResult r = monodromy(p, sq);
        const Mat3 lin = Mat3::identity() + theta * p.system_matrix(2.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(r.monodromy(i, j) == Catch::Approx(lin(i, j)).margin(5e-7));
    }

    SECTION("Liouville: det of the monodromy matches the trace integral") {
        // short period keeps det(Phi) well away from the cancellation floor
        // of a 3x3 determinant with O(1) entries
        const double theta = 0.5;
        const ControlSignal sine = ControlSignal::sine(2.0, 1.0, theta);
        const FloquetResult r = monodromy(p, sine);
        const double liouville = liouville_determinant(p, sine, theta);
        CHECK(det(r.monodromy) == Catch::Approx(liouville).epsilon(1e-7));
    }
}

TEST_CASE("lambda_F reduces to lambda_P for constant controls") {
    const ModelParams p = table1();
    CHECK(lambda_F(p, ControlSignal::constant(3.35)) == Catch::Approx(0.7273).margin(1e-3));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> rate(0.2, 3.0);
    std::uniform_real_distribution<double> ua(0.1, 5.0);
    for (int k = 0; k < 10; ++k) {
        const ModelParams q = build_running_example(rate(rng), rate(rng), rate(rng), rate(rng));
        const double al = ua(rng);
        CHECK(std::abs(lambda_F(q, ControlSignal::constant(al)) - lambda_P(q, al)) <= 1e-8);
    }
}

TEST_CASE("relaxation gamma_i") {
    const double theta = 1.0;

    SECTION("constant input is a fixed point") {
        const PeriodicSamples gi = gamma_i([](double) { return 1.0; }, 2.7, theta);
        for (double v : gi.values) CHECK(v == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("cosine input: damped, phase-shifted cosine") {
        const double mu = 3.0;
        const double w = 2.0 * 3.14159265358979323846 / theta;
        auto gam = [&](double t) { return std::cos(w * t); };
        const PeriodicSamples gi = gamma_i(gam, mu, theta, 8000);
        // analytic solution of gi'/mu + gi = cos(w t):
        // gi(t) = mu^2/(mu^2+w^2) cos(w t) + mu w/(mu^2+w^2) sin(w t)
        const double den = mu * mu + w * w;
        for (int k = 0; k < 8000; k += 257) {
            const double t = theta * k / 8000.0;
            const double exact = (mu * mu * std::cos(w * t) + mu * w * std::sin(w * t)) / den;
            CHECK(gi.values[k] == Catch::Approx(exact).margin(1e-6));
        }
        // mean square gain: <gi^2> = (1/2) mu^2/(mu^2+w^2)
        const double gain2 = mu * mu / den;
        CHECK(gi.mean_product(gi) == Catch::Approx(0.5 * gain2).margin(1e-6));
    }

    SECTION("projection identity <gamma_i^2> = <gamma gamma_i>") {
        const double mu = 4.1;
        auto gam = [&](double t) { return std::sin(2.0 * 3.14159265358979323846 * t / theta); };
        const PeriodicSamples gi = gamma_i(gam, mu, theta, 20000);
        const PeriodicSamples gs = sample_periodic(gam, theta, 20000);
        CHECK(std::abs(gi.mean_product(gi) - gi.mean_product(gs)) <= 1e-8);
    }

    SECTION("rejects nonpositive relaxation rate") {
        CHECK_THROWS_AS(gamma_i([](double) { return 1.0; }, 0.0, theta), validation_error);
    }
}

TEST_CASE("first directional derivative") {
    const ModelParams p = table1();
    const double as = alpha_star_table1();
    const double theta = 1.0;
    auto sine = [&](double t) { return std::sin(2.0 * 3.14159265358979323846 * t / theta); };
    auto square = [&](double t) { return std::fmod(t, theta) < 0.5 * theta ? 1.0 : -1.0; };

    SECTION("vanishes at the optimum") {
        CHECK(std::abs(first_directional(p, as, sine, theta)) <= 1e-8);
        CHECK(std::abs(first_directional(p, as, square, theta)) <= 1e-8);
    }

    SECTION("vanishes for mean-zero directions at any alpha") {
        CHECK(std::abs(first_directional(p, 1.3, sine, theta)) <= 1e-10);
    }

    SECTION("matches the finite difference of lambda_F") {
        // non-optimal alpha and a direction with nonzero mean
        auto offset_sine = [&](double t) { return 0.7 + sine(t); };
        const double al = 2.0, eps = 1e-4;
        auto lamF_eps = [&](double e) {
            std::vector<double> v(4096);
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = al + e * offset_sine(theta * i / v.size());
            return lambda_F(p, ControlSignal::periodic(std::move(v), theta, Interp::linear));
        };
        const double fd = (lamF_eps(eps) - lamF_eps(-eps)) / (2.0 * eps);
        CHECK(first_directional(p, al, offset_sine, theta) == Catch::Approx(fd).margin(1e-5));
    }
}

TEST_CASE("second directional derivative") {
    const ModelParams p = table1();
    const double as = alpha_star_table1();
    const double theta = 1.0;

    SECTION("gamma == 1 recovers the plain second derivative exactly") {
        const double sd = second_directional(p, as, [](double) { return 1.0; }, theta);
        CHECK(std::abs(sd - d2lambda_P(p, as)) <= 1e-10);
    }

    SECTION("square wave against the finite difference of lambda_F") {
        auto square = [&](double t) { return std::fmod(t, theta) < 0.5 * theta ? 1.0 : -1.0; };
        const double sd = second_directional(p, as, square, theta);
        const double eps = 1e-2;
        const double l0 = lambda_P(p, as);
        const double lp = lambda_F(p, perturbed_square(as, eps, theta));
        const double lm = lambda_F(p, perturbed_square(as, -eps, theta));
        const double fd = (lp - 2.0 * l0 + lm) / (eps * eps);
        CHECK(sd == Catch::Approx(fd).epsilon(1e-2));
    }

    SECTION("high-frequency mean-zero directions are filtered out") {
        auto sine = [](double t) { return std::sin(2.0 * 3.14159265358979323846 * t / 1e-3); };
        const double sd = second_directional(p, as, sine, 1e-3);
        CHECK(std::abs(sd) <= 1e-4);
    }

    SECTION("quadratic model with Richardson remainder") {
        // lambda_F(alpha* + eps gamma) - lambda_P(alpha*) - eps^2/2 sd = O(eps^3)
        auto square = [&](double t) { return std::fmod(t, theta) < 0.5 * theta ? 1.0 : -1.0; };
        const double sd = second_directional(p, as, square, theta);
        const double l0 = lambda_P(p, as);
        auto remainder = [&](double e) {
            const double lf = lambda_F(p, perturbed_square(as, e, theta));
            return lf - l0 - 0.5 * e * e * sd;
        };
        const double h = 5e-2;
        const double r1 = std::abs(remainder(4 * h));
        const double r2 = std::abs(remainder(2 * h));
        const double r3 = std::abs(remainder(h));
        // each halving should shrink the remainder by at least ~4 if it is o(eps^2)
        CHECK(r1 / std::max(r2, 1e-14) > 3.0);
        CHECK(r2 / std::max(r3, 1e-14) > 3.0);
    }

    SECTION("perturbation band for a finite square perturbation") {
        auto square_ctrl = perturbed_square(as, 0.5, theta);
        const double lf = lambda_F(p, square_ctrl);
        const double sd = second_directional(
            p, as, [&](double t) { return std::fmod(t, theta) < 0.5 * theta ? 1.0 : -1.0; },
            theta);
        const double quad = lambda_P(p, as) + 0.5 * 0.25 * sd;
        // remainder bounded by C eps^3 with a generous C
        CHECK(std::abs(lf - quad) <= 1.0 * 0.125 + 1e-12);
        CHECK(lf <= lambda_P(p, as) + 1e-9); // alpha* stays a local max along this direction
    }
}

TEST_CASE("invalid control construction") {
    CHECK_THROWS_AS(ControlSignal::periodic({1.0, 2.0}, 1.0), validation_error);
    CHECK_THROWS_AS(ControlSignal::periodic(std::vector<double>(16, 1.0), 0.0),
                    validation_error);
    const ModelParams p = table1();
    CHECK_THROWS_AS(monodromy(p, ControlSignal::sampled({0.0, 1.0}, {1.0, 2.0})),
                    validation_error);
}
