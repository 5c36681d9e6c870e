#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fraceig/errors.hpp"
#include "fraceig/lane_emden.hpp"

using namespace fraceig;

namespace {

double sum_mwq(const DiscreteGagliardoForm& form, const GridFunction& w, double q) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) total += form.measures()[i] * std::pow(std::abs(w[i]), q);
    return total;
}

double relative_l2(const DiscreteGagliardoForm& form, const GridFunction& a, const GridFunction& b) {
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += form.measures()[i] * (a[i] - b[i]) * (a[i] - b[i]);
        norm += form.measures()[i] * a[i] * a[i];
    }
    return std::sqrt(diff / norm);
}

}  // namespace

TEST_CASE("single node density in closed form") {
    const auto form = assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_width(1.0), 0.5);
    const auto w = lane_emden_density(form, 1.5);
    CHECK(w.w[0] == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
    CHECK(w.lambda1 == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(form.apply(w.w)[0] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(std::sqrt(w.w[0]) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(w.route == LaneEmdenRoute::EigenScaled);

    CHECK(free_energy(form, 1.5, w.w) == doctest::Approx(-1.0 / 3072.0).epsilon(1e-12));
    const auto e = minimize_free_energy(form, 1.5);
    CHECK(e.w[0] == doctest::Approx(1.0 / 64.0).epsilon(1e-10));
    CHECK(e.route == LaneEmdenRoute::FreeEnergy);
}

TEST_CASE("density identities") {
    for (double s : {0.25, 0.5, 0.75}) {
        const auto form = assemble_form(OpenSet1D::parse("0,1;1.2,2"), UniformGridSpec::from_width(0.01), s);
        const double q = 1.5;
        const auto w = lane_emden_density(form, q);
        CHECK(*std::min_element(w.w.begin(), w.w.end()) > 0.0);
        CHECK(form.energy(w.w) == doctest::Approx(sum_mwq(form, w.w, q)).epsilon(1e-8));
        CHECK(lq_norm(form, w.w, q) == doctest::Approx(std::pow(w.lambda1, 1.0 / (q - 2.0))).epsilon(1e-8));
        CHECK(w.residual <= 1e-10);
        CHECK(lane_emden_residual(form, w.w, q) == doctest::Approx(w.residual));
    }
}

TEST_CASE("free energy basics") {
    const auto form = assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_width(0.05), 0.5);
    const GridFunction zero(form.size(), 0.0);
    CHECK(free_energy(form, 1.5, zero) == 0.0);
    GridFunction u(form.size());
    GridFunction minus(form.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = std::sin(3.0 * static_cast<double>(i)) * 0.01;
        minus[i] = -u[i];
    }
    CHECK(free_energy(form, 1.5, u) == doctest::Approx(free_energy(form, 1.5, minus)).epsilon(1e-15));
}

TEST_CASE("the two constructions agree") {
    const auto form = assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_width(0.005), 0.5);
    const auto eigen = lane_emden_density(form, 1.5);
    const auto energy = minimize_free_energy(form, 1.5);
    CHECK(relative_l2(form, eigen.w, energy.w) <= 1e-6);
    CHECK(free_energy(form, 1.5, energy.w) < 0.0);
    CHECK(free_energy(form, 1.5, energy.w) <= free_energy(form, 1.5, eigen.w) + 1e-14);
}

TEST_CASE("density preconditions") {
    const auto form = assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_width(0.1), 0.5);
    CHECK_THROWS_AS(lane_emden_density(form, 2.0), InvalidParameter);
    CHECK_THROWS_AS(lane_emden_density(form, 1.0), InvalidParameter);
    CHECK_THROWS_AS(minimize_free_energy(form, 2.5), InvalidParameter);
}

TEST_CASE("exhaustion is monotone and stabilizes") {
    const auto omega = OpenSet1D::parse("-0.5,0.5");
    const auto grid = UniformGridSpec::from_width(0.01);
    const auto seq = exhaustion_sequence(omega, 0.5, 1.5, {0.25, 0.5, 1.0, 2.0}, grid);
    REQUIRE(seq.steps.size() == 4);
    const double slack = 1e-8 * *std::max_element(seq.full_w.begin(), seq.full_w.end());
    for (std::size_t k = 0; k + 1 < seq.steps.size(); ++k)
        for (std::size_t i = 0; i < seq.full_w.size(); ++i) {
            CHECK(seq.steps[k].ambient_w[i] <= seq.steps[k + 1].ambient_w[i] + slack);
            CHECK(seq.steps[k].ambient_w[i] <= seq.full_w[i] + slack);
        }
    for (std::size_t i = 0; i < seq.full_w.size(); ++i) {
        CHECK(seq.steps[2].ambient_w[i] == doctest::Approx(seq.full_w[i]).epsilon(1e-10));
        CHECK(seq.steps[3].ambient_w[i] == seq.steps[2].ambient_w[i]);
    }
    const auto report = exhaustion_check(seq, omega, 0.5, 1.5);
    CHECK(report.pass);

    const auto shifted = exhaustion_sequence(OpenSet1D::parse("1,2"), 0.5, 1.5, {0.5, 1.5, 3.0}, grid);
    CHECK(shifted.steps.size() == 2);
    CHECK(shifted.warnings.size() == 1);
    const auto centered = exhaustion_sequence(OpenSet1D::parse("1,2"), 0.5, 1.5, {0.25, 1.0}, grid, 1.5);
    CHECK(centered.steps.size() == 2);
    CHECK(centered.center == 1.5);
    CHECK_THROWS_AS(exhaustion_sequence(omega, 0.5, 1.5, {1.0, 0.5}, grid), InvalidParameter);
}

TEST_CASE("comparison principle") {
    const auto grid = UniformGridSpec::from_width(0.005);
    const auto report = comparison_check(OpenSet1D::parse("0,0.6"), OpenSet1D::parse("0,1"), 0.5, 1.5, grid);
    CHECK(report.pass);
    CHECK(report.details["min_increase"].get<double>() > 0.0);

    const auto same = comparison_check(OpenSet1D::parse("0,1"), OpenSet1D::parse("0,1"), 0.5, 1.5,
                                       UniformGridSpec::from_width(0.01));
    CHECK(same.pass);
    CHECK(std::abs(same.details["min_increase"].get<double>()) <= 1e-12);

    const auto growth = comparison_check(OpenSet1D::parse("0,0.4"), OpenSet1D::parse("0,0.4;0.6,1"), 0.5, 1.5,
                                         UniformGridSpec::from_width(0.01));
    CHECK(growth.pass);
    CHECK(growth.details["min_increase"].get<double>() > 0.0);

    CHECK_THROWS_AS(comparison_check(OpenSet1D::parse("0,1.2"), OpenSet1D::parse("0,1"), 0.5, 1.5, grid),
                    PreconditionError);
}
