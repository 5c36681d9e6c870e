#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fraceig/audits.hpp"
#include "fraceig/errors.hpp"

using namespace fraceig;

namespace {

DiscreteGagliardoForm make(const char* domain, double h, double s) {
    return assemble_form(OpenSet1D::parse(domain), UniformGridSpec::from_width(h), s);
}

DiscreteGagliardoForm single_node(double s) { return make("0,1", 1.0, s); }

}  // namespace

TEST_CASE("constructive Hardy constant") {
    CHECK(hardy_constant(OpenSet1D::parse("0,1"), 0.5).value == doctest::Approx(2.0));
    CHECK(hardy_constant(OpenSet1D::parse("0,1;1.2,2"), 0.5).value == doctest::Approx(20.0));
    for (double s : {0.25, 0.5, 0.75}) {
        const auto omega = OpenSet1D::parse("0,1;1.2,2");
        const double expected = std::pow(2.0, 2.0 * s) * std::max(2.0 / 0.2, 1.0);
        CHECK(hardy_constant(omega, s).value == doctest::Approx(expected).epsilon(1e-12));
        CHECK(hardy_constant(scale_set(omega, 3.0), s).value ==
              doctest::Approx(hardy_constant(omega, s).value).epsilon(1e-12));
    }
}

TEST_CASE("Hardy audit") {
    const auto single = hardy_audit(single_node(0.5), 10, 1);
    CHECK(single.pass);
    // node weight (1/2)^{-1} = 2, proof bound 1/4 · 2 = 1/2 against E/m = 4, margin relative to the bound
    CHECK(single.details["pointwise_worst"].get<double>() == doctest::Approx((4.0 - 0.5) / 0.5).epsilon(1e-12));

    for (const char* domain : {"0,1", "0,1;1.2,2"})
        for (double s : {0.25, 0.5, 0.75}) {
            const auto report = hardy_audit(make(domain, 0.005, s), 100, 1);
            CHECK(report.pass);
            CHECK(report.details["pointwise_failures"].get<std::size_t>() == 0);
            CHECK(report.details["functional_failures"].get<std::size_t>() == 0);
            CHECK(report.tolerance == 0.0);
        }
}

TEST_CASE("Picone inequality with the Lane-Emden weight") {
    const auto form = single_node(0.5);
    const auto w = lane_emden_density(form, 1.5);
    const auto single = picone_lane_emden_audit(form, 1.5, w, 5, 1, true);
    CHECK(single.pass);
    CHECK(std::abs(single.worst_margin) <= 1e-12);

    const auto big = make("0,1", 0.005, 0.5);
    const auto wb = lane_emden_density(big, 1.5);
    const auto report = picone_lane_emden_audit(big, 1.5, wb, 200, 1, true);
    CHECK(report.pass);
    CHECK(report.details["failures"].get<std::size_t>() == 0);
    CHECK(std::abs(report.details["identity_gap"].get<double>()) <= 1e-8);
    CHECK(report.samples == 200 + 4 + 1 + big.size());
}

TEST_CASE("Picone audit rejects a non-positive weight") {
    const auto form = make("0,1", 0.1, 0.5);
    auto w = lane_emden_density(form, 1.5);
    w.w[3] = 0.0;
    CHECK_THROWS_AS(picone_lane_emden_audit(form, 1.5, w, 5, 1), PreconditionError);
}

TEST_CASE("weighted Hölder chain") {
    for (const char* domain : {"0,1", "0,1;1.2,2"}) {
        const auto report = weighted_holder_audit(make(domain, 0.005, 0.5), 1.5, 100, 1);
        CHECK(report.pass);
        CHECK(report.details["chain_worst"].get<double>() >= -1e-12);
    }
    // point mass: equality; constant: strict
    const auto form = make("0,1", 0.05, 0.5);
    const auto report = weighted_holder_audit(form, 1.5, 0, 1);
    CHECK(report.pass);
    CHECK(std::abs(report.worst_margin) <= 1e-12);
    CHECK_THROWS_AS(weighted_holder_audit(form, 2.0, 0, 1), InvalidParameter);
}

TEST_CASE("Hopf fit") {
    const auto form = single_node(0.5);
    const auto fit = hopf_fit(form, lane_emden_density(form, 1.5));
    CHECK(fit.c_est == doctest::Approx(std::pow(2.0, -5.5)).epsilon(1e-12));

    const auto coarse = make("0,1", 0.01, 0.5);
    const auto fine = make("0,1", 0.005, 0.5);
    const double c1 = hopf_fit(coarse, lane_emden_density(coarse, 1.5)).c_est;
    const double c2 = hopf_fit(fine, lane_emden_density(fine, 1.5)).c_est;
    CHECK(c1 > 0.0);
    CHECK(c2 > 0.0);
    CHECK(std::abs(c1 - c2) <= 0.25 * std::max(c1, c2));
}

TEST_CASE("converse sup bound") {
    const auto form = single_node(0.5);
    const auto report = converse_linf_bound_audit(form, 1.5, lane_emden_density(form, 1.5));
    CHECK(report.pass);
    CHECK(report.details["ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));

    for (const char* domain : {"0,1", "0,1;1.2,2", "0,0.5;0.7,1.2"})
        for (double s : {0.25, 0.5, 0.75}) {
            const auto f = make(domain, 0.01, s);
            const auto r = converse_linf_bound_audit(f, 1.5, lane_emden_density(f, 1.5));
            CHECK(r.pass);
            CHECK(r.details["ratio"].get<double>() > 1.0);
        }

    const auto omega = OpenSet1D::parse("0,1;1.2,2");
    const auto grid = UniformGridSpec::from_width(0.02);
    const auto base = assemble_form(omega, grid, 0.5);
    const auto scaled = assemble_form(scale_set(omega, 2.0), UniformGridSpec::from_counts(grid.counts_for(omega)), 0.5);
    const double r1 = converse_linf_bound_audit(base, 1.5, lane_emden_density(base, 1.5)).details["ratio"];
    const double r2 = converse_linf_bound_audit(scaled, 1.5, lane_emden_density(scaled, 1.5)).details["ratio"];
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-9));
}

TEST_CASE("sup exponent") {
    CHECK(linf_exponent(0.25, 1.5) == doctest::Approx(0.8));
    CHECK(linf_exponent(0.5, 1.5) == doctest::Approx(1.0));
}

TEST_CASE("sup ratio audit") {
    const double s = 0.25;
    const double q = 1.5;
    const auto omega = OpenSet1D::parse("0,1");
    const auto counts = UniformGridSpec::from_width(0.01).counts_for(omega);
    std::vector<LinfSample> scaled;
    for (double t : {1.0, 2.0, 4.0}) {
        const auto form = assemble_form(scale_set(omega, t), UniformGridSpec::from_counts(counts), s);
        scaled.push_back(make_linf_sample(form, solve_lambda1(form, q, {1e-12, 5000, 1}), "t"));
    }
    std::vector<LinfSample> refined;
    for (double h : {0.02, 0.01, 0.005}) {
        const auto form = assemble_form(omega, UniformGridSpec::from_width(h), s);
        refined.push_back(make_linf_sample(form, solve_lambda1(form, q, {1e-12, 5000, 1}), "h"));
    }
    const auto report = linf_ratio_audit(scaled, refined, q, s);
    CHECK(report.hard);
    CHECK(report.pass);
    CHECK(report.worst_margin >= -1e-10);
    CHECK(report.details["refine_within_2x"].get<bool>());

    // single node: ρ in closed form, identical across dilations
    std::vector<LinfSample> nodes;
    for (double t : {1.0, 2.0}) {
        const auto form = assemble_form(scale_set(omega, t), UniformGridSpec::from_width(t), s);
        nodes.push_back(make_linf_sample(form, solve_lambda1(form, q), "t"));
    }
    const auto single = linf_ratio_audit(nodes, {}, q, s);
    CHECK(single.pass);
    const double lambda = 2.0 * 2.0 * std::pow(0.5, -2.0 * s) / (2.0 * s);
    const double rho = single.details["rows"][0]["rho"].get<double>();
    CHECK(rho == doctest::Approx(1.0 / std::pow(lambda, 0.8)).epsilon(1e-12));

    const auto soft = linf_ratio_audit(scaled, refined, q, 0.5);
    CHECK_FALSE(soft.hard);
}

TEST_CASE("subsolution estimate") {
    const auto form = make("0,1", 0.01, 0.5);
    const GridFunction zero(form.size(), 0.0);
    const auto trivial = subsolution_sup_audit(form, zero, 0.0, 0.5, 0.2, 1.0);
    CHECK(trivial.lhs == 0.0);

    const auto w = lane_emden_density(form, 1.5);
    const double f_bound = std::pow(*std::max_element(w.w.begin(), w.w.end()), 0.5);
    const auto a = subsolution_sup_audit(form, w.w, f_bound, 0.5, 0.2, 0.5);
    const auto b = subsolution_sup_audit(form, w.w, f_bound, 0.5, 0.2, 1.0);
    CHECK(std::isfinite(a.ratio));
    CHECK(a.ratio > 0.0);
    CHECK(b.local_term / a.local_term == doctest::Approx(std::pow(2.0, -1.0 / (4.0 * 0.5))).epsilon(1e-12));

    const auto sweep = subsolution_sweep(form, w.w, f_bound, {{0.5, 0.2, 0.5}, {0.5, 0.4, 1.0}, {0.3, 0.1, 0.25}});
    CHECK_FALSE(sweep.hard);
    CHECK(sweep.pass);
    CHECK(sweep.samples == 3);
    CHECK_THROWS(subsolution_sup_audit(form, w.w, f_bound, 0.5, 0.2, 1.5));
}

TEST_CASE("sign lemma") {
    const auto report = sign_lemma_audit(make("0,1;1.2,2", 0.01, 0.5), 100, 1);
    CHECK(report.pass);
    CHECK(report.worst_margin > 0.0);
    CHECK(report.details["mixed_samples"].get<std::size_t>() >= 100);
    CHECK(report.details["equality_deviation"].get<double>() <= 1e-14);
}

TEST_CASE("minimum principle and fault injection") {
    const auto form = make("0,1", 0.01, 0.5);
    CHECK(minimum_principle_audit(form).pass);
    CHECK(hardy_audit(form, 10, 1).pass);

    auto e = form.exterior();
    e[17] = -e[17];
    const DiscreteGagliardoForm broken(form.domain(), form.nodes(), form.measures(), e, form.s());
    CHECK_FALSE(minimum_principle_audit(broken).pass);
    CHECK_FALSE(hardy_audit(broken, 10, 1).pass);

    auto zeros = form.exterior();
    std::fill(zeros.begin(), zeros.end(), 0.0);
    const DiscreteGagliardoForm floating(form.domain(), form.nodes(), form.measures(), zeros, form.s());
    CHECK_FALSE(minimum_principle_audit(floating).pass);
}

TEST_CASE("normalization identity") {
    for (double s : {0.25, 0.75}) {
        const auto form = make("0,1;1.2,2", 0.01, s);
        const auto report = normalization_identity_audit(form, 1.5, lane_emden_density(form, 1.5));
        CHECK(report.pass);
    }
    const auto form = single_node(0.5);
    CHECK(normalization_identity_audit(form, 1.5, lane_emden_density(form, 1.5)).pass);
}

TEST_CASE("audit vectors") {
    const auto form = make("0,1", 0.1, 0.5);
    const auto v = audit_vectors(form, 5, 9);
    CHECK(v.size() == 9);
    CHECK(audit_vectors(form, 5, 9) == v);
    for (double x : v[0]) CHECK(x == v[0][0]);
    CHECK(std::count_if(v[2].begin(), v[2].end(), [](double x) { return x != 0.0; }) == 1);
}
