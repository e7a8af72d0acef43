#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qls/cost.hpp"

using namespace qls;

namespace {

StateVector random_state(uint32_t n, Rng& rng) {
    StateVector s(n);
    for (auto& a : s.amps) a = cplx(rng.normal(), rng.normal());
    s.normalize();
    return s;
}

PauliString random_word(uint32_t n, Rng& rng) {
    PauliString p = PauliString::identity(n);
    do {
        for (uint32_t q = 0; q < n; ++q)
            p.set_letter(q, "IXYZ"[rng.below(4)]);
    } while (p.is_identity());
    return p;
}

PauliSum random_sum(uint32_t n, uint32_t terms, Rng& rng, bool with_identity = true) {
    PauliSum s;
    s.n = n;
    if (with_identity) s.add_term(cplx(rng.normal(), rng.normal()), PauliString::identity(n));
    while (s.terms.size() < terms)
        s.add_term(cplx(rng.normal(), rng.normal()), random_word(n, rng));
    s.simplify();
    return s;
}

/// cos(t/2) I - i sin(t/2) P: a unitary single-rotation sum.
PauliSum rotation_sum(uint32_t n, const PauliString& p, double theta) {
    PauliSum s;
    s.n = n;
    s.add_term(cplx(std::cos(theta / 2), 0.0), PauliString::identity(n));
    s.add_term(cplx(0.0, -std::sin(theta / 2)), p);
    return s;
}

/// Product of two random rotations: unitary with at most four terms.
PauliSum random_unitary_sum(uint32_t n, Rng& rng) {
    PauliSum u = rotation_sum(n, random_word(n, rng), rng.uniform() * 3.0) *
                 rotation_sum(n, random_word(n, rng), rng.uniform() * 3.0);
    u.simplify();
    return u;
}

/// H on every qubit, as a Pauli sum: tensor powers of (X + Z)/sqrt(2).
PauliSum h_tensor(uint32_t n) {
    PauliSum s;
    s.n = n;
    double c = std::pow(1.0 / std::sqrt(2.0), double(n));
    for (uint64_t bits = 0; bits < (uint64_t(1) << n); ++bits) {
        PauliString p = PauliString::identity(n);
        for (uint32_t q = 0; q < n; ++q) p.set_letter(q, (bits >> q) & 1 ? 'Z' : 'X');
        s.add_term(c, p);
    }
    return s;
}

Eigen::VectorXcd to_vec(const StateVector& s) {
    return Eigen::Map<const Eigen::VectorXcd>(s.amps.data(), Eigen::Index(s.amps.size()));
}

/// Direct dense evaluation of mu, omega, and the cost from their defining
/// sums (valid for any A and U, unitary or not).
CostValue dense_cost(const PauliSum& a, const PauliSum& u, const StateVector& s) {
    Dense ad = to_dense(a), ud = to_dense(u);
    Eigen::VectorXcd psi = ad * to_vec(s);
    CostValue v;
    v.omega = psi.squaredNorm();
    for (uint32_t r = 0; r < a.n; ++r) {
        Dense zr = to_dense(PauliString::single(a.n, r, 'Z'));
        v.mu += (psi.dot(ud * zr * ud.adjoint() * psi)).real();
    }
    v.cost = 0.5 - v.mu / (2.0 * a.n * v.omega);
    return v;
}

/// The original projector form of the cost observable,
/// A^dag U (I - (1/n) sum_r |0_r><0_r| x I) U^dag A, normalized by |A x|^2.
/// Agreement with the term tables checks the (I + Z)/2 projector folding.
double dense_cost_projector(const PauliSum& a, const PauliSum& u, const StateVector& s) {
    const uint32_t n = a.n;
    const Eigen::Index dim = Eigen::Index(1) << n;
    Dense ad = to_dense(a), ud = to_dense(u);
    Dense proj = Dense::Zero(dim, dim);
    for (uint32_t r = 0; r < n; ++r)
        for (Eigen::Index d = 0; d < dim; ++d)
            if (((uint64_t(d) >> (n - 1 - r)) & 1) == 0) proj(d, d) += 1.0;
    Dense hl = ad.adjoint() * ud * (Dense::Identity(dim, dim) - proj / double(n)) *
               ud.adjoint() * ad;
    Eigen::VectorXcd v = to_vec(s);
    return (v.dot(hl * v)).real() / (ad * v).squaredNorm();
}

PauliSum identity_sum(uint32_t n) { return PauliSum::identity(n); }

}  // namespace

TEST_CASE("termination threshold: eps^2 / (n kappa^2)") {
    CHECK(termination_gamma(4, 60.0, 0.01) == doctest::Approx(6.944444e-9).epsilon(1e-5));
    CHECK(termination_gamma(1, 1.0, 1.0) == 1.0);
    CHECK(termination_gamma(4, 10.0, 0.1) == doctest::Approx(2.5e-5).epsilon(1e-12));
    CHECK_THROWS_AS((void)termination_gamma(0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)termination_gamma(2, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("build: raw counts, folded sizes, and diagonal coefficient sum") {
    Rng rng(301, {0});
    PauliSum a = random_sum(3, 4, rng);
    PauliSum u = random_unitary_sum(3, rng);
    CostTermTable t = build_terms(a, u);
    const uint64_t la = a.terms.size(), lu = u.terms.size();
    CHECK(t.n == 3);
    CHECK(t.raw_omega_terms == la * la);
    CHECK(t.raw_mu_terms == 3 * la * la * lu * lu);
    // Folded omega: one entry per i <= j pair with a nonzero coefficient.
    CHECK(t.omega_terms.size() <= la * (la + 1) / 2);
    double diag_sum = 0.0, norm_sq = 0.0;
    for (const auto& [c, p] : t.omega_terms)
        if (p.is_identity()) diag_sum += c.real();
    for (const auto& [c, p] : a.terms) norm_sq += std::norm(c);
    CHECK(diag_sum == doctest::Approx(norm_sq).epsilon(1e-12));

    CHECK_THROWS_AS((void)build_terms(PauliSum{}, u), std::invalid_argument);
}

TEST_CASE("single-qubit system A = Z, U = H matches the dense oracles") {
    PauliSum a;
    a.n = 1;
    a.add_term(1.0, PauliString::parse("Z"));
    PauliSum u = h_tensor(1);
    CostTermTable t = build_terms(a, u);
    Rng rng(302, {0});
    for (int trial = 0; trial < 20; ++trial) {
        StateVector s = random_state(1, rng);
        CostValue v = evaluate_exact(t, s);
        CostValue d = dense_cost(a, u, s);
        CHECK(v.cost == doctest::Approx(d.cost).epsilon(1e-10));
        CHECK(v.mu == doctest::Approx(d.mu).epsilon(1e-10));
        CHECK(v.omega == doctest::Approx(d.omega).epsilon(1e-10));
        CHECK(v.cost == doctest::Approx(dense_cost_projector(a, u, s)).epsilon(1e-10));
    }
}

TEST_CASE("identity system: zero cost at the solution, analytic cost at |1>") {
    CostTermTable t1 = build_terms(identity_sum(1), identity_sum(1));
    StateVector zero = StateVector::zero_state(1);
    CHECK(evaluate_exact(t1, zero).cost == doctest::Approx(0.0).epsilon(1e-14));
    StateVector one = StateVector::from_amplitudes(1, {0.0, 1.0});
    CostValue v = evaluate_exact(t1, one);
    CHECK(v.mu == doctest::Approx(-1.0));
    CHECK(v.omega == doctest::Approx(1.0));
    CHECK(v.cost == doctest::Approx(1.0));

    CostTermTable t3 = build_terms(identity_sum(3), identity_sum(3));
    CHECK(evaluate_exact(t3, StateVector::zero_state(3)).cost ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exact evaluation matches the dense oracle on random systems") {
    Rng rng(303, {0});
    for (uint32_t n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            PauliSum a = random_sum(n, 3, rng);
            PauliSum u = random_sum(n, 3, rng);
            u *= cplx(1.0 / u.coeff_norm1(), 0.0);  // spectral norm <= 1
            StateVector s = random_state(n, rng);
            CostTermTable t = build_terms(a, u);
            CostValue fast = evaluate_exact(t, s);
            CostValue slow = evaluate_exact_serial(t, s);
            CostValue d = dense_cost(a, u, s);
            CHECK(fast.cost == doctest::Approx(d.cost).epsilon(1e-10));
            CHECK(fast.mu == doctest::Approx(d.mu).epsilon(1e-9));
            CHECK(fast.omega == doctest::Approx(d.omega).epsilon(1e-10));
            CHECK(fast.cost == doctest::Approx(slow.cost).epsilon(1e-12));
            CHECK(fast.cost >= 0.0);
            CHECK(fast.cost <= 1.0);
        }
    }
}

TEST_CASE("projector-form oracle agrees for unitary U") {
    Rng rng(304, {0});
    for (int trial = 0; trial < 20; ++trial) {
        PauliSum a = random_sum(3, 3, rng);
        PauliSum u = random_unitary_sum(3, rng);
        StateVector s = random_state(3, rng);
        CostTermTable t = build_terms(a, u);
        CHECK(evaluate_exact(t, s).cost ==
              doctest::Approx(dense_cost_projector(a, u, s)).epsilon(1e-10));
    }
}

TEST_CASE("preprocess: merge, drop, cost preservation, idempotence") {
    // Hand-built duplicate merge.
    CostTermTable hand;
    hand.n = 2;
    hand.omega_terms = {{cplx(0.25, 0), PauliString::parse("ZZ")},
                        {cplx(0.5, 0), PauliString::parse("ZZ")},
                        {cplx(1e-15, 0), PauliString::parse("XX")}};
    hand.mu_terms = {{cplx(1.0, 0), PauliString::parse("ZI")}};
    CostTermTable merged = preprocess(hand, 1e-12);
    REQUIRE(merged.omega_terms.size() == 1);
    CHECK(merged.omega_terms[0].first == cplx(0.75, 0));
    CHECK(merged.omega_terms[0].second == PauliString::parse("ZZ"));
    CHECK(merged.preprocessed);
    CHECK(merged.distinct_strings == 2);

    // Structured 4-qubit system: merging strictly shrinks the mu list and
    // preserves the cost on random states.
    PauliSum a;
    a.n = 4;
    for (const char* w : {"ZZII", "IZZI", "IIZZ"}) a.add_term(0.0123, PauliString::parse(w));
    for (const char* w : {"XIII", "IXII", "IIXI", "IIIX"}) a.add_term(0.123, PauliString::parse(w));
    a.add_term(0.508, PauliString::identity(4));
    PauliSum u = h_tensor(4);
    CostTermTable t = build_terms(a, u);
    CostTermTable p = preprocess(t);
    CHECK(p.mu_terms.size() < t.mu_terms.size());
    CHECK(p.distinct_strings == t.distinct_strings);
    CHECK(p.max_locality == t.max_locality);
    Rng rng(305, {0});
    for (int trial = 0; trial < 20; ++trial) {
        StateVector s = random_state(4, rng);
        CHECK(evaluate_exact(t, s).cost == doctest::Approx(evaluate_exact(p, s).cost).epsilon(1e-10));
    }
    // Idempotent, bit for bit.
    CostTermTable pp = preprocess(p);
    REQUIRE(pp.mu_terms.size() == p.mu_terms.size());
    bool same = true;
    for (std::size_t i = 0; i < p.mu_terms.size(); ++i)
        same = same && pp.mu_terms[i].first == p.mu_terms[i].first &&
               pp.mu_terms[i].second == p.mu_terms[i].second;
    CHECK(same);
}

TEST_CASE("table statistics: distinct words and worst-case locality") {
    PauliSum a;
    a.n = 2;
    a.add_term(1.0, PauliString::parse("ZI"));
    a.add_term(0.5, PauliString::parse("IZ"));
    CostTermTable t = build_terms(a, h_tensor(2));
    std::vector<PauliString> words = distinct_observables(t);
    CHECK(words.size() == t.distinct_strings);
    uint32_t k = 0;
    bool sorted = true, unique_ok = true;
    for (std::size_t i = 0; i < words.size(); ++i) {
        k = std::max(k, words[i].locality());
        CHECK(!words[i].is_identity());
        if (i > 0) {
            sorted = sorted && words[i - 1] < words[i];
            unique_ok = unique_ok && !(words[i - 1] == words[i]);
        }
    }
    CHECK(k == t.max_locality);
    CHECK(sorted);
    CHECK(unique_ok);
}

TEST_CASE("solution state has zero cost; the termination bound holds") {
    Rng rng(306, {0});
    const uint32_t n = 3;
    PauliSum base = random_sum(n, 4, rng);
    PauliSum a = base;
    a += base.dagger();  // Hermitian system
    a.simplify();
    PauliSum u = random_unitary_sum(n, rng);
    CostTermTable t = preprocess(build_terms(a, u));

    Dense ad = to_dense(a), ud = to_dense(u);
    Eigen::VectorXcd b = ud.col(0);  // U|0...0>
    Eigen::VectorXcd x0 = ad.colPivHouseholderQr().solve(b);
    x0.normalize();
    StateVector sol(n);
    for (uint64_t d = 0; d < sol.dim(); ++d) sol.amps[d] = x0(Eigen::Index(d));
    CHECK(evaluate_exact(t, sol).cost <= 1e-8);

    Eigen::JacobiSVD<Dense> svd(ad);
    double kappa = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        StateVector s = random_state(n, rng);
        double fid = std::norm(x0.dot(to_vec(s)));
        double td = std::sqrt(std::max(0.0, 1.0 - fid));
        if (td < 1e-3) continue;
        ++checked;
        double bound = termination_gamma(n, kappa, td);
        CHECK(evaluate_exact(t, s).cost >= bound * (1.0 - 1e-9));
    }
    CHECK(checked >= 45);
}

TEST_CASE("singular system raises instead of dividing by ~0") {
    PauliSum a;  // I - Z annihilates |0>
    a.n = 1;
    a.add_term(1.0, PauliString::identity(1));
    a.add_term(-1.0, PauliString::parse("Z"));
    CostTermTable t = build_terms(a, identity_sum(1));
    CHECK_THROWS_AS((void)evaluate_exact(t, StateVector::zero_state(1)),
                    std::runtime_error);
}

TEST_CASE("shadow evaluation: identity system at the solution") {
    CostTermTable t = build_terms(identity_sum(2), identity_sum(2));
    StateVector sol = StateVector::zero_state(2);
    double eps = 0.1;
    uint64_t budget = shadow_size(t.distinct_strings, t.max_locality, eps);
    CHECK(budget == 300);  // log2(2) * 3 / 0.01
    ClassicalShadow shadow = collect(sol, budget, Rng(307, {0}));
    CostValue v = evaluate_shadow(t, shadow);
    CHECK(v.omega == 1.0);  // identity word short-circuits to exactly 1
    CHECK(v.cost <= eps);
}

TEST_CASE("shadow evaluation equals assembling the distinct-word estimates") {
    Rng rng(308, {0});
    PauliSum a = random_sum(2, 3, rng);
    PauliSum u = random_unitary_sum(2, rng);
    CostTermTable t = preprocess(build_terms(a, u));
    StateVector s = random_state(2, rng);
    ClassicalShadow shadow = collect(s, 2000, Rng(309, {0}));
    std::vector<PauliString> words = distinct_observables(t);
    uint32_t batches = default_batches(words.size());
    std::vector<double> est(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
        est[i] = estimate_pauli(shadow, words[i], batches);
    CostValue direct = evaluate_shadow(t, shadow);
    CostValue assembled = assemble_cost(t, words, est);
    CHECK(direct.cost == assembled.cost);
    CHECK(direct.mu == assembled.mu);
    CHECK(direct.omega == assembled.omega);
    CHECK_THROWS_AS((void)assemble_cost(t, words, std::vector<double>(words.size() - 1)),
                    std::invalid_argument);
}

TEST_CASE("shadow cost tracks the exact cost at the prescribed budget") {
    Rng rng(310, {0});
    double eps = 0.1;
    int good = 0;
    for (int pair = 0; pair < 20; ++pair) {
        PauliSum a = random_sum(3, 3, rng);
        PauliSum u = random_unitary_sum(3, rng);
        CostTermTable t = preprocess(build_terms(a, u));
        StateVector s = random_state(3, rng);
        double exact = evaluate_exact(t, s).cost;
        uint64_t budget = shadow_size(t.distinct_strings, t.max_locality, eps);
        ClassicalShadow shadow = collect(s, budget, Rng(311, {uint64_t(pair)}));
        double est = evaluate_shadow(t, shadow).cost;
        if (std::abs(est - exact) <= 5.0 * eps) ++good;
    }
    CHECK(good >= 18);
}
