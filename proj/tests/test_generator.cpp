#include <catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "fairsample/generator.hpp"
#include "fairsample/ising.hpp"
#include "fairsample/oracle.hpp"
#include "helpers.hpp"

using namespace fairsample;

TEST_CASE("draw_couplings uses the six-value set", "[generator]") {
    const auto g = build_chimera(2, {});
    Rng rng = make_rng(1);
    for (int t = 0; t < 50; ++t) {
        const Instance inst = draw_couplings(g, rng);
        REQUIRE(inst.couplings.size() == 80);
        for (int j : inst.couplings) {
            const int m = std::abs(j);
            CHECK((m == 5 || m == 6 || m == 7));
        }
        CHECK_NOTHROW(validate_instance(inst));
    }
}

TEST_CASE("draw_couplings is deterministic in the seed", "[generator]") {
    const auto g = build_chimera(3, {});
    Rng a = make_rng(42);
    Rng b = make_rng(42);
    Rng c = make_rng(43);
    const Instance x = draw_couplings(g, a);
    CHECK(x == draw_couplings(g, b));
    CHECK(x.couplings != draw_couplings(g, c).couplings);
}

TEST_CASE("draw_couplings frequencies per coupler", "[generator][statistics]") {
    const auto g = build_chimera(2, {});
    constexpr int kDraws = 10000;
    std::vector<std::array<int, 6>> counts(static_cast<std::size_t>(g.num_couplers()), std::array<int, 6>{});
    Rng rng = make_rng(7);
    for (int t = 0; t < kDraws; ++t) {
        const Instance inst = draw_couplings(g, rng);
        for (std::size_t e = 0; e < inst.couplings.size(); ++e) {
            const auto it = std::find(kSidonCouplings.begin(), kSidonCouplings.end(), inst.couplings[e]);
            ++counts[e][static_cast<std::size_t>(it - kSidonCouplings.begin())];
        }
    }
    // 480 cells tested at once: the per-cell 3 sigma level (two-sided
    // 0.0027) is held family-wise by Bonferroni, z = 4.54 for 480 cells.
    // Excursions past 3 sigma must also be as rare as chance allows:
    // P(Binomial(480, 0.0027) > 6) < 1e-3.
    const double p = 1.0 / 6.0;
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    int beyond_3 = 0;
    for (const auto& row : counts) {
        for (int n : row) {
            CHECK(std::abs(n - kDraws * p) <= 4.54 * sigma);
            beyond_3 += std::abs(n - kDraws * p) > 3 * sigma ? 1 : 0;
        }
    }
    CHECK(beyond_3 <= 6);
}

TEST_CASE("zero-field admissibility examples", "[generator]") {
    const std::array<int, 4> a{5, 6, 6, 7};
    CHECK(admits_zero_field(a));  // 5 - 6 - 6 + 7
    const std::array<int, 3> b{5, 5, 5};
    CHECK_FALSE(admits_zero_field(b));
    const std::array<int, 2> c{6, 6};
    CHECK(admits_zero_field(c));
    const std::array<int, 5> d{5, 5, 5, 5, 5};
    CHECK_FALSE(admits_zero_field(d));  // odd count of odd values
    const std::array<int, 6> e{5, 5, 6, 6, 7, 7};
    CHECK(admits_zero_field(e));
}

TEST_CASE("admits_zero_field agrees with a subset-sum oracle", "[generator][property]") {
    // Zero signed sum <=> some subset sums to half the total.
    Rng rng = make_rng(11);
    std::uniform_int_distribution<int> mag(5, 7);
    std::uniform_int_distribution<int> deg(1, 6);
    for (int t = 0; t < 2000; ++t) {
        std::vector<int> m(static_cast<std::size_t>(deg(rng)));
        for (int& x : m) x = mag(rng);
        int total = 0;
        for (int x : m) total += x;
        bool half = false;
        for (unsigned s = 0; s < (1U << m.size()); ++s) {
            int sum = 0;
            for (std::size_t j = 0; j < m.size(); ++j) {
                if ((s >> j) & 1U) sum += m[j];
            }
            half = half || 2 * sum == total;
        }
        CHECK(admits_zero_field(m) == half);
    }
}

TEST_CASE("eliminated instances pass the free-spin audit", "[generator][property]") {
    const auto g = build_chimera(2, {});
    Rng rng = make_rng(2025);
    int produced = 0;
    while (produced < 1000) {
        const Instance raw = draw_couplings(g, rng);
        const FreeSpinRepair rep = eliminate_free_spins(raw, rng);
        if (!rep.instance) continue;
        ++produced;
        CHECK(free_spin_audit(*rep.instance).empty());
        CHECK_NOTHROW(validate_instance(*rep.instance));
        for (std::size_t e = 0; e < raw.couplings.size(); ++e) {
            CHECK((raw.couplings[e] < 0) == (rep.instance->couplings[e] < 0));  // signs kept
        }
    }
}

TEST_CASE("degree-5 qubits are never free", "[generator]") {
    const std::array<int, 5> lo{5, 5, 5, 5, 5};
    const std::array<int, 5> hi{7, 7, 7, 7, 7};
    const std::array<int, 5> mix{5, 6, 7, 6, 5};
    CHECK_FALSE(admits_zero_field(lo));
    CHECK_FALSE(admits_zero_field(hi));
    CHECK_FALSE(admits_zero_field(mix));
}

TEST_CASE("isolated qubits abort the repair", "[generator]") {
    Defects d;
    d.couplers = {Coupler(0, 4), Coupler(0, 5), Coupler(0, 6), Coupler(0, 7)};
    const auto g = build_chimera(1, d);
    Rng rng = make_rng(3);
    const FreeSpinRepair rep = eliminate_free_spins(draw_couplings(g, rng), rng);
    CHECK_FALSE(rep.instance.has_value());
    CHECK(rep.failed_qubit == 0);
}

TEST_CASE("degeneracy filter examples", "[generator]") {
    auto v = filter_degeneracy(6, CountProvenance::Exact);
    CHECK(v.accepted());
    CHECK(v.k == 1);
    v = filter_degeneracy(96, CountProvenance::Exact);
    CHECK(v.accepted());
    CHECK(v.k == 5);
    CHECK(filter_degeneracy(8, CountProvenance::Exact).status == DegeneracyVerdict::Status::Rejected);
    CHECK(filter_degeneracy(2, CountProvenance::Exact).status == DegeneracyVerdict::Status::Rejected);
    CHECK(filter_degeneracy(3, CountProvenance::Exact).status == DegeneracyVerdict::Status::Rejected);
    CHECK(filter_degeneracy(0, CountProvenance::Exact).status == DegeneracyVerdict::Status::Rejected);
    CHECK(filter_degeneracy(12, CountProvenance::Uncounted).status == DegeneracyVerdict::Status::Uncounted);
    const auto h = filter_degeneracy(24, CountProvenance::Heuristic);
    CHECK(h.accepted());
    CHECK(h.provenance == CountProvenance::Heuristic);
}

TEST_CASE("accepted degeneracies are even", "[generator][property]") {
    for (std::uint64_t n = 0; n < 100000; ++n) {
        const auto v = filter_degeneracy(n, CountProvenance::Exact);
        if (v.accepted()) {
            CHECK(n % 2 == 0);
            CHECK(n == (std::uint64_t{3} << v.k));
        }
    }
}

TEST_CASE("generate_instance yields oracle-verified filtered instances", "[generator]") {
    const auto g = build_chimera(2, {});
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const GenerationResult r = generate_instance(g, seed);
        REQUIRE(r.instance.has_value());
        CHECK(r.instance->seed == seed);
        CHECK(r.attempts == r.restarts + r.rejections + 1);
        CHECK(free_spin_audit(*r.instance).empty());
        const GroundStateSet gs = frontier_enumerate(*r.instance);
        CHECK(gs.count == r.verdict.n_gs);
        CHECK(gs.min_energy == r.min_energy);
        CHECK(gs.count == (std::uint64_t{3} << r.verdict.k));
        CHECK(closed_under_flip(gs));
        const GenerationResult again = generate_instance(g, seed);
        CHECK(again.instance == r.instance);
        CHECK(again.attempts == r.attempts);
    }
}

TEST_CASE("generate_instance honours k_max and the attempt cap", "[generator]") {
    const auto g = build_chimera(2, {});
    GenerationOptions opt;
    opt.max_attempts = 1;
    int found = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const GenerationResult r = generate_instance(g, seed, opt);
        CHECK(r.attempts == 1);
        found += r.instance.has_value() ? 1 : 0;
    }
    CHECK(found < 40);
    opt.max_attempts = 10000;
    opt.k_max = 1;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GenerationResult r = generate_instance(g, seed, opt);
        REQUIRE(r.instance.has_value());
        CHECK(r.verdict.n_gs == 6);
    }
}

TEST_CASE("zero noise leaves the Hamiltonian unchanged", "[generator][noise]") {
    const auto g = build_chimera(1, {});
    Rng rng = make_rng(5);
    const Instance base = draw_couplings(g, rng);
    const NoisyInstance ni = apply_noise(base, 0.0, 0.0, rng);
    CHECK(ni.base == base);
    for (std::uint64_t x = 0; x < 256; ++x) {
        SpinConfig cfg(8);
        for (std::size_t i = 0; i < 8; ++i) cfg.set_spin(i, ((x >> i) & 1U) ? 1 : -1);
        CHECK(energy(ni, cfg) == static_cast<double>(energy(base, cfg)));
    }
    CHECK_THROWS_AS(apply_noise(base, -0.1, 0.0, rng), std::invalid_argument);
}

TEST_CASE("noise sample variance", "[generator][noise][statistics]") {
    const auto g = build_chimera(8, {});
    Rng rng = make_rng(17);
    const Instance base = draw_couplings(g, rng);
    const double sj = 0.35;
    const double sh = 0.6;
    std::vector<double> dj;
    std::vector<double> dh;
    while (dj.size() < 10000) {
        const NoisyInstance ni = apply_noise(base, sj, sh, rng);
        CHECK(ni.base == base);
        dj.insert(dj.end(), ni.coupler_noise.begin(), ni.coupler_noise.end());
        dh.insert(dh.end(), ni.field_noise.begin(), ni.field_noise.end());
    }
    auto variance = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    CHECK(std::abs(variance(dj) / (sj * sj) - 1.0) < 0.05);
    CHECK(std::abs(variance(dh) / (sh * sh) - 1.0) < 0.05);
}

TEST_CASE("trivial gauges are fixed points", "[generator][gauge]") {
    const auto g = build_chimera(2, {});
    Rng rng = make_rng(8);
    const Instance inst = draw_couplings(g, rng);
    GaugeVector id = identity_gauge(g);
    CHECK(apply_gauge(inst, id) == inst);
    GaugeVector neg = id;
    for (auto& s : neg.signs) s = -1;
    CHECK(apply_gauge(inst, neg) == inst);
    GaugeVector bad;
    bad.signs.assign(3, 1);
    CHECK_THROWS_AS(apply_gauge(inst, bad), std::invalid_argument);
    CHECK_THROWS_AS(ungauge_config(SpinConfig(32), bad), std::invalid_argument);
}

TEST_CASE("gauge covariance of the energy", "[generator][gauge][property]") {
    const auto g = build_chimera(2, {});
    Rng rng = make_rng(9);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 1000; ++t) {
        const Instance inst = draw_couplings(g, rng);
        const GaugeVector gv = random_gauge(g, rng);
        SpinConfig s(32);
        for (std::size_t i = 0; i < 32; ++i) s.set_spin(i, coin(rng) ? 1 : -1);
        const Instance gauged = apply_gauge(inst, gv);
        CHECK(energy(gauged, ungauge_config(s, gv)) == energy(inst, s));
        CHECK(ungauge_config(ungauge_config(s, gv), gv) == s);
        const NoisyInstance ni = apply_noise(inst, 0.3, 0.3, rng);
        CHECK(std::abs(energy(apply_gauge(ni, gv), ungauge_config(s, gv)) - energy(ni, s)) < kEnergyTolerance);
    }
}

TEST_CASE("gauges preserve the full spectrum", "[generator][gauge][property]") {
    const auto g = build_chimera(1, {});
    Rng rng = make_rng(10);
    for (int t = 0; t < 20; ++t) {
        const Instance inst = draw_couplings(g, rng);
        const Instance gauged = apply_gauge(inst, random_gauge(g, rng));
        std::vector<double> a;
        std::vector<double> b;
        for (std::uint64_t x = 0; x < 256; ++x) {
            SpinConfig cfg(8);
            for (std::size_t i = 0; i < 8; ++i) cfg.set_spin(i, ((x >> i) & 1U) ? 1 : -1);
            a.push_back(testing::naive_energy(inst, cfg));
            b.push_back(testing::naive_energy(gauged, cfg));
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}
