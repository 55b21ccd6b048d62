#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "isac/allocation.hpp"
#include "support.hpp"

using namespace isac;
using namespace isac::test;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

bool perfect_matching(const SenPeSelection& sel) {
    std::set<int> s(sel.sen.begin(), sel.sen.end()), p(sel.pe.begin(), sel.pe.end());
    std::set<int> ps, pp;
    for (const Pair& pr : sel.pairs) {
        if (!s.count(pr.sen) || !p.count(pr.pe)) return false;
        ps.insert(pr.sen);
        pp.insert(pr.pe);
    }
    return ps == s && pp == p && sel.pairs.size() == sel.sen.size();
}

}  // namespace

TEST_CASE("greedy picks the two strongest sensing subcarriers") {
    SenPeSelection sel = greedy_sen_pe(vec({4, 1, 3, 2}), vec({1, 2, 3, 4}), 8);
    CHECK(sel.sen == std::vector<int>{0, 2});
    CHECK(sel.pe == std::vector<int>{1, 3});
    // The strongest SEN pick meets the strongest PE subcarrier.
    CHECK(sel.pairs[0] == Pair{3, 0});
    CHECK(sel.pairs[1] == Pair{1, 2});
}

TEST_CASE("equal traces select the lowest indices") {
    SenPeSelection sel = greedy_sen_pe(Eigen::VectorXd::Ones(8), Eigen::VectorXd::Ones(8), 16);
    CHECK(sel.sen == std::vector<int>{0, 1, 2, 3});
    CHECK(sel.pe == std::vector<int>{4, 5, 6, 7});
    CHECK(sel.pairs[0] == Pair{4, 0});
}

TEST_CASE("greedy output is a perfect matching of quarter-band sets") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd om(16), la(16);
        for (int i = 0; i < 16; ++i) {
            om[i] = u(rng);
            la[i] = u(rng);
        }
        SenPeSelection sel = greedy_sen_pe(om, la, 32);
        CHECK(sel.sen.size() == 8);
        CHECK(sel.pe.size() == 8);
        CHECK(perfect_matching(sel));
        double weakest_sen = 1e9;
        for (int i : sel.sen) weakest_sen = std::min(weakest_sen, om[i]);
        for (int i : sel.pe) CHECK(om[i] <= weakest_sen);
    }
    CHECK_THROWS_AS(greedy_sen_pe(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(4), 8), std::invalid_argument);
}

TEST_CASE("repair keeps the sets when MI did not drop") {
    Eigen::VectorXd om = vec({4, 1, 3, 2}), la = vec({9, 1, 2, 5});
    SenPeSelection sel = greedy_sen_pe(om, la, 8);
    SenPeSelection same = repair_pairs(2.0, 2.0, sel, om, la);
    CHECK(same.sen == sel.sen);
    CHECK(same.pe == sel.pe);
    CHECK(same.pairs == sel.pairs);
}

TEST_CASE("repair trades the best PE gain out of SEN") {
    // SEN = {0, 2} holds the global maximum of Tr(Λ_PE) at index 0; PE = {1, 3} has its minimum at 1.
    Eigen::VectorXd om = vec({4, 1, 3, 2}), la = vec({9, 1, 2, 5});
    SenPeSelection sel = greedy_sen_pe(om, la, 8);
    SenPeSelection out = repair_pairs(2.0, 1.0, sel, om, la);
    std::vector<int> sen = out.sen;
    std::sort(sen.begin(), sen.end());
    CHECK(sen == std::vector<int>{1, 2});
    CHECK(out.pe == std::vector<int>{0, 3});
    CHECK(perfect_matching(out));
    // SEN ranked by Ω: 2 then 1; PE ranked by Λ: 0 then 3.
    CHECK(out.pairs[0] == Pair{0, 2});
    CHECK(out.pairs[1] == Pair{3, 1});
}

TEST_CASE("repair preserves cardinalities on random instances") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd om(8), la(8);
        for (int i = 0; i < 8; ++i) {
            om[i] = u(rng);
            la[i] = u(rng);
        }
        SenPeSelection out = repair_pairs(1.0, 0.5, greedy_sen_pe(om, la, 16), om, la);
        CHECK(out.sen.size() == 4);
        CHECK(out.pe.size() == 4);
        CHECK(perfect_matching(out));
        CHECK(check_mdd_plan(mdd_plan(16, out, std::vector<std::uint8_t>(8, 0)), 16).find("PE") == std::string::npos);
    }
}

TEST_CASE("plans built from a selection pass the MDD checks") {
    SenPeSelection sel = greedy_sen_pe(vec({4, 1, 3, 2}), vec({1, 2, 3, 4}), 8);
    SubcarrierPlan plan = mdd_plan(8, sel, {1, 0, 1, 0});
    CHECK(check_mdd_plan(plan, 8).empty());
    CHECK(plan.cd_set() == std::vector<int>{0, 2});
    CHECK(plan.dl_set() == std::vector<int>{1, 3});
    CHECK(plan.sen_set() == std::vector<int>{4, 6});
    CHECK(plan.pairs[0] == Pair{7, 4});
    CHECK_THROWS_AS(mdd_plan(8, sel, {1, 0}), std::invalid_argument);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        SubcarrierPlan r = random_mdd_plan(16, rng);
        CHECK(check_mdd_plan(r, 16).empty());
        CHECK(!r.cd_set().empty());
        CHECK(!r.dl_set().empty());
    }
}

TEST_CASE("time-division plan uses the whole band in every phase") {
    SubcarrierPlan t = tdma_plan(8);
    CHECK(t.dl_set().size() == 8);
    CHECK(t.sen_set().size() == 8);
    CHECK(t.pairs.size() == 8);
    CHECK(t.pairs[5] == Pair{5, 5});
}

TEST_CASE("traces follow the channel summaries") {
    World w(tiny_config(8, 2, 2), 4);
    Scene s = w.scene();
    const Vec3 uav = uav_at(w.cfg, 9000.0, 9500.0);
    Eigen::VectorXd om = sensing_traces(s, uav), la = pe_traces(s, uav);
    REQUIRE(om.size() == 4);
    const double ztu = squared_distance(uav, w.cfg.tbs_pos);
    for (int i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 2; ++j) {
            double z = squared_distance(uav, w.layout.targets[j]);
            acc += w.ch.sc[4 + i].omega_sen_bar[j] / (z * z);
        }
        CHECK(om[i] == doctest::Approx(acc).epsilon(1e-12));
        CHECK(la[i] == doctest::Approx(w.ch.sc[4 + i].eta_pe_sorted.sum() / ztu).epsilon(1e-12));
    }
}

TEST_CASE("smoothed L0 values and their tangent majorizer") {
    CHECK(l0_majorizer(0.0, 0.7, 0.3).upsilon == 0.0);
    L0Value t = l0_majorizer(0.4, 0.4, 0.2);
    CHECK(t.upsilon_tilde == doctest::Approx(t.upsilon).epsilon(1e-15));
    CHECK(t.upsilon == doctest::Approx(1.0 - std::exp(-2.0)));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        double tr = u(rng), ex = u(rng), rho = 0.01 + u(rng);
        L0Value v = l0_majorizer(tr, ex, rho);
        CHECK(v.upsilon_tilde >= v.upsilon - 1e-15);
    }
    CHECK_THROWS_AS(l0_majorizer(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("smoothing parameters start at a tenth of the budgets and halve to a floor") {
    ScenarioConfig c;
    SmoothingState st = SmoothingState::initial(c);
    CHECK(st.rho_dl == doctest::Approx(0.1));
    CHECK(st.rho_cd == doctest::Approx(c.p_tbs_w() / 10.0));
    st.advance();
    CHECK(st.rho_dl == doctest::Approx(0.05));
    for (int i = 0; i < 100; ++i) st.advance();
    CHECK(st.rho_dl == SmoothingState::floor);
    CHECK(st.rho_cd == SmoothingState::floor);
}
