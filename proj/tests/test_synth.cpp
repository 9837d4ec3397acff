#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cattle/synth.hpp"

using namespace cattle;
using namespace cattle::synth;

namespace {

synth::SynthConfig small(int threshold, std::uint64_t seed = 11) {
  SynthConfig c;
  c.states = 2;
  c.counties_per_state = 4;
  c.seed = seed;
  c.suppression_threshold = threshold;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

const char* kFiles[] = {"populations.csv", "pop_totals.csv", "shipments.csv", "ship_totals.csv",
                        "centroids.csv", "ground_truth.json"};

}  // namespace

TEST_CASE("same seed writes identical files") {
  const auto a = fresh_dir("cattle_synth_a");
  const auto b = fresh_dir("cattle_synth_b");
  const auto c = fresh_dir("cattle_synth_c");
  write_dataset(a, generate(small(2)));
  write_dataset(b, generate(small(2)));
  write_dataset(c, generate(small(2, 12)));
  for (const char* f : kFiles) {
    CAPTURE(f);
    const std::string fa = slurp(a / f);
    CHECK(!fa.empty());
    CHECK(fa == slurp(b / f));
  }
  CHECK(slurp(a / "populations.csv") != slurp(c / "populations.csv"));
}

TEST_CASE("census tables add up and pass validation") {
  const auto d = generate(small(0));
  REQUIRE(d.census.size() == 2);
  for (const auto& st0 : d.truth.census) {
    StateCensus st = st0;
    CHECK(validate(st).empty());
    for (const CensusTable* t : {&st.populations, &st.shipments}) {
      for (int k = 0; k < t->kinds(); ++k) {
        std::int64_t state = 0;
        for (int c = 0; c < t->counties(); ++c) {
          std::int64_t county = 0;
          for (SizeA a : kAllSizeA) {
            const auto& cell = t->cell(k, c, a);
            REQUIRE(cell.disclosed());
            county += *cell.head;
            // Every head count fits its operations and size range.
            if (t == &st.populations) {
              const auto r = size_range(a);
              CHECK(*cell.head >= cell.operations * r.lower);
              if (r.upper) CHECK(*cell.head <= cell.operations * *r.upper);
              CHECK((cell.operations == 0) == (*cell.head == 0));
            }
          }
          CHECK(t->county_total(k, c).head == county);
          state += county;
        }
        CHECK(t->state_total(k) == state);
      }
    }
    // All Cattle covers the two specific types cell by cell.
    for (int c = 0; c < st.populations.counties(); ++c) {
      for (SizeA a : kAllSizeA) {
        const auto all = *st.populations.cell(idx(TypeA::AllCattle), c, a).head;
        const auto dairy = *st.populations.cell(idx(TypeA::Dairy), c, a).head;
        const auto pre = *st.populations.cell(idx(TypeA::Preslaughter), c, a).head;
        CHECK(all >= dairy + pre);
      }
    }
  }
}

TEST_CASE("threshold zero withholds nothing") {
  const auto d = generate(small(0));
  CHECK(d.truth.suppressed_cells == 0);
  for (std::size_t s = 0; s < d.census.size(); ++s) {
    CHECK(d.census[s].populations == d.truth.census[s].populations);
    CHECK(d.census[s].shipments == d.truth.census[s].shipments);
  }
  const auto dir = fresh_dir("cattle_synth_t0");
  write_dataset(dir, d);
  CHECK(slurp(dir / "populations.csv").find(",D\n") == std::string::npos);
}

TEST_CASE("withheld cells are exactly those with few operations") {
  const auto d = generate(small(2));
  long long withheld = 0;
  for (std::size_t s = 0; s < d.census.size(); ++s) {
    const auto& pub = d.census[s].populations;
    const auto& tru = d.truth.census[s].populations;
    for (int k = 0; k < pub.kinds(); ++k) {
      for (int c = 0; c < pub.counties(); ++c) {
        for (SizeA a : kAllSizeA) {
          const auto& cell = pub.cell(k, c, a);
          const bool few = cell.operations >= 1 && cell.operations <= 2;
          CHECK(cell.disclosed() == !few);
          if (cell.disclosed()) continue;
          ++withheld;
          const auto truth_head = *tru.cell(k, c, a).head;
          const auto iv = cell_interval(cell, a, tru.state_total(k));
          CHECK(static_cast<double>(truth_head) >= iv.lo);
          CHECK(static_cast<double>(truth_head) <= iv.hi);
        }
      }
    }
    withheld += d.census[s].shipments.suppressed_cells(0) + d.census[s].shipments.suppressed_cells(1);
  }
  CHECK(withheld > 0);
  CHECK(withheld == d.truth.suppressed_cells);
}

TEST_CASE("true rates keep every subpopulation stationary") {
  const auto d = generate(small(2));
  const auto& sp = d.truth.subpops;
  const auto& r = d.truth.rates;
  const auto& cen = d.truth.centroids;
  const int n = sp.county_count();
  REQUIRE(static_cast<int>(cen.size()) == n);
  for (int c = 0; c < n; ++c) {
    double yearly_all = 0.0;
    for (TypeB t1 : kAllTypeB) {
      for (SizeB j1 : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t1, j1);
        double out = 0.0, in = 0.0;
        for (int c2 = 0; c2 < n; ++c2) {
          const auto there = geo::classify(cen[c], cen[c2]);
          const auto back = geo::classify(cen[c2], cen[c]);
          for (TypeB t2 : kAllTypeB) {
            for (SizeB j2 : kAllSizeB) {
              if (there != geo::DistanceBin::too_far) out += r.param(t1, j1, t2, j2, there);
              if (back != geo::DistanceBin::too_far) in += sp.pop(c2, t2, j2) * r.param(t2, j2, t1, j1, back);
            }
          }
        }
        const double pop = sp.pop(c, t1, j1);
        CHECK(out + r.st[s] + r.sl[s] + r.dt[s] == doctest::Approx(1.0).epsilon(1e-8));
        const double change = in - pop * out - pop * (r.sl[s] + r.dt[s]) + pop * r.bt[s];
        CHECK(std::abs(change) <= 1e-6 * std::max(1.0, pop));
        yearly_all += 52.0 * pop * (out + r.sl[s]);
      }
    }
    // Yearly totals are these expected flows rounded to whole head.
    CHECK(std::abs(d.truth.shipments.all_movements[c] - yearly_all) <= 0.5 + 1e-6);
  }
}

TEST_CASE("perturbation adds a remote county with reported shipments only") {
  auto cfg = small(0);
  cfg.perturbation = 0.0041;
  const auto d = generate(cfg);
  REQUIRE(!d.truth.remote_county.empty());
  const auto& sp = d.truth.subpops;
  const int remote = sp.county_count() - 1;
  CHECK(sp.counties[remote] == d.truth.remote_county);
  for (TypeB t : kAllTypeB) {
    for (SizeB j : kAllSizeB) CHECK(sp.pop(remote, t, j) == 0.0);
  }
  const double total = sp.total();
  CHECK(d.truth.remote_shipments == std::llround(0.0041 * 52.0 * total));
  CHECK(d.truth.shipments.all_movements[remote] == static_cast<double>(d.truth.remote_shipments));
}

TEST_CASE("ground truth round trip") {
  const auto d = generate(small(2));
  const auto dir = fresh_dir("cattle_synth_rt");
  write_dataset(dir, d);
  const auto g = load_ground_truth(dir / "ground_truth.json");
  CHECK(g.suppressed_cells == d.truth.suppressed_cells);
  CHECK(g.subpops.counties == d.truth.subpops.counties);
  CHECK(g.subpops.head == d.truth.subpops.head);
  CHECK(g.shipments.all_movements == d.truth.shipments.all_movements);
  CHECK(g.shipments.slaughter == d.truth.shipments.slaughter);
  REQUIRE(g.census.size() == d.truth.census.size());
  for (std::size_t s = 0; s < g.census.size(); ++s) {
    CHECK(g.census[s].populations == d.truth.census[s].populations);
    CHECK(g.census[s].shipments == d.truth.census[s].shipments);
  }
  for (int i = 0; i < movement::kPCount; ++i) CHECK(g.rates.p[i] == d.truth.rates.p[i]);
  CHECK(g.rates.bt == d.truth.rates.bt);
}

TEST_CASE("configuration is checked") {
  auto c = small(2);
  c.states = 0;
  CHECK_THROWS_AS(generate(c), SynthError);
  c = small(2);
  c.perturbation = 1.5;
  CHECK_THROWS_AS(generate(c), SynthError);
  c = small(-1);
  CHECK_THROWS_AS(generate(c), SynthError);
}
