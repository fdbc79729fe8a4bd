#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <set>

#include "doctest.h"
#include "testutil.hpp"

using namespace clf;

TEST_CASE("bank and block indexing") {
  CHECK(bank_index(5, 4) == 1);   // rows 1, 5, ... share bank 1
  CHECK(bank_index(0, 4) == 0);   // rows 0, 4, ... share bank 0
  CHECK(bank_index(7, 1) == 0);
  CHECK(block_index(5, 4) == 1);
  CHECK(block_index(3, 4) == 0);
  CHECK(block_index(9, 1) == 9);
}

TEST_CASE("required banks per window side") {
  CHECK(required_banks(3) == 4);  // four banks, not three: index = low address bits
  CHECK(required_banks(5) == 8);
  CHECK(required_banks(1) == 1);
}

TEST_CASE("timestamp quantization") {
  CHECK(quantize_ts(1020, 4, 8) == 255);
  CHECK(quantize_ts(1024, 4, 8) == 0);  // wraps
  for (std::int64_t t : {std::int64_t(0), std::int64_t(1), std::int64_t(123456789), INT64_MAX})
    CHECK(quantize_ts(t, 1, 64) == std::uint64_t(t));
}

TEST_CASE("wrapped timestamp difference") {
  CHECK(wrapped_diff(2, 250, 8) == 8);
  CHECK(wrapped_diff(100, 100, 8) == 0);
  CHECK(wrapped_diff(5, 10, 8) == 251);
}

TEST_CASE("edu_count over one block") {
  ModuleMemory mem(1, 2);
  SUBCASE("mixed hits") {
    mem.write(0, 10, 225);
    mem.write(0, 14, 238);
    const BlockView block{mem.coords(0, 0), mem.tqs(0, 0)};
    CHECK(edu_count(block, 11, 250, 1, 50, 8) == 1);  // x=10 within distance, dt=25
  }
  SUBCASE("empty block") {
    const BlockView block{mem.coords(0, 0), mem.tqs(0, 0)};
    CHECK(edu_count(block, 11, 250, 1, 50, 8) == 0);
  }
  SUBCASE("zero differences count") {
    mem.write(0, 11, 250);
    const BlockView block{mem.coords(0, 0), mem.tqs(0, 0)};
    CHECK(edu_count(block, 11, 250, 1, 50, 8) == 1);
  }
}

TEST_CASE("FIFO write pointer order") {
  ModuleMemory mem(2, 3);
  for (std::uint32_t k = 0; k < 10; ++k) {
    CHECK(mem.wpt(1) == k % 3);  // k-th write lands in slot k mod s
    mem.write(1, 100 + k, k);
  }
  // After 10 writes the survivors are the last three: 107, 108, 109.
  const auto coords = mem.coords(1, 1);
  std::multiset<std::uint64_t> kept(coords.begin(), coords.end());
  CHECK(kept == std::multiset<std::uint64_t>{107, 108, 109});
  CHECK(mem.coords(0, 0)[0] == ModuleMemory::kEmptyCoord);  // other block untouched
}

TEST_CASE("clf basics") {
  const SensorGeometry geo{64, 64};
  ClfConfig cfg;
  cfg.params = {1, 200, 1};
  SUBCASE("first event is noise") {
    ClfFilter f(geo, cfg);
    const Decision d = f.process({1000, 10, 10, Polarity::on, Label::unknown});
    CHECK_FALSE(d.is_signal);
    CHECK(d.count == 0);
  }
  SUBCASE("same pixel within t_th is signal") {
    ClfFilter f(geo, cfg);
    f.process({1000, 10, 10, Polarity::on, Label::unknown});
    const Decision d = f.process({1100, 10, 10, Polarity::on, Label::unknown});
    CHECK(d.is_signal);
    CHECK(d.count == 2);  // found by both the row and the column module
  }
  SUBCASE("out of range event throws") {
    ClfFilter f(geo, cfg);
    CHECK_THROWS_AS(f.process({0, 64, 0, Polarity::on, Label::unknown}), Error);
  }
}

TEST_CASE("config validation names the broken invariant") {
  const SensorGeometry geo{64, 64};
  ClfConfig cfg;
  SUBCASE("no module") {
    cfg.enable_rdm = cfg.enable_cdm = false;
    CHECK_THROWS_WITH_AS(ClfFilter(geo, cfg), doctest::Contains("module"), Error);
  }
  SUBCASE("window not representable") {
    cfg.bw_t = 4;
    cfg.quant_unit_us = 1;
    cfg.params.t_th_us = 200;  // 200 ticks needs more than 4 bits
    CHECK_THROWS_WITH_AS(ClfFilter(geo, cfg), doctest::Contains("2^BW_T"), Error);
  }
  SUBCASE("pipelined requires n_cr 1") {
    cfg.pipelined = true;
    cfg.params.n_cr = 2;
    CHECK_THROWS_WITH_AS(ClfFilter(geo, cfg), doctest::Contains("N_CR"), Error);
  }
}

TEST_CASE("default quantization unit") {
  CHECK(ClfConfig::default_quant_unit(200, 8) == 4);    // T_s = 1024us
  CHECK(ClfConfig::default_quant_unit(200, 32) == 1);
  CHECK(ClfConfig::default_quant_unit(200, 64) == 1);
}

TEST_CASE("oracle filter") {
  const SensorGeometry geo{64, 64};
  const FilterParams params{1, 200, 1};
  SUBCASE("first event") {
    OracleFilter f(geo, params);
    const Decision d = f.process({0, 5, 5, Polarity::on, Label::unknown});
    CHECK(d.count == 0);
    CHECK_FALSE(d.is_signal);
  }
  SUBCASE("three same-pixel events") {
    OracleFilter f(geo, params);
    f.process({0, 5, 5, Polarity::on, Label::unknown});
    f.process({50, 5, 5, Polarity::on, Label::unknown});
    CHECK(f.process({100, 5, 5, Polarity::on, Label::unknown}).count == 2);
  }
  SUBCASE("windowed scan equals the naive double loop") {
    const EventStream s = testutil::random_stream(geo, 1000, 99, 0.05);
    for (std::uint32_t n_cr : {1u, 2u}) {
      OracleFilter f(geo, {1, 200, n_cr});
      const auto got = run_filter(f, s);
      const auto expect = testutil::naive_oracle(s, {1, 200, n_cr});
      REQUIRE(got.size() == expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got[i].count == expect[i].count);
        REQUIRE(got[i].is_signal == expect[i].is_signal);
      }
    }
  }
}

TEST_CASE("capacity-saturated clf equals the oracle") {
  const EventStream s = testutil::mixed_stream(1234, 10000);
  const ClfConfig cfg = testutil::saturated_config(s);
  ClfFilter f(s.geometry, cfg);
  OracleFilter oracle(s.geometry, cfg.params);
  const auto a = run_filter(f, s);
  const auto b = run_filter(oracle, s);
  CHECK(testutil::decision_mismatches(a, b) == 0);
  // Double-count law: both modules see every window event, so the clf count
  // is exactly twice the oracle count.
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].count == 2 * b[i].count);
}

TEST_CASE("saturated clf equals the oracle at d_th 2") {
  const EventStream s = testutil::mixed_stream(777, 4000);
  ClfConfig cfg = testutil::saturated_config(s, 2, 1);
  cfg.n_rm = cfg.n_cm = required_banks(5);
  ClfFilter f(s.geometry, cfg);
  OracleFilter oracle(s.geometry, cfg.params);
  const auto a = run_filter(f, s);
  const auto b = run_filter(oracle, s);
  CHECK(testutil::decision_mismatches(a, b) == 0);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].count == 2 * b[i].count);
}

TEST_CASE("single-module saturated clf count equals the oracle count") {
  const EventStream s = testutil::mixed_stream(4321, 3000);
  ClfConfig cfg = testutil::saturated_config(s);
  cfg.enable_cdm = false;
  ClfFilter f(s.geometry, cfg);
  OracleFilter oracle(s.geometry, cfg.params);
  const auto a = run_filter(f, s);
  const auto b = run_filter(oracle, s);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].count == b[i].count);
}

TEST_CASE("baf filter") {
  const SensorGeometry geo{64, 64};
  const FilterParams params{1, 200, 1};
  SUBCASE("first event is noise") {
    BafFilter f(geo, params);
    CHECK_FALSE(f.process({0, 5, 5, Polarity::on, Label::unknown}).is_signal);
  }
  SUBCASE("neighbor stamp lets the next event pass") {
    BafFilter f(geo, params);
    f.process({0, 5, 5, Polarity::on, Label::unknown});
    CHECK(f.process({100, 6, 6, Polarity::on, Label::unknown}).is_signal);
  }
  SUBCASE("equals oracle at n_cr 1 on random streams") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const EventStream s = testutil::random_stream(geo, 2000, seed, 0.05);
      for (std::uint16_t d : {std::uint16_t(1), std::uint16_t(2)}) {
        BafFilter baf(geo, {d, 200, 1});
        OracleFilter oracle(geo, {d, 200, 1});
        CHECK(testutil::decision_mismatches(run_filter(baf, s), run_filter(oracle, s)) == 0);
      }
    }
  }
}

TEST_CASE("stcf filter") {
  const SensorGeometry geo{32, 32};
  SUBCASE("first event is noise") {
    StcfFilter f(geo, {1, 200, 1});
    CHECK_FALSE(f.process({0, 5, 5, Polarity::on, Label::unknown}).is_signal);
  }
  SUBCASE("n_cr 1 is an existence test over the neighborhood") {
    StcfFilter f(geo, {1, 200, 1});
    f.process({0, 4, 5, Polarity::on, Label::unknown});
    CHECK(f.process({100, 5, 5, Polarity::on, Label::unknown}).is_signal);
  }
  SUBCASE("count matches a per-pixel-latest reference at n_cr 2") {
    const EventStream s = testutil::random_stream(geo, 2000, 5, 0.1);
    StcfFilter f(geo, {1, 150, 2});
    // Reference: latest earlier timestamp per exact pixel, then count window
    // cells that are fresh. Computed by backward scan, independent of the
    // filter's incremental map.
    std::vector<Decision> expect;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Event& e = s.events[i];
      std::map<std::pair<int, int>, std::int64_t> latest;
      for (std::size_t j = 0; j < i; ++j) {
        const Event& o = s.events[j];
        auto [it, ok] = latest.try_emplace({o.x, o.y}, o.t);
        if (!ok) it->second = std::max(it->second, o.t);
      }
      std::uint32_t count = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = latest.find({int(e.x) + dx, int(e.y) + dy});
          if (it != latest.end() && e.t - it->second <= 150) ++count;
        }
      expect.push_back({count >= 2, count});
    }
    const auto got = run_filter(f, s);
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].count == expect[i].count);
      REQUIRE(got[i].is_signal == expect[i].is_signal);
    }
  }
}

TEST_CASE("ssm filter") {
  const SensorGeometry geo{64, 48};
  const FilterParams params{1, 200, 1};
  SUBCASE("r=1 equals baf") {
    const EventStream s = testutil::random_stream(geo, 2000, 8, 0.05);
    SsmFilter ssm(geo, params, 1);
    BafFilter baf(geo, params);
    CHECK(testutil::decision_mismatches(run_filter(ssm, s), run_filter(baf, s)) == 0);
  }
  SUBCASE("r=2 shares cells") {
    SsmFilter f(geo, params, 2);
    f.process({0, 0, 0, Polarity::on, Label::unknown});
    CHECK(f.process({100, 1, 1, Polarity::on, Label::unknown}).is_signal);  // same coarse cell
  }
  SUBCASE("cell count at r=4") {
    SsmFilter f(geo, params, 4);
    CHECK(f.cell_count() == 16 * 12);
  }
  SUBCASE("r must be a power of two") { CHECK_THROWS_AS(SsmFilter(geo, params, 3), Error); }
}

TEST_CASE("rcf is clf with one bank and one slot") {
  const SensorGeometry geo{64, 64};
  const FilterParams params{1, 200, 1};
  const EventStream s = testutil::mixed_stream(77, 4000);
  ClfFilter rcf = make_rcf(geo, params);
  ClfFilter clf11(geo, ClfConfig::rcf(params));
  const auto a = run_filter(rcf, s);
  const auto b = run_filter(clf11, s);
  CHECK(testutil::decision_mismatches(a, b) == 0);
  SUBCASE("two same-pixel events within t_th") {
    ClfFilter f = make_rcf(geo, params);
    f.process({0, 9, 9, Polarity::on, Label::unknown});
    CHECK(f.process({50, 9, 9, Polarity::on, Label::unknown}).is_signal);
  }
}

TEST_CASE("decision consistency: is_signal iff count >= n_cr") {
  const SensorGeometry geo{32, 32};
  const EventStream s = testutil::random_stream(geo, 1500, 13, 0.1);
  for (std::uint32_t n_cr : {1u, 2u, 3u}) {
    ClfConfig cfg;
    cfg.params = {1, 200, n_cr};
    ClfFilter clf(geo, cfg);
    StcfFilter stcf(geo, cfg.params);
    OracleFilter oracle(geo, cfg.params);
    for (StreamFilter* f : {static_cast<StreamFilter*>(&clf), static_cast<StreamFilter*>(&stcf),
                            static_cast<StreamFilter*>(&oracle)}) {
      for (const Decision& d : run_filter(*f, s)) REQUIRE(d.is_signal == (d.count >= n_cr));
    }
  }
}

TEST_CASE("monotone capacity: acceptance grows with s") {
  const EventStream s = testutil::standard_mix(3, 1.3);
  std::vector<std::vector<Decision>> by_s;
  for (std::uint32_t cap : {1u, 2u, 3u, 4u}) {
    ClfConfig cfg;
    cfg.params = {1, 200, 1};
    cfg.s_rm = cfg.s_cm = cap;
    cfg.bw_t = 64;
    ClfFilter f(s.geometry, cfg);
    by_s.push_back(run_filter(f, s));
  }
  for (std::size_t k = 1; k < by_s.size(); ++k)
    for (std::size_t i = 0; i < s.size(); ++i)
      if (by_s[k - 1][i].is_signal) REQUIRE(by_s[k][i].is_signal);
}

TEST_CASE("bitwidth soundness") {
  // No false negatives: a true difference within t_th always passes the
  // wrapped comparison; false positives sit in [k*T_s - u, k*T_s + t_th + u].
  SplitMix64 rng(21);
  const std::uint32_t bw = 8;
  const std::int64_t quant = 4, t_th = 200;
  const std::uint64_t ticks = std::uint64_t((t_th + quant - 1) / quant);
  const std::int64_t t_s = quant << bw;
  for (int iter = 0; iter < 20000; ++iter) {
    const std::int64_t t1 = std::int64_t(rng.below(1 << 20));
    const std::int64_t dt = std::int64_t(rng.below(4 * std::uint64_t(t_s)));
    const std::int64_t t0 = t1 + dt;
    const std::uint64_t w =
        wrapped_diff(quantize_ts(t0, quant, bw), quantize_ts(t1, quant, bw), bw);
    if (dt <= t_th) REQUIRE(w <= ticks);
    if (w <= ticks && dt > t_th) {
      const std::int64_t k = (dt + t_s / 2) / t_s;  // nearest wrap multiple
      REQUIRE(dt >= k * t_s - quant);
      REQUIRE(dt <= k * t_s + t_th + quant);  // k=0 covers the quantization slack above t_th
    }
  }
}

TEST_CASE("reduced bitwidth wraps into a false positive at the span boundary") {
  // quant 4, 8 bits: the stored timestamp wraps every 1024 us. Two same-pixel
  // events 1024 us apart are not correlated (t_th 200) but their quantized
  // difference wraps to zero; full precision keeps them apart.
  const SensorGeometry geo{16, 16};
  ClfConfig narrow;
  narrow.params = {1, 200, 1};
  narrow.bw_t = 8;
  narrow.quant_unit_us = 4;
  ClfFilter f8(geo, narrow);
  f8.process({0, 5, 5, Polarity::on, Label::unknown});
  CHECK(f8.process({1024, 5, 5, Polarity::on, Label::unknown}).is_signal);

  ClfConfig wide = narrow;
  wide.bw_t = 64;
  wide.quant_unit_us = 1;
  ClfFilter f64(geo, wide);
  f64.process({0, 5, 5, Polarity::on, Label::unknown});
  CHECK_FALSE(f64.process({1024, 5, 5, Polarity::on, Label::unknown}).is_signal);
}

TEST_CASE("same-polarity mode") {
  const SensorGeometry geo{16, 16};
  ClfConfig cfg;
  cfg.params = {1, 200, 1};
  cfg.same_polarity_only = true;
  SUBCASE("opposite polarity does not correlate") {
    ClfFilter f(geo, cfg);
    f.process({0, 5, 5, Polarity::off, Label::unknown});
    CHECK_FALSE(f.process({10, 5, 5, Polarity::on, Label::unknown}).is_signal);
    CHECK(f.process({20, 5, 5, Polarity::off, Label::unknown}).is_signal);
  }
  SUBCASE("saturated clf equals polarity-aware oracle") {
    const EventStream s = testutil::random_stream(geo, 1500, 31, 0.2);
    ClfConfig sat = testutil::saturated_config(s);
    sat.same_polarity_only = true;
    ClfFilter f(geo, sat);
    OracleFilter oracle(geo, sat.params, true);
    CHECK(testutil::decision_mismatches(run_filter(f, s), run_filter(oracle, s)) == 0);
  }
}

TEST_CASE("memory footprint accounting") {
  SUBCASE("hand-checked 4x4") {
    ClfConfig cfg;
    cfg.params = {1, 200, 1};
    cfg.n_rm = cfg.n_cm = 1;
    cfg.s_rm = cfg.s_cm = 1;
    cfg.bw_t = 8;
    cfg.quant_unit_us = 4;
    CHECK(memory_footprint_bits(cfg, {4, 4}) == 88);  // 4*(2+8+1) per module, no wpt bits at s=1
  }
  SUBCASE("column module disabled leaves row terms") {
    ClfConfig cfg;
    cfg.params = {1, 200, 1};
    cfg.enable_cdm = false;
    cfg.s_rm = 4;
    cfg.bw_t = 8;
    cfg.quant_unit_us = 4;
    const SensorGeometry geo{8, 4};
    // rows * s * (bw_x + bw_t + 1) + rows * log2 s = 4*4*(3+8+1) + 4*2
    CHECK(memory_footprint_bits(cfg, geo) == 4 * 4 * 12 + 8);
  }
  SUBCASE("matches a slot-by-slot walk of the live structure") {
    SplitMix64 rng(55);
    for (int iter = 0; iter < 10; ++iter) {
      ClfConfig cfg;
      cfg.params = {1, 200, 1};
      cfg.s_rm = 1 + std::uint32_t(rng.below(8));
      cfg.s_cm = 1 + std::uint32_t(rng.below(8));
      cfg.bw_t = 8 + std::uint32_t(rng.below(25));
      cfg.quant_unit_us = ClfConfig::default_quant_unit(200, cfg.bw_t);
      cfg.enable_cdm = rng.below(4) != 0;
      const SensorGeometry geo{std::uint16_t(8 + rng.below(1280)), std::uint16_t(8 + rng.below(800))};
      ClfFilter f(geo, cfg);

      // Independent count: walk the instantiated blocks slot by slot.
      std::uint64_t bits = 0;
      const auto count_module = [&](const ModuleMemory& mem, std::uint64_t coord_bits) {
        if (mem.lines() == 0) return;
        for (std::uint32_t line = 0; line < mem.lines(); ++line) {
          bits += std::uint64_t(mem.coords(line, line).size()) * (coord_bits + cfg.bw_t + 1);
          bits += ceil_log2(mem.slots());
        }
      };
      count_module(f.row_memory(), ceil_log2(geo.width));
      count_module(f.col_memory(), ceil_log2(geo.height));
      REQUIRE(bits == memory_footprint_bits(cfg, geo));
    }
  }
}
