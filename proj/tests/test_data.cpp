#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <bit>
#include <numbers>
#include <sstream>

#include "hiformer/container.hpp"
#include "hiformer/dataset.hpp"
#include "hiformer/error.hpp"
#include "hiformer/normalization.hpp"
#include "hiformer/synth.hpp"
#include "hiformer/windows.hpp"
#include "support.hpp"

using namespace hiformer;
using data::Split;
using testing_support::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// T x N dataset with C weather channels; values from fn(t, n, channel) where
// channel 0 is power.
data::RawDataset make_raw(std::size_t T, std::size_t N, std::size_t C,
                          const std::function<double(std::size_t, std::size_t, std::size_t)>& fn) {
  data::RawDataset raw;
  for (std::size_t t = 0; t < T; ++t) raw.timestamps.push_back(static_cast<std::int64_t>(t) * 600);
  for (std::size_t n = 0; n < N; ++n) raw.turbine_ids.push_back("W" + std::to_string(n));
  for (std::size_t c = 0; c < C; ++c) raw.feature_names.push_back("f" + std::to_string(c));
  raw.power.resize(T * N);
  raw.weather.resize(T * N * C);
  raw.missing.assign(T * N, 0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t n = 0; n < N; ++n) {
      raw.power[t * N + n] = fn(t, n, 0);
      for (std::size_t c = 0; c < C; ++c) raw.weather[(t * N + n) * C + c] = fn(t, n, c + 1);
    }
  return raw;
}

double wiggle(std::size_t t, std::size_t n, std::size_t c) {
  return std::sin(0.37 * double(t) + double(n)) + 0.1 * double(c) * std::cos(0.11 * double(t * (c + 1)));
}

data::WindowConfig windows(std::size_t P, std::size_t Q, std::array<std::size_t, 3> ratio = {7, 1, 2}) {
  data::WindowConfig w;
  w.P = P;
  w.Q = Q;
  w.ratio = ratio;
  return w;
}

const char* kSdwpfHeader = "TurbID,Day,Tmstamp,Wspd,Wdir,Etmp,Itmp,Ndir,Pab1,Pab2,Pab3,Prtv,Patv\n";

}  // namespace

// ------------------------------------------------------------------------ CSV

TEST(Csv, GenericRoundTripsFields) {
  TempDir dir("csv");
  write_text(dir / "a.csv", "timestamp,turbine,power,ws,temp\n0,A,1.5,3,-2\n600,A,2.25,4,0.125\n1200,A,0,5.5,1e-3\n");
  const auto raw = data::load_csv(dir / "a.csv", data::Schema::generic);
  EXPECT_EQ(raw.timestamps, (std::vector<std::int64_t>{0, 600, 1200}));
  EXPECT_EQ(raw.turbine_ids, (std::vector<std::string>{"A"}));
  EXPECT_EQ(raw.feature_names, (std::vector<std::string>{"ws", "temp"}));
  EXPECT_EQ(raw.power, (std::vector<double>{1.5, 2.25, 0}));
  EXPECT_EQ(raw.weather, (std::vector<double>{3, -2, 4, 0.125, 5.5, 1e-3}));
  EXPECT_EQ(raw.step(), 600);
  data::write_csv(raw, dir / "b.csv");
  const auto again = data::load_csv(dir / "b.csv", data::Schema::generic);
  EXPECT_EQ(again.power, raw.power);
  EXPECT_EQ(again.weather, raw.weather);
  EXPECT_EQ(again.timestamps, raw.timestamps);
}

TEST(Csv, SdwpfHasSevenWeatherChannelsAndOneMissingCell) {
  TempDir dir("sdwpf");
  std::string text = kSdwpfHeader;
  text += "1,1,00:00,5.1,2,20,25,10,1,1,1,-0.3,300\n";
  text += "2,1,00:00,5.2,3,21,26,11,2,2,2,-0.2,310\n";
  text += "1,1,00:10,5.3,4,22,27,12,3,3,3,-0.1,\n";
  text += "2,1,00:10,5.4,5,23,28,13,4,4,4,0.0,-5\n";
  text += "1,2,00:00,5.5,6,24,29,14,5,5,5,0.1,330\n";
  text += "2,2,00:00,5.6,7,25,30,15,6,6,6,0.2,340\n";
  write_text(dir / "s.csv", text);
  // Rows for day 1 00:20 .. day 1 23:50 are absent, so spacing is not uniform.
  EXPECT_NE(error_of([&] { data::load_csv(dir / "s.csv", data::Schema::sdwpf); }).find("non-uniform"), std::string::npos);

  text = kSdwpfHeader;
  text += "1,1,00:00,5.1,2,20,25,10,1,1,1,-0.3,300\n";
  text += "2,1,00:00,5.2,3,21,26,11,2,2,2,-0.2,310\n";
  text += "1,1,00:10,5.3,4,22,27,12,3,3,3,-0.1,\n";
  text += "2,1,00:10,5.4,5,23,28,13,4,4,4,0.0,-5\n";
  write_text(dir / "s.csv", text);
  const auto raw = data::load_csv(dir / "s.csv", data::Schema::sdwpf);
  EXPECT_EQ(raw.features(), 7u);
  EXPECT_EQ(raw.feature_names, (std::vector<std::string>{"Wspd", "Wdir", "Etmp", "Itmp", "Ndir", "Pab", "Prtv"}));
  EXPECT_EQ(raw.turbines(), 2u);
  EXPECT_EQ(raw.timestamps, (std::vector<std::int64_t>{0, 600}));
  EXPECT_EQ(std::count(raw.missing.begin(), raw.missing.end(), 1), 1);
  EXPECT_EQ(raw.missing[1 * 2 + 0], 1);
  EXPECT_TRUE(std::isnan(raw.power_at(1, 0)));
  EXPECT_EQ(raw.power_at(0, 1), 310.0);
  EXPECT_EQ(raw.power_at(1, 1), 0.0);
  EXPECT_EQ(raw.clamped_negative, 1u);
  EXPECT_EQ(raw.weather_at(1, 1, 6), 0.0);
  EXPECT_EQ(raw.weather_at(0, 0, 5), 1.0);
}

TEST(Csv, SdwpfDayOffsetsTime) {
  TempDir dir("sdwpf_day");
  std::string text = kSdwpfHeader;
  text += "1,2,23:50,1,1,1,1,1,1,1,1,1,1\n";
  text += "1,3,00:00,1,1,1,1,1,1,1,1,1,1\n";
  write_text(dir / "s.csv", text);
  const auto raw = data::load_csv(dir / "s.csv", data::Schema::sdwpf);
  EXPECT_EQ(raw.timestamps, (std::vector<std::int64_t>{(1440 + 1430) * 60, 2880 * 60}));
}

TEST(Csv, GefcomBuildsWindSpeeds) {
  TempDir dir("gef");
  write_text(dir / "g.csv",
             "ZONEID,TIMESTAMP,TARGETVAR,U10,V10,U100,V100\n"
             "1,20120101 1:00,0.5,3,4,6,8\n"
             "1,20120101 2:00,0.25,0,1,1,0\n"
             "2,20120101 1:00,,1,1,2,2\n"
             "2,20120101 2:00,0.75,0,0,0,0\n");
  const auto raw = data::load_csv(dir / "g.csv", data::Schema::gefcom);
  EXPECT_EQ(raw.features(), 2u);
  EXPECT_EQ(raw.step(), 3600);
  EXPECT_DOUBLE_EQ(raw.weather_at(0, 0, 0), 5.0);
  EXPECT_DOUBLE_EQ(raw.weather_at(0, 0, 1), 10.0);
  EXPECT_EQ(raw.missing[0 * 2 + 1], 1);
}

TEST(Csv, ErrorsNameTheProblem) {
  TempDir dir("csv_err");
  EXPECT_NE(error_of([&] { data::load_csv(dir / "nope.csv", data::Schema::generic); }).find("not found"),
            std::string::npos);
  write_text(dir / "m.csv", "timestamp,turbine,ws\n0,A,1\n");
  EXPECT_NE(error_of([&] { data::load_csv(dir / "m.csv", data::Schema::generic); }).find("'power'"),
            std::string::npos);
  write_text(dir / "u.csv", "timestamp,turbine,power,ws\n0,A,1,1\n600,A,1,1\n1500,A,1,1\n");
  const auto msg = error_of([&] { data::load_csv(dir / "u.csv", data::Schema::generic); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  write_text(dir / "d.csv", "timestamp,turbine,power,ws\n0,A,1,1\n0,A,2,1\n");
  EXPECT_NE(error_of([&] { data::load_csv(dir / "d.csv", data::Schema::generic); }).find("duplicate"),
            std::string::npos);
  EXPECT_THROW(data::schema_from_string("parquet"), ConfigError);
}

TEST(CsvProperty, LoadWriteLoadIsIdempotent) {
  TempDir dir("idem");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    data::SynthRecipe r;
    r.turbines = 3;
    r.rows = 50;
    r.features = 3;
    r.seed = seed;
    auto raw = data::synth_generate(r);
    raw.power[7] = std::nan("");
    data::write_csv(raw, dir / "a.csv");
    const auto first = data::load_csv(dir / "a.csv", data::Schema::generic);
    data::write_csv(first, dir / "b.csv");
    const auto second = data::load_csv(dir / "b.csv", data::Schema::generic);
    EXPECT_EQ(read_text(dir / "a.csv"), read_text(dir / "b.csv"));
    EXPECT_EQ(first.missing, second.missing);
    EXPECT_EQ(first.weather, second.weather);
    for (std::size_t i = 0; i < raw.power.size(); ++i) {
      if (std::isnan(raw.power[i])) {
        EXPECT_TRUE(std::isnan(second.power[i]));
      } else {
        EXPECT_EQ(second.power[i], raw.power[i]);
      }
    }
  }
}

// ------------------------------------------------------------------- cleaning

TEST(Clean, InterpolatesShortGapsAndFlagsLongOnes) {
  auto raw = make_raw(12, 1, 1, [](std::size_t t, std::size_t, std::size_t c) { return c == 0 ? double(t) : 1.0; });
  const double nan = std::nan("");
  raw.power[0] = nan;             // leading edge
  raw.power[3] = raw.power[4] = nan;  // short interior gap
  for (std::size_t t = 6; t < 10; ++t) raw.power[t] = nan;  // 4 > max_gap
  const auto rep = data::clean_missing(raw, 3);
  EXPECT_EQ(rep.interpolated, 3u);
  EXPECT_EQ(rep.invalidated, 4u);
  EXPECT_EQ(raw.power[0], 1.0);
  EXPECT_DOUBLE_EQ(raw.power[3], 3.0);
  EXPECT_DOUBLE_EQ(raw.power[4], 4.0);
  EXPECT_DOUBLE_EQ(raw.power[7], 7.0);
  for (std::size_t t = 0; t < 12; ++t) EXPECT_EQ(raw.invalid[t], t >= 6 && t < 10 ? 1 : 0) << t;
}

// -------------------------------------------------------------------- windows

TEST(Windows, SplitBoundariesAndCountsForHundredRows) {
  const auto plan = data::SplitPlan::chronological(100, {7, 1, 2});
  EXPECT_EQ(plan.train.begin, 0u);
  EXPECT_EQ(plan.train.end, 70u);
  EXPECT_EQ(plan.val.begin, 70u);
  EXPECT_EQ(plan.val.end, 80u);
  EXPECT_EQ(plan.test.end, 100u);
  EXPECT_EQ(data::window_count(plan.train.size(), 10, 5), 56u);

  const auto raw = make_raw(100, 2, 1, wiggle);
  const auto ds = data::make_windows(raw, windows(10, 5, {7, 0, 3}));
  EXPECT_EQ(ds.count(Split::train), 56u);
  EXPECT_EQ(ds.count(Split::val), 0u);
  EXPECT_EQ(ds.count(Split::test), 16u);
  EXPECT_EQ(ds.starts(Split::train).front(), 0u);
  // 10 validation rows cannot hold P + Q = 15.
  EXPECT_NE(error_of([&] { data::make_windows(raw, windows(10, 5)); }).find("val"), std::string::npos);
}

TEST(Windows, ExactFitGivesOneWindow) {
  const auto raw = make_raw(15, 1, 1, wiggle);
  const auto ds = data::make_windows(raw, windows(10, 5, {1, 0, 0}));
  EXPECT_EQ(ds.count(Split::train), 1u);
  EXPECT_EQ(ds.starts(Split::train).front(), 0u);
}

TEST(Windows, SampleHoldsNormalizedRows) {
  const auto raw = make_raw(200, 3, 2, wiggle);
  const auto ds = data::make_windows(raw, windows(10, 5));
  const auto& st = ds.stats();
  const auto s = ds.sample(Split::val, 3);
  ASSERT_EQ(s.power.shape(), (ad::Shape{10, 3}));
  ASSERT_EQ(s.weather.shape(), (ad::Shape{10, 3, 2}));
  ASSERT_EQ(s.target.shape(), (ad::Shape{5, 3}));
  EXPECT_EQ(s.start, ds.plan().val.begin + 3);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t n = 0; n < 3; ++n) {
      EXPECT_NEAR(s.power.at({t, n}), st.apply(0, raw.power_at(s.start + t, n)), 1e-15);
      EXPECT_NEAR(s.weather.at({t, n, 1}), st.apply(2, raw.weather_at(s.start + t, n, 1)), 1e-15);
    }
  for (std::size_t q = 0; q < 5; ++q)
    EXPECT_NEAR(s.target.at({q, 2}), st.apply(0, raw.power_at(s.start + 10 + q, 2)), 1e-15);
  EXPECT_THROW(ds.sample(Split::val, ds.count(Split::val)), ContractError);
}

TEST(Windows, InvalidRowsDropWindows) {
  auto raw = make_raw(120, 2, 1, wiggle);
  for (std::size_t t = 30; t < 36; ++t) raw.power[t * 2 + 1] = std::nan("");
  const auto ds = data::make_windows(raw, windows(8, 4, {1, 0, 0}));
  EXPECT_EQ(ds.count(Split::train) + ds.windows_dropped(), data::window_count(120, 8, 4));
  EXPECT_EQ(ds.windows_dropped(), 6u + 8 + 4 - 1);
  for (std::size_t s : ds.starts(Split::train)) EXPECT_TRUE(s + 12 <= 30 || s >= 36) << s;
}

TEST(WindowsProperty, NoLeakageAcrossSplits) {
  for (std::size_t T : {200u, 333u, 1000u})
    for (auto [P, Q] : {std::pair<std::size_t, std::size_t>{10, 5}, {12, 3}, {4, 8}}) {
      const auto ds = data::make_windows(make_raw(T, 2, 1, wiggle), windows(P, Q));
      auto last = [&](Split s) { return ds.starts(s).back() + P + Q - 1; };
      auto first = [&](Split s) { return ds.starts(s).front(); };
      EXPECT_LT(last(Split::train), first(Split::val));
      EXPECT_LT(last(Split::val), first(Split::test));
      EXPECT_LT(last(Split::test), T);
      for (Split s : {Split::train, Split::val, Split::test}) {
        EXPECT_GE(first(s), ds.plan()[s].begin);
        EXPECT_LE(last(s), ds.plan()[s].end - 1);
      }
    }
}

TEST(WindowsProperty, CountFormulaHoldsExactly) {
  for (std::size_t P = 1; P <= 6; ++P)
    for (std::size_t Q = 1; Q <= 4; ++Q)
      for (std::size_t stride = 1; stride <= 3; ++stride)
        for (std::size_t T = P + Q; T < P + Q + 20; ++T) {
          std::size_t brute = 0;
          for (std::size_t s = 0; s + P + Q <= T; s += stride) ++brute;
          EXPECT_EQ(data::window_count(T, P, Q, stride), brute);
        }
  EXPECT_EQ(data::window_count(5, 3, 3), 0u);
}

TEST(Windows, CacheRoundTripsAndRejectsDamage) {
  TempDir dir("cache");
  const auto ds = data::make_windows(make_raw(150, 2, 2, wiggle), windows(6, 3));
  ds.save(dir / "w.bin");
  const auto back = data::WindowedDataset::load(dir / "w.bin");
  EXPECT_EQ(back.P(), 6u);
  EXPECT_EQ(back.turbine_ids(), ds.turbine_ids());
  EXPECT_EQ(back.starts(Split::test), ds.starts(Split::test));
  EXPECT_EQ(back.stats().mean, ds.stats().mean);
  const auto a = ds.sample(Split::test, 2), b = back.sample(Split::test, 2);
  EXPECT_TRUE(std::ranges::equal(a.weather.data(), b.weather.data()));

  auto bytes = read_text(dir / "w.bin");
  write_text(dir / "short.bin", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(data::WindowedDataset::load(dir / "short.bin"), DataError);
}

// -------------------------------------------------------------- normalization

TEST(Normalization, HandExample) {
  train::NormStats st{{"power"}, {2.0}, {1.0}};
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(train::zscore(x, st, 0), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(train::inverse_zscore(train::zscore(x, st, 0), st, 0), x);
  EXPECT_THROW(train::zscore(x, st, 1), DimensionError);
}

TEST(Normalization, FitUsesOnlyTrainingRows) {
  auto raw = make_raw(100, 3, 2, wiggle);
  const auto plan = data::SplitPlan::chronological(100, {7, 1, 2});
  const auto st = train::NormStats::fit(raw, plan);
  ASSERT_EQ(st.channels(), 3u);
  EXPECT_EQ(st.names, (std::vector<std::string>{"power", "f0", "f1"}));
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double m = 0, v = 0;
    const double n = 70.0 * 3;
    for (std::size_t t = 0; t < 70; ++t)
      for (std::size_t k = 0; k < 3; ++k) m += (ch ? raw.weather_at(t, k, ch - 1) : raw.power_at(t, k)) / n;
    for (std::size_t t = 0; t < 70; ++t)
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = (ch ? raw.weather_at(t, k, ch - 1) : raw.power_at(t, k)) - m;
        v += d * d / (n - 1);
      }
    EXPECT_NEAR(st.mean[ch], m, 1e-13);
    EXPECT_NEAR(st.stddev[ch], std::sqrt(v), 1e-13);
  }
  for (std::size_t t = 70; t < 100; ++t) raw.power[t * 3] = 1e6;
  EXPECT_EQ(train::NormStats::fit(raw, plan).mean, st.mean);
}

TEST(NormalizationProperty, TrainSplitIsStandardizedAndRoundTrips) {
  for (std::uint64_t seed : {5u, 6u}) {
    data::SynthRecipe r;
    r.turbines = 4;
    r.rows = 500;
    r.seed = seed;
    const auto raw = data::synth_generate(r);
    const auto ds = data::make_windows(raw, windows(12, 6));
    const auto& tr = ds.plan().train;
    double m = 0, v = 0;
    const double n = double(tr.size() * ds.N());
    for (std::size_t t = tr.begin; t < tr.end; ++t)
      for (std::size_t k = 0; k < ds.N(); ++k) m += ds.power(t, k) / n;
    for (std::size_t t = tr.begin; t < tr.end; ++t)
      for (std::size_t k = 0; k < ds.N(); ++k) v += (ds.power(t, k) - m) * (ds.power(t, k) - m) / (n - 1);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-12);
    for (std::size_t t = 0; t < raw.rows(); ++t)
      EXPECT_NEAR(ds.stats().invert(0, ds.power(t, 1)), raw.power_at(t, 1), 1e-12);
  }
}

TEST(Normalization, ConstantChannelIsNamed) {
  const auto raw = make_raw(200, 2, 2, [](std::size_t t, std::size_t n, std::size_t c) {
    return c == 2 ? 4.0 : wiggle(t, n, c);
  });
  const auto msg = error_of([&] { data::make_windows(raw, windows(4, 2)); });
  EXPECT_NE(msg.find("f1"), std::string::npos) << msg;
}

// ---------------------------------------------------------------------- synth

TEST(Synth, NoiselessPowerIsClosedForm) {
  data::SynthRecipe r;
  r.turbines = 3;
  r.rows = 300;
  r.noise_std = 0.0;
  const auto raw = data::synth_generate(r);
  for (std::size_t t = r.lag; t < r.rows; ++t)
    for (std::size_t n = 0; n < 3; ++n) {
      const double td = double(t);
      const double want = r.base +
                          r.diurnal_amp * std::sin(2 * std::numbers::pi * td / r.diurnal_period + r.phase_spread * n / 3.0) +
                          r.weekly_amp * std::sin(2 * std::numbers::pi * td / r.weekly_period) +
                          r.coupling * (raw.weather_at(t - r.lag, n, 0) - r.wind_mean);
      EXPECT_NEAR(raw.power_at(t, n), want, 1e-12);
    }
  r.coupling = 0.0;
  const auto flat = data::synth_generate(r);
  for (std::size_t t = 0; t < r.rows; ++t)
    EXPECT_NEAR(flat.power_at(t, 0),
                r.base + r.diurnal_amp * std::sin(2 * std::numbers::pi * t / r.diurnal_period) +
                    r.weekly_amp * std::sin(2 * std::numbers::pi * t / r.weekly_period),
                1e-12);
}

TEST(Synth, SameSeedSameData) {
  data::SynthRecipe r;
  r.rows = 200;
  const auto a = data::synth_generate(r), b = data::synth_generate(r);
  EXPECT_EQ(a.power, b.power);
  EXPECT_EQ(a.weather, b.weather);
  EXPECT_EQ(a.turbine_ids.front(), "T01");
  EXPECT_EQ(a.coords.size(), r.turbines);
  r.seed += 1;
  EXPECT_NE(data::synth_generate(r).power, a.power);
}

TEST(Synth, LaggedCorrelationMatchesRecipe) {
  data::SynthRecipe r;  // coupling 0.8
  const auto raw = data::synth_generate(r);
  const double want = data::analytic_lagged_correlation(r);
  for (std::size_t n = 0; n < r.turbines; ++n) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, k = 0;
    for (std::size_t t = r.lag; t < r.rows; ++t) {
      const double x = raw.weather_at(t - r.lag, n, 0), y = raw.power_at(t, n);
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
      ++k;
    }
    const double cov = sxy / k - sx / k * sy / k;
    const double corr = cov / std::sqrt((sxx / k - sx * sx / k / k) * (syy / k - sy * sy / k / k));
    EXPECT_NEAR(corr, want, 0.1) << "turbine " << n;
  }
}

// ------------------------------------------------------------------ container

TEST(Container, RoundTripAndDamageDetection) {
  TempDir dir("box");
  const std::vector<double> payload{1.0, -0.0, 1e-300, std::numbers::pi};
  io::write_container(dir / "c.bin", "TESTMAGC", 3, {{"k", "v"}}, payload);
  const auto box = io::read_container(dir / "c.bin", "TESTMAGC", 3);
  EXPECT_EQ(box.header["k"], "v");
  ASSERT_EQ(box.payload.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(box.payload[i]), std::bit_cast<std::uint64_t>(payload[i]));

  EXPECT_THROW(io::read_container(dir / "c.bin", "OTHERMAG", 3), DataError);
  EXPECT_THROW(io::read_container(dir / "c.bin", "TESTMAGC", 4), DataError);
  auto bytes = read_text(dir / "c.bin");
  auto flipped = bytes;
  flipped[flipped.size() - 12] ^= 0x01;
  write_text(dir / "f.bin", flipped);
  EXPECT_THROW(io::read_container(dir / "f.bin", "TESTMAGC", 3), DataError);
  write_text(dir / "t.bin", bytes + "x");
  EXPECT_THROW(io::read_container(dir / "t.bin", "TESTMAGC", 3), DataError);
  write_text(dir / "s.bin", bytes.substr(0, 20));
  EXPECT_THROW(io::read_container(dir / "s.bin", "TESTMAGC", 3), DataError);
  EXPECT_THROW(io::read_container(dir / "none.bin", "TESTMAGC", 3), DataError);
}
