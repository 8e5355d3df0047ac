#include <cstring>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "annihilate/io.hpp"
#include "annihilate/version.hpp"

using namespace annihilate;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(IO, DoublesRoundTripBitExactly) {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 20000; ++k) {
    std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_TRUE(same_bits(io::parse_double(io::format_double(v)), v)) << io::format_double(v);
  }
  for (double v : {0.0, -0.0, 1e-310, 0.1, 1.0 / 3.0, 5e-324})
    EXPECT_TRUE(same_bits(io::parse_double(io::format_double(v)), v));
}

TEST(IO, HeaderCarriesVersionAndHash) {
  const io::Provenance p{"abc123", {{"command", "simulate"}}};
  const std::string line = io::header_line(p);
  EXPECT_EQ(line.rfind("# annihilate ", 0), 0u);
  const auto fields = io::parse_header(line);
  auto get = [&](const std::string& k) {
    for (const auto& [key, v] : fields)
      if (key == k) return v;
    return std::string();
  };
  EXPECT_EQ(get("version"), kVersion);
  EXPECT_EQ(get("config"), "abc123");
  EXPECT_EQ(get("command"), "simulate");
}

TEST(IO, TrajectoryCsvRoundTrip) {
  IntegratorConfig c;
  c.t_end = 1.0;
  c.record_steps = true;
  const Trajectory tr = evolve(make_state({-0.7, -0.1, 0.3, 1.1}, {1, -1, 0, 1}), c);
  std::stringstream ss;
  io::write_trajectory_csv(ss, tr.samples, io::Provenance{});
  const auto back = io::read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), tr.samples.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    ASSERT_EQ(back[k].size(), tr.samples[k].size());
    EXPECT_TRUE(same_bits(back[k].time, tr.samples[k].time));
    EXPECT_TRUE(same_bits(back[k].coupling, tr.samples[k].coupling));
    EXPECT_EQ(back[k].charges, tr.samples[k].charges);
    for (std::size_t i = 0; i < back[k].size(); ++i)
      EXPECT_TRUE(same_bits(back[k].positions[i], tr.samples[k].positions[i]));
  }
}

TEST(IO, EventsJsonlRoundTrip) {
  EventRecord e;
  e.tau = 0.1 + 0.2;
  e.y = -1.0 / 3.0;
  e.cluster = {2, 3, 4};
  e.pre_charges = {1, -1, 1};
  e.post_charges = {1, 0, 0};
  std::stringstream ss;
  io::write_events_jsonl(ss, {e, e}, io::Provenance{"h", {}});
  std::string first;
  std::getline(ss, first);
  EXPECT_NE(first.find("\"header\""), std::string::npos);
  ss.seekg(0);
  const auto back = io::read_events_jsonl(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(same_bits(back[0].tau, e.tau));
  EXPECT_TRUE(same_bits(back[0].y, e.y));
  EXPECT_EQ(back[1].cluster, e.cluster);
  EXPECT_EQ(back[1].pre_charges, e.pre_charges);
  EXPECT_EQ(back[1].post_charges, e.post_charges);
}

TEST(IO, EmptyTrajectoryWritesHeaderOnly) {
  std::stringstream ss;
  io::write_events_jsonl(ss, {}, io::Provenance{});
  EXPECT_TRUE(io::read_events_jsonl(ss).empty());
}
