#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "tierprice/error.hpp"
#include "tierprice/ingestion.hpp"

using namespace tierprice;

namespace {

FlowReadResult parse(const std::string& text) {
  std::istringstream in(text);
  return read_flows_csv(in);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

void check_within(double got, double want, double rel) {
  CHECK(std::abs(got - want) <= rel * want);
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("duplicate flow ids are summed") {
  auto r = parse("flow_id,demand_mbps,distance_miles\na,3,10\nb,1,5\na,4,99\n");
  REQUIRE(r.flows.size() == 2);
  CHECK(r.flows[0].flow_id == "a");
  CHECK(r.flows[0].demand_mbps == 7.0);
  CHECK(r.flows[0].distance_miles == 10.0);
  CHECK(r.merged_duplicates == 1);
}

TEST_CASE("zero-demand rows are dropped and counted") {
  auto r = parse("flow_id,demand_mbps,distance_miles\na,0,10\nb,2,5\n");
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].flow_id == "b");
  CHECK(r.dropped_zero == 1);
}

TEST_CASE("explicit labels are kept") {
  auto r = parse("distance_miles,flow_id,region,demand_mbps,dest_type\n"
                 "500,x,metro,2,\n"
                 "3,\"y,z\",,1.5,peer\n");
  REQUIRE(r.flows.size() == 2);
  CHECK(r.flows[0].region == Region::Metro);
  CHECK(r.flows[0].distance_miles == 500.0);
  CHECK_FALSE(r.flows[0].dest_type.has_value());
  CHECK(r.flows[1].flow_id == "y,z");
  CHECK_FALSE(r.flows[1].region.has_value());
  CHECK(r.flows[1].dest_type == DestType::Peer);
}

TEST_CASE("malformed input") {
  CHECK(parse_error("flow_id,demand_mbps\na,1\n") == ErrorCode::MissingColumn);
  CHECK(parse_error("") == ErrorCode::MissingColumn);
  CHECK(parse_error("flow_id,demand_mbps,distance_miles\na,abc,1\n") == ErrorCode::ParseError);
  CHECK(parse_error("flow_id,demand_mbps,distance_miles\na,1\n") == ErrorCode::ParseError);
  CHECK(parse_error("flow_id,demand_mbps,distance_miles\na,-1,1\n") == ErrorCode::ParseError);
  CHECK(parse_error("flow_id,demand_mbps,distance_miles,region\na,1,1,mars\n") ==
        ErrorCode::ParseError);
  CHECK(parse_error("flow_id,demand_mbps,distance_miles\n\"a,1,1\n") == ErrorCode::ParseError);
  std::string message;
  try {
    parse("flow_id,demand_mbps,distance_miles\na,1,1\nb,x,1\n");
  } catch (const Error& e) {
    message = e.what();
  }
  CHECK(message.find("line 3") != std::string::npos);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(read_flows_csv(std::filesystem::path("/nonexistent/flows.csv")), Error);
}

TEST_CASE("flow CSV round-trips bit-identically") {
  auto flows = fixture::random_flows(200, 77, true);
  flows[3].dest_type = DestType::Customer;
  std::stringstream ss;
  write_flows_csv(ss, flows);
  auto back = read_flows_csv(ss).flows;
  REQUIRE(back.size() == flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    CHECK(back[i].flow_id == flows[i].flow_id);
    CHECK(back[i].demand_mbps == flows[i].demand_mbps);
    CHECK(back[i].distance_miles == flows[i].distance_miles);
    CHECK(back[i].region == flows[i].region);
    CHECK(back[i].dest_type == flows[i].dest_type);
  }
}

TEST_CASE("format_double is shortest round-trip text") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(20.0) == "20");
  for (double x : {1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 123456.789}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("synthetic data matches dataset moments") {
  for (const char* name : {"eu-isp", "cdn", "internet2"}) {
    auto target = *synth_preset(name, 10000, 1);
    auto flows = synth_generate(target);
    REQUIRE(flows.size() == 10000);
    auto got = measure_moments(flows);
    check_within(got.weighted_avg_distance_miles, target.weighted_avg_distance_miles, 0.05);
    check_within(got.cv_distance, target.cv_distance, 0.05);
    check_within(got.aggregate_gbps, target.aggregate_gbps, 0.05);
    check_within(got.cv_demand, target.cv_demand, 0.05);
    for (const auto& f : flows) {
      CHECK(f.demand_mbps > 0.0);
      CHECK(f.distance_miles > 0.0);
    }
  }
  CHECK_FALSE(synth_preset("campus", 10, 1).has_value());
}

TEST_CASE("property: moments hold across seeds and sizes") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DatasetMoments target{5000 + seed * 500, 10.0 * seed, 0.2 + 0.1 * seed, 1.0 + seed,
                          0.5 + 0.4 * seed, seed};
    auto got = measure_moments(synth_generate(target));
    check_within(got.weighted_avg_distance_miles, target.weighted_avg_distance_miles, 0.05);
    check_within(got.cv_distance, target.cv_distance, 0.05);
    check_within(got.aggregate_gbps, target.aggregate_gbps, 0.05);
    check_within(got.cv_demand, target.cv_demand, 0.05);
  }
}

TEST_CASE("zero CV gives uniform flows") {
  DatasetMoments target{100, 54.0, 0.0, 37.0, 0.0, 3};
  for (const auto& f : synth_generate(target)) {
    CHECK(f.demand_mbps == doctest::Approx(370.0));
    CHECK(f.distance_miles == doctest::Approx(54.0));
  }
}

TEST_CASE("generation is deterministic per seed") {
  auto m = *synth_preset("eu-isp", 3000, 42);
  std::stringstream a, b, c;
  write_flows_csv(a, synth_generate(m));
  write_flows_csv(b, synth_generate(m));
  m.seed = 43;
  write_flows_csv(c, synth_generate(m));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("invalid moments are rejected") {
  DatasetMoments bad{100, -1.0, 0.5, 1.0, 1.0, 1};
  CHECK_THROWS_AS(synth_generate(bad), Error);
}

}  // TEST_SUITE
