// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "support/brute.hpp"
#include "support/random_ssd.hpp"
#include "urbanscene/error.hpp"
#include "urbanscene/eval.hpp"
#include "urbanscene/oracle.hpp"
#include "urbanscene/ssd.hpp"

using namespace urbanscene;

namespace {

StructuredSceneDescription small_scene() {
  const EnuFrame f({114.36, 30.536});
  auto at = [&](double x, double y) {
    const GeoPoint g = f.to_geo(Vec2{x, y});
    return GeoPoint{round_coordinate(g.lon), round_coordinate(g.lat)};
  };
  StructuredSceneDescription ssd;
  ssd.metadata.name = "tiny";
  auto add = [&](std::string id, std::string name, std::string fclass, GeoPoint c, std::string visual) {
    SceneObjectDescription o;
    o.id = id;
    o.identity = IdentityBlock{name, fclass, std::nullopt};
    o.geometric = GeometricBlock{c, 10.0, 100.0, 1000.0, GeoBounds{c, c}};
    o.visual = visual;
    ssd.objects[id] = o;
  };
  add("1", "North Hall", "building", at(0, 200), "A building with a red flat roof.");
  add("2", "South Hall", "building", at(0, -200), "A building with a green flat roof.");
  add("3", "East Hall", "building", at(300, 0), "A grey building next to trees.");
  add("4", "West Hall", "building", at(-300, 0), "A white building beside a lawn.");
  add("5", "Center Hall", "building", at(10, 10), "A blue dome with glass walls.");
  ssd.polylines["90"] = FeatureEntry{"90", "Main Road", std::vector<GeoPoint>{at(-300, 0), at(0, 0), at(300, 0)}};
  ssd.polylines["91"] = FeatureEntry{"91", "Cross Road", std::vector<GeoPoint>{at(0, -200), at(0, 0), at(0, 200)}};
  return ssd;
}

QAItem item(QaCategory c, std::string q, std::array<std::string, 4> options, char answer) {
  QAItem i;
  i.id = "t";
  i.category = c;
  i.question = std::move(q);
  i.options = std::move(options);
  i.answer = answer;
  return i;
}

}  // namespace

TEST_CASE("serialize and parse round trip on random descriptions") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const StructuredSceneDescription ssd = brute::random_ssd(seed);
    const std::string text = serialize(ssd);
    const StructuredSceneDescription back = parse_ssd(text);
    CHECK(back == ssd);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("object ids order numerically") {
  IdLess less;
  CHECK(less("9", "10"));
  CHECK(less("10", "w1"));
  CHECK_FALSE(less("w2", "w10") == less("w10", "w2"));
  CHECK(less("w10", "w2"));
}

TEST_CASE("serialized keys and units") {
  const std::string text = serialize(small_scene());
  CHECK(text.find("\"Height\": \"10 m\"") != std::string::npos);
  CHECK(text.find("\"Area\": \"100 m²\"") != std::string::npos);
  CHECK(text.find("\"Volume\": \"1000 m³\"") != std::string::npos);
  CHECK(text.find("\"Visual information\"") != std::string::npos);
  CHECK(text.find("\"Polyline-type objects\"") != std::string::npos);
}

TEST_CASE("malformed descriptions report where") {
  CHECK_THROWS_AS(parse_ssd("{"), ParseError);
  CHECK_THROWS_AS(parse_ssd("[]"), ParseError);
  std::string text = serialize(small_scene());
  const auto pos = text.find("\"Fclass\"");
  text.replace(pos, 8, "\"Colour\"");
  CHECK_THROWS_AS(parse_ssd(text), ParseError);
  try {
    parse_ssd("{\n  \"Scene\": {\n    \"Name\": 3,\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 3);
  }
}

TEST_CASE("token estimate counts code points") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);
  CHECK(estimate_tokens("m²m³") == 1);
  CHECK(estimate_tokens("北门北门北") == 2);
}

TEST_CASE("assembly routes geometry kinds") {
  SsdInputs in;
  MapObject b;
  b.id = "1";
  b.name = "Hall";
  b.fclass = "building";
  b.geometry = Polygon2D{{{114.36, 30.536}, {114.361, 30.536}, {114.361, 30.537}, {114.36, 30.536}}, {}};
  MapObject stop;
  stop.id = "2";
  stop.fclass = "bus_stop";
  stop.geometry = GeoPoint{114.3601234, 30.5361234};
  MapObject cafe;
  cafe.id = "3";
  cafe.name = "Cafe";
  cafe.fclass = "cafe";
  cafe.geometry = GeoPoint{114.3602, 30.5362};
  MapObject road;
  road.id = "4";
  road.name = "Road";
  road.fclass = "residential";
  road.geometry = Polyline{{114.36, 30.535}, {114.362, 30.535}};
  in.objects = {b, stop, cafe, road};
  GeometricInfo g;
  g.center = {114.3605, 30.5363};
  g.height = 27.6;
  g.area = 1200.4;
  g.volume = 27.6 * 1200.4;
  in.geometry["1"] = g;
  GeometricInfo pg;
  pg.center = {114.3602, 30.5362};
  in.geometry["3"] = pg;
  const StructuredSceneDescription ssd = assemble_ssd(in);
  REQUIRE(ssd.objects.size() == 2);
  CHECK(ssd.objects.at("1").geometric->height == 28.0);
  CHECK(ssd.objects.at("1").geometric->area == 1200.0);
  CHECK(ssd.objects.at("1").geometric->volume == 33131.0);
  CHECK_FALSE(ssd.objects.at("3").geometric->height.has_value());
  CHECK(ssd.points.at("2").name == "bus_stop");
  CHECK(ssd.points.at("2").coordinates->front().lon == 114.36012);
  CHECK(ssd.polylines.at("4").coordinates->size() == 2);
  in.objects.push_back(b);
  CHECK_THROWS_AS(assemble_ssd(in), Error);
}

TEST_CASE("ablation removes blocks and commutes") {
  const StructuredSceneDescription base = brute::random_ssd(5);
  AblationMask id{true, false, false, false}, geo{false, true, false, false}, vis{false, false, true, false},
      rel{false, false, false, true};
  const auto a = apply_ablation(apply_ablation(base, id), vis);
  const auto b = apply_ablation(apply_ablation(base, vis), id);
  CHECK(a == b);
  for (const auto& [k, o] : apply_ablation(base, rel).objects) {
    CHECK_FALSE(o.spatial.has_value());
    CHECK_FALSE(o.topology.has_value());
  }
  const std::string text = serialize(apply_ablation(base, vis));
  CHECK(text.find("Visual information") == std::string::npos);
  CHECK(AblationMask{}.any() == false);
  CHECK(geo.any());
}

TEST_CASE("answer parsing") {
  const ParsedAnswer c = parse_answer("C#Based on the data, ...., making option C the correct answer");
  CHECK(c.option == 'C');
  CHECK(c.reasoning == "Based on the data, ...., making option C the correct answer");
  CHECK(parse_answer("F#None of the options fit.").option == 'F');
  CHECK(parse_answer("  b#lower case").option == 'B');
  CHECK(parse_answer("E#no such option").malformed());
  CHECK(parse_answer("The answer is C").malformed());
  CHECK(parse_answer("").malformed());
  CHECK(parse_answer("AB#x").malformed());
}

TEST_CASE("prompt layout") {
  const QAItem q = item(QaCategory::Directional, "If I am at A (ID 1), in which direction should I walk to reach B (ID 2)?",
                        {"North", "South", "East", "West"}, 'B');
  const auto msgs = build_prompt("{\"x\": 1}\n", q);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].role == "system");
  CHECK(msgs[0].text_content() == kQaSystemPrompt);
  const std::string user = msgs[1].text_content();
  CHECK(user.rfind(std::string(kSceneHeader) + "{\"x\": 1}", 0) == 0);
  CHECK(user.find("\nA. North\nB. South\nC. East\nD. West") != std::string::npos);
  CHECK(prompt_tokens(msgs) > estimate_tokens(kQaSystemPrompt));
}

TEST_CASE("oracle answers hand-built questions") {
  const StructuredSceneDescription ssd = small_scene();
  const auto& o = ssd.objects;
  const double d = haversine_distance(o.at("1").geometric->center, o.at("2").geometric->center);
  const std::string truth = std::to_string(static_cast<int>(std::lround(d))) + " m";
  CHECK(answer(ssd, item(QaCategory::Distance, "Calculate the straight-line distance from North Hall (ID 1) to South Hall (ID 2).",
                         {"10 m", truth, "900 m", "2 km"}, 'B'))
            .option == 'B');
  CHECK(answer(ssd, item(QaCategory::Directional,
                         "If I am at North Hall (ID 1), in which direction should I walk to reach South Hall (ID 2)?",
                         {"North", "East", "West", "South"}, 'D'))
            .option == 'D');
  CHECK(answer(ssd, item(QaCategory::Directional,
                         "If I am at North Hall (ID 1), in which direction should I walk to reach South Hall (ID 2)?",
                         {"North", "East", "West", "Northeast"}, 'A'))
            .option == 'F');
  const GeoPoint near_east = o.at("3").geometric->center;
  const std::string poi = "Which building is closest to the coordinates (" + std::to_string(near_east.lon).substr(0, 9) +
                          ", " + std::to_string(near_east.lat).substr(0, 8) + ")?";
  CHECK(answer(ssd, item(QaCategory::Poi, poi, {"North Hall (ID 1)", "West Hall (ID 4)", "East Hall (ID 3)", "South Hall (ID 2)"},
                         'C'))
            .option == 'C');
  CHECK(answer(ssd, item(QaCategory::Path, "Which route along the roads is the shortest from West Hall (ID 4) to North Hall (ID 1)?",
                         {"Cross Road", "Main Road -> Cross Road", "Cross Road -> Main Road", "Main Road"}, 'B'))
            .option == 'B');
  CHECK(answer(ssd, item(QaCategory::Grounding, "Which object matches this description: \"A building with a red flat roof.\"?",
                         {"South Hall (ID 2)", "North Hall (ID 1)", "East Hall (ID 3)", "Center Hall (ID 5)"}, 'B'))
            .option == 'B');
  CHECK(answer(ssd, item(QaCategory::Distance, "Calculate the straight-line distance from here to there.",
                         {"1 m", "2 m", "3 m", "4 m"}, 'A'))
            .option == 'F');
}

TEST_CASE("qa files round trip and validate") {
  std::vector<QAItem> items{item(QaCategory::Poi, "q?", {"a", "b", "c", "d"}, 'D')};
  items[0].provenance = Provenance::Human;
  CHECK(parse_qa(write_qa(items)) == items);
  QAItem dup = items[0];
  dup.options[1] = "a";
  CHECK_THROWS_AS(validate(dup), Error);
  QAItem bad = items[0];
  bad.answer = 'E';
  CHECK_THROWS_AS(validate(bad), Error);
  CHECK_THROWS_AS(parse_qa("{\"items\": [{\"id\": 1}]}"), Error);
}

TEST_CASE("generation is deterministic and closes the loop") {
  const StructuredSceneDescription ssd = small_scene();
  const QaGeneration a = generate_qa(ssd, 5, 99);
  const QaGeneration b = generate_qa(ssd, 5, 99);
  CHECK(write_qa(a.items) == write_qa(b.items));
  const RoadGraph roads = build_road_graph(ssd);
  for (const QAItem& q : a.items) {
    CHECK(answer(ssd, q).option == q.answer);
    CHECK(brute::answer(ssd, roads, q) == q.answer);
  }
  StructuredSceneDescription sparse;
  CHECK(generate_qa(sparse, 5, 1).items.empty());
  CHECK(generate_qa(sparse, 5, 1).warnings.size() == 1);
}

TEST_CASE("evaluation scoring") {
  const StructuredSceneDescription ssd = small_scene();
  const QaGeneration gen = generate_qa(ssd, 6, 3);
  REQUIRE_FALSE(gen.items.empty());
  const EvalReport oracle = run_eval(gen.items, ssd, make_oracle_respondent("oracle"));
  CHECK(oracle.macro == 1.0);
  CHECK(oracle.micro == 1.0);
  CHECK(oracle.complete());

  const EvalReport always_a = run_eval(gen.items, ssd, make_constant_respondent("a", "A#because"));
  std::size_t keyed_a = 0;
  for (const auto& q : gen.items) keyed_a += q.answer == 'A';
  CHECK(always_a.correct == keyed_a);

  const EvalReport junk = run_eval(gen.items, ssd, make_constant_respondent("j", "I think A"));
  CHECK(junk.correct == 0);
  CHECK(junk.malformed == gen.items.size());

  Respondent tight = make_constant_respondent("t", "A#x");
  tight.context_limit = 10;
  CHECK_THROWS_AS(run_eval(gen.items, ssd, tight), Error);

  const std::string csv = report_csv(always_a);
  CHECK(csv.find("Distance") != std::string::npos);
  CHECK(report_json(always_a).find("\"respondent\"") != std::string::npos);
}
