#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "alert/io.hpp"
#include "alert/presets.hpp"
#include "fixtures.hpp"

namespace alert {
namespace {

using nlohmann::json;

std::string error_of(const json& doc) {
  try {
    profile_from_json(doc, "p.json");
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

TEST(ProfileJson, RoundTrip) {
  const auto s = testing::small_space();
  const auto back = profile_from_json(to_json(s), "mem");
  ASSERT_EQ(back.dnns.size(), s.dnns.size());
  EXPECT_EQ(back.dnns[2].kind, DnnKind::Anytime);
  EXPECT_EQ(back.dnns[2].stages[1].t_prof, s.dnns[2].stages[1].t_prof);
  EXPECT_DOUBLE_EQ(back.dnns[0].q_fail, 0.01);
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(ProfileJson, QFailDefaultsToRandomGuess) {
  auto doc = to_json(testing::small_space());
  doc["dnns"][0].erase("q_fail");
  doc["dnns"][0]["num_classes"] = 4;
  EXPECT_DOUBLE_EQ(profile_from_json(doc, "p").dnns[0].q_fail, 0.25);
  doc["dnns"][0].erase("num_classes");
  EXPECT_NE(error_of(doc).find("dnns[0].q_fail: required"), std::string::npos);
}

TEST(ProfileJson, ErrorsNameFileAndField) {
  auto doc = to_json(testing::small_space());
  doc["dnns"][1]["stages"][0]["accuracy"] = "high";
  EXPECT_EQ(error_of(doc), "p.json.dnns[1].stages[0].accuracy: expected a number");

  doc = to_json(testing::small_space());
  doc["extra"] = 1;
  EXPECT_EQ(error_of(doc), "p.json.extra: unknown field");

  doc = to_json(testing::small_space());
  doc["dnns"][2]["kind"] = "sometimes";
  EXPECT_NE(error_of(doc).find("dnns[2].kind"), std::string::npos);

  doc = to_json(testing::small_space());
  doc["dnns"][2]["stages"][2]["accuracy"] = 0.5;
  EXPECT_NE(error_of(doc).find("accuracies not increasing"), std::string::npos);
}

TEST(ProfileJson, MissingFileIsAnInputError) {
  EXPECT_THROW(load_profile("/nonexistent/profile.json"), InputError);
}

TEST(TraceJson, RoundTripEveryDistribution) {
  Trace t;
  t.seed = 12;
  t.group_size = 5;
  t.phases = {{10, ConstantDist{1.0}, 5.0, 0.0},
              {20, GaussianDist{1.4, 0.1}, 7.0, 0.03},
              {30, LogNormalDist{0.5, 0.2}, 9.0, 0.0},
              {40, UniformDist{0.9, 1.1}, 4.0, 0.0}};
  const auto back = trace_from_json(to_json(t), "t");
  EXPECT_EQ(to_json(back), to_json(t));
  EXPECT_EQ(back.total_length(), 100u);
  EXPECT_EQ(*back.group_size, 5u);
}

TEST(TraceJson, RejectsBadDistribution) {
  auto doc = to_json(presets::trace("steady", 1));
  doc["phases"][0]["dist"] = {{"kind", "gaussian"}, {"mean", 1.0}};
  try {
    trace_from_json(doc, "t.json");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "t.json.phases[0].dist.sd: missing field");
  }
  doc["phases"][0]["dist"] = {{"kind", "gaussian"}, {"mean", -1.0}, {"sd", 0.1}};
  EXPECT_THROW(trace_from_json(doc, "t.json"), InputError);
}

TEST(StepCsv, HeaderAndRowShape) {
  StepRecord r;
  r.input_index = 3;
  r.decision.dnn_index = 2;
  r.decision.target_stage = 3;
  r.cap_watts = 20;
  r.completed_stage = 2;
  r.observed_latency = 0.2;
  r.deadline_met = true;
  r.delivered_accuracy = 0.75;
  r.energy = 4.5;
  r.violations.accuracy = true;
  r.xi = 1.5;
  std::ostringstream out;
  const std::vector<StepRecord> rows{r};
  write_step_csv(out, testing::small_space(), rows);
  EXPECT_EQ(out.str(), std::string(kStepCsvHeader) + "\n3,any,20,2,0.2,1,0.75,4.5,0,1,0,3,1.5\n");
}

TEST(StepCsv, XiColumnReadsBack) {
  const auto path = std::filesystem::temp_directory_path() / "alert_xi_test.csv";
  {
    std::ofstream f(path);
    f << "a,xi\n1,0.5\n2,1.25\n";
  }
  EXPECT_EQ(read_xi_column(path.string()), (std::vector<double>{0.5, 1.25}));
  {
    std::ofstream f(path);
    f << "a,b\n1,2\n";
  }
  EXPECT_THROW(read_xi_column(path.string()), InputError);
  std::filesystem::remove(path);
}

TEST(FormatNumber, StableShortestForm) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
  EXPECT_EQ(format_number(20.0), "20");
}

}  // namespace
}  // namespace alert
