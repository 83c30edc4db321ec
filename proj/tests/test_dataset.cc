//
// Copyright 2026 The bppfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bppfl/dataset.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <gtest/gtest.h>

namespace bppfl {
namespace {

class TempCsv {
 public:
  explicit TempCsv(const std::string& body) {
    path_ = (std::filesystem::temp_directory_path() /
             ("bppfl_ds_" + std::to_string(counter_++) + "_" +
              std::to_string(::getpid()) + ".csv"))
                .string();
    std::ofstream(path_) << body;
  }
  ~TempCsv() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

TEST(SyntheticTest, EvenSplitAcrossClients) {
  const FederatedData d = MakeSynthetic(SyntheticSpec{}, 5, 3);
  ASSERT_EQ(d.clients.size(), 5u);
  for (const auto& c : d.clients) EXPECT_EQ(c.size(), 400u);
  EXPECT_EQ(d.eval.size(), 1000u);
  EXPECT_EQ(d.num_features, 20);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d.AllTraining().size(), 2000u);
}

TEST(SyntheticTest, UnevenSplitDiffersByAtMostOne) {
  SyntheticSpec spec;
  spec.num_samples = 103;
  const FederatedData d = MakeSynthetic(spec, 10, 3);
  size_t lo = 1000, hi = 0;
  for (const auto& c : d.clients) {
    lo = std::min(lo, c.size());
    hi = std::max(hi, c.size());
  }
  EXPECT_EQ(lo, 10u);
  EXPECT_EQ(hi, 11u);
}

TEST(SyntheticTest, SameSeedSamePartition) {
  const FederatedData a = MakeSynthetic(SyntheticSpec{}, 7, 11);
  const FederatedData b = MakeSynthetic(SyntheticSpec{}, 7, 11);
  const FederatedData c = MakeSynthetic(SyntheticSpec{}, 7, 12);
  bool differs = false;
  for (size_t i = 0; i < a.clients.size(); ++i) {
    ASSERT_EQ(a.clients[i].size(), b.clients[i].size());
    for (size_t s = 0; s < a.clients[i].size(); ++s) {
      EXPECT_EQ(a.clients[i][s].x, b.clients[i][s].x);
      EXPECT_EQ(a.clients[i][s].y_bar, b.clients[i][s].y_bar);
      if (s < c.clients[i].size() && a.clients[i][s].x != c.clients[i][s].x) {
        differs = true;
      }
    }
  }
  EXPECT_TRUE(differs);
}

TEST(SyntheticTest, FeaturesScaledToUnitIntervalAndOneHot) {
  const FederatedData d = MakeSynthetic(SyntheticSpec{}, 4, 5);
  const auto all = d.AllTraining();
  Vector lo = all.front().x, hi = all.front().x;
  for (const Sample& s : all) {
    EXPECT_GE(s.x.minCoeff(), 0.0);
    EXPECT_LE(s.x.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(s.y_bar.sum(), 1.0);
    EXPECT_DOUBLE_EQ(s.y_bar.maxCoeff(), 1.0);
    lo = lo.cwiseMin(s.x);
    hi = hi.cwiseMax(s.x);
  }
  // Training min-max scaling touches both ends of every feature.
  EXPECT_NEAR(lo.maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(hi.minCoeff(), 1.0, 1e-15);
  for (const Sample& s : d.eval) {
    EXPECT_GE(s.x.minCoeff(), 0.0);
    EXPECT_LE(s.x.maxCoeff(), 1.0);
  }
}

TEST(SyntheticTest, InvalidSpecThrows) {
  SyntheticSpec spec;
  spec.num_classes = 1;
  EXPECT_THROW(MakeSynthetic(spec, 2, 1), std::domain_error);
  EXPECT_THROW(MakeSynthetic(SyntheticSpec{}, 0, 1), std::domain_error);
  EXPECT_THROW(MakeSynthetic(SyntheticSpec{}, 5000, 1), std::domain_error);
}

TEST(CsvTest, HeaderAndLabelColumn) {
  TempCsv f("a,label,b\n1,0,5\n3,1,7\n2,1,6\n");
  const RawTable t = ReadCsv(f.path(), 1);
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[1], "label");
  ASSERT_EQ(t.features.size(), 3u);
  EXPECT_EQ(t.features[1], (std::vector<double>{3, 7}));
  EXPECT_EQ(t.labels, (std::vector<int>{0, 1, 1}));
}

TEST(CsvTest, NoHeaderDefaultsToLastColumn) {
  TempCsv f("0.5, 1.5 ,2\r\n\n-1,+2,0\n");
  const RawTable t = ReadCsv(f.path());
  EXPECT_TRUE(t.header.empty());
  EXPECT_EQ(t.labels, (std::vector<int>{2, 0}));
  EXPECT_EQ(t.features[0], (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(t.features[1], (std::vector<double>{-1, 2}));
}

TEST(CsvTest, NonNumericColumnNamed) {
  TempCsv f("x,y,label\n1,2,0\n1,oops,1\n");
  try {
    ReadCsv(f.path());
    FAIL();
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 'y'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("oops"), std::string::npos) << msg;
  }
}

TEST(CsvTest, MalformedInputsThrow) {
  TempCsv ragged("1,2,0\n1,0\n");
  EXPECT_THROW(ReadCsv(ragged.path()), std::runtime_error);
  TempCsv frac("1,2,0.5\n");
  EXPECT_THROW(ReadCsv(frac.path()), std::runtime_error);
  TempCsv empty("h1,h2\n");
  EXPECT_THROW(ReadCsv(empty.path()), std::runtime_error);
  EXPECT_THROW(ReadCsv("/nonexistent/bppfl.csv"), std::runtime_error);
}

TEST(CsvTest, LoadSplitsEvalAndInfersClasses) {
  std::string body = "f1,f2,label\n";
  for (int i = 0; i < 50; ++i) {
    body += std::to_string(i) + "," + std::to_string(100 - i) + "," +
            std::to_string(i % 3) + "\n";
  }
  TempCsv f(body);
  CsvSpec spec;
  spec.path = f.path();
  spec.eval_fraction = 0.2;
  const FederatedData d = LoadCsv(spec, 4, 9);
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_EQ(d.eval.size(), 10u);
  EXPECT_EQ(d.AllTraining().size(), 40u);
  spec.num_classes = 2;
  EXPECT_THROW(LoadCsv(spec, 4, 9), std::domain_error);
}

}  // namespace
}  // namespace bppfl
