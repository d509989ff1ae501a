#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "fairaudit/core_data.hpp"
#include "fairaudit/errors.hpp"
#include "helpers.hpp"

using namespace fairaudit;

TEST_CASE("csv reader handles quotes, doubled quotes and CRLF") {
  auto t = parse_csv("a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\r\n2,,z\r\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[0][2] == "say \"hi\"");
  CHECK(t.rows[1][1].empty());
  CHECK(t.column_index("c") == 2u);
  CHECK_FALSE(t.column_index("d").has_value());
}

TEST_CASE("csv reader rejects ragged rows with the row number") {
  try {
    parse_csv("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("csv_escape round-trips through the reader") {
  for (std::string s : {"plain", "with,comma", "with \"quote\"", "multi\nline"}) {
    auto t = parse_csv("h\n" + csv_escape(s) + "\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == s);
  }
}

namespace {
const char* kSchema = R"(# toy
sensitive = sex
target = income
target_positive = >50K
target_negative = <=50K
categorical = job
continuous = age
ignore = id
)";

const char* kCsv =
    "id,age,job,sex,income\n"
    "1,30,a,F,>50K\n"
    "2,40,b,M,<=50K\n"
    "3,50,a,M,>50K\n"
    "4,60,c,F,<=50K\n";
}  // namespace

TEST_CASE("schema-driven ingestion") {
  auto ds = dataset_from_table(parse_csv(kCsv), Schema::parse(kSchema));
  CHECK(ds.rows() == 4);
  CHECK(ds.feature_names() == std::vector<std::string>{"age", "job"});
  CHECK(ds.sensitive().labels() == std::vector<std::string>{"F", "M"});
  CHECK(ds.sensitive().codes() == std::vector<int>{0, 1, 1, 0});
  CHECK(*ds.target() == std::vector<int>{1, 0, 1, 0});
  const auto& job = ds.feature("job");
  CHECK(job.is_categorical());
  CHECK(job.levels == std::vector<std::string>{"a", "b", "c"});
  CHECK(job.decode() == std::vector<std::string>{"a", "b", "a", "c"});
  CHECK(ds.feature("age").values == std::vector<double>{30, 40, 50, 60});
  CHECK(ds.find_feature("id") == nullptr);
}

TEST_CASE("ingestion errors") {
  Schema schema = Schema::parse(kSchema);
  SUBCASE("unseen target value") {
    CHECK_THROWS_AS(dataset_from_table(parse_csv("id,age,job,sex,income\n1,1,a,F,maybe\n2,2,a,M,>50K\n"),
                                       schema),
                    DomainError);
  }
  SUBCASE("missing cell reports its row") {
    try {
      dataset_from_table(parse_csv("id,age,job,sex,income\n1,1,a,F,>50K\n2,?,a,M,>50K\n"), schema);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
    }
  }
  SUBCASE("non-numeric continuous cell") {
    CHECK_THROWS_AS(
        dataset_from_table(parse_csv("id,age,job,sex,income\n1,old,a,F,>50K\n2,2,a,M,>50K\n"), schema),
        ParseError);
  }
  SUBCASE("missing sensitive column") {
    CHECK_THROWS_AS(dataset_from_table(parse_csv("id,age,job,income\n1,1,a,>50K\n"), schema),
                    SchemaError);
  }
  SUBCASE("unknown schema key") { CHECK_THROWS_AS(Schema::parse("sensitive = a\nbogus = 1\n"), SchemaError); }
}

TEST_CASE("0/1 target without label lists") {
  auto ds = dataset_from_table(parse_csv("x,a,y\n0.5,p,1\n1.5,q,0\n"),
                               Schema::parse("sensitive = a\ntarget = y\n"));
  CHECK(*ds.target() == std::vector<int>{1, 0});
  CHECK_FALSE(ds.feature("x").is_categorical());
}

TEST_CASE("dataset_to_csv round-trips") {
  Schema schema = Schema::parse(kSchema);
  auto ds = dataset_from_table(parse_csv(kCsv), schema);
  // The writer emits the target as 0/1 and drops ignored columns.
  schema.ignored.clear();
  schema.target_positive.clear();
  schema.target_negative.clear();
  auto again = dataset_from_table(parse_csv(dataset_to_csv(ds)), schema);
  CHECK(again.feature("age").values == ds.feature("age").values);
  CHECK(again.feature("job").decode() == ds.feature("job").decode());
  CHECK(again.sensitive().codes() == ds.sensitive().codes());
  CHECK(*again.target() == *ds.target());
}

TEST_CASE("predictions are validated") {
  PredictionSet p;
  CHECK_THROWS_AS(p.validate(3), DataError);
  p.decisions = std::vector<int>{0, 1, 2};
  CHECK_THROWS_AS(p.validate(3), DataError);
  p.decisions = std::vector<int>{0, 1, 1};
  CHECK_NOTHROW(p.validate(3));
  p.scores = std::vector<double>{0.1, 1.2, 0.3};
  CHECK_THROWS_AS(p.validate(3), DataError);
  p.scores = std::vector<double>{0.1, 0.2};
  CHECK_THROWS_AS(p.validate(3), DataError);
}

TEST_CASE("intersectional attribute codes occupied cells") {
  SensitiveAttribute sex("sex", {0, 1, 0, 1, 0}, {"F", "M"});
  SensitiveAttribute race("race", {0, 0, 1, 0, 0}, {"x", "y"});
  std::vector<SensitiveAttribute> both{sex, race};
  auto inter = intersect_sensitive(both);
  CHECK(inter.labels() == std::vector<std::string>{"F|x", "M|x", "F|y"});
  CHECK(inter.codes() == std::vector<int>{0, 1, 2, 1, 0});
}

TEST_CASE("split is a seeded partition") {
  fairaudit::Rng rng(3);
  auto c = testing::random_case(rng, 101, 2);
  auto s1 = split(c.ds, c.preds, 0.7, 42);
  auto s2 = split(c.ds, c.preds, 0.7, 42);
  auto s3 = split(c.ds, c.preds, 0.7, 43);
  CHECK(s1.train.rows() == split_train_size(101, 0.7));
  CHECK(s1.train.rows() == 71);
  CHECK(s1.train.rows() + s1.test.rows() == 101);
  CHECK(s1.train_rows == s2.train_rows);
  CHECK(s1.train_rows != s3.train_rows);
  std::vector<std::size_t> all = s1.train_rows;
  all.insert(all.end(), s1.test_rows.begin(), s1.test_rows.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(101);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  REQUIRE(s1.test_predictions);
  for (std::size_t i = 0; i < s1.test_rows.size(); ++i)
    CHECK((*s1.test_predictions->decisions)[i] == (*c.preds.decisions)[s1.test_rows[i]]);
  CHECK(split_train_size(10, 0.99) == 9);
  CHECK(split_train_size(10, 0.01) == 1);
  CHECK_THROWS_AS(split_train_size(1, 0.7), PreconditionError);
  CHECK_THROWS_AS(split_train_size(10, 1.0), PreconditionError);
}

TEST_CASE("quantile bins and strata") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 0.0);
  auto binned = quantile_bins(FeatureColumn::continuous("x", v), 4);
  CHECK(binned.is_categorical());
  CHECK(binned.level_count() == 4);
  std::vector<int> counts(4);
  for (std::size_t i = 0; i < v.size(); ++i) ++counts[binned.code(i)];
  CHECK(counts == std::vector<int>{25, 25, 25, 25});

  auto constant = quantile_bins(FeatureColumn::continuous("c", std::vector<double>(10, 1.0)), 4);
  CHECK(constant.level_count() == 1);

  auto ds = testing::make_dataset({v}, std::vector<int>(100, 0), std::vector<int>(100, 1));
  ds = ds.with_sensitive(testing::binary_groups([] {
    std::vector<int> a(100);
    for (int i = 0; i < 100; ++i) a[i] = i % 2;
    return a;
  }()));
  CHECK_THROWS_AS(strata_for(ds, "x0"), PreconditionError);
  auto st = strata_for(ds.with_feature(binned), "x");
  CHECK(st.labels.size() == 4);
  auto by_target = strata_for(ds, "Y");
  CHECK(by_target.codes == std::vector<int>(100, 1));
}
