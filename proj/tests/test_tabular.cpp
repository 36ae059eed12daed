#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairdec/tabular.hpp"

using namespace fairdec;

namespace {

Schema basic_schema() {
    Schema s;
    s.fields = {{"age", Role::Feature, Kind::Numeric},
                {"sex", Role::Sensitive, Kind::Categorical},
                {"y", Role::Outcome, Kind::Numeric}};
    return s;
}

}  // namespace

TEST_CASE("csv ingestion") {
    SUBCASE("header-only file gives zero rows") {
        std::istringstream in("age,sex,y\n");
        const Dataset ds = read_csv(in, basic_schema());
        CHECK(ds.rows == 0);
        CHECK(ds.columns.size() == 3);
    }
    SUBCASE("typed rows parse as declared") {
        std::istringstream in("age,sex,y\n41,Male,0\n29.5,Female,1\n33,Male,0\n");
        const Dataset ds = read_csv(in, basic_schema());
        CHECK(ds.rows == 3);
        CHECK(ds.col("age").num == std::vector<double>{41.0, 29.5, 33.0});
        CHECK(ds.col("sex").cat == std::vector<std::string>{"Male", "Female", "Male"});
        CHECK(ds.col("y").kind == Kind::Numeric);
    }
    SUBCASE("declared column absent") {
        std::istringstream in("age,y\n41,0\n");
        CHECK_THROWS_WITH_AS(read_csv(in, basic_schema()),
                             doctest::Contains("sex"), SchemaError);
    }
    SUBCASE("ragged row is rejected with its number") {
        std::istringstream in("age,sex,y\n41,Male,0\n29.5,Female\n");
        CHECK_THROWS_AS(read_csv(in, basic_schema()), FormatError);
    }
    SUBCASE("missing markers and unparseable numerics") {
        std::istringstream in("age,sex,y\nNA,Male,0\n,Female,1\nbogus,NA,0\n");
        const Dataset ds = read_csv(in, basic_schema());
        CHECK(std::isnan(ds.col("age").num[0]));
        CHECK(std::isnan(ds.col("age").num[1]));
        CHECK(std::isnan(ds.col("age").num[2]));
        CHECK(ds.col("sex").cat[2] == "");
    }
    SUBCASE("columns not in the schema are ignored") {
        std::istringstream in("extra,age,sex,y\nzzz,41,Male,0\n");
        const Dataset ds = read_csv(in, basic_schema());
        CHECK(ds.rows == 1);
        CHECK(!ds.has("extra"));
    }
}

TEST_CASE("csv round trip preserves typed values") {
    std::istringstream clean("age,sex,y\n41.25,Male,0\n-1e-07,\"with, comma\",1\n");
    const Dataset ds = read_csv(clean, basic_schema());
    std::ostringstream out;
    write_csv(ds, out);
    std::istringstream back_in(out.str());
    const Dataset back = read_csv(back_in, basic_schema());
    CHECK(back.col("age").num == ds.col("age").num);
    CHECK(back.col("sex").cat == ds.col("sex").cat);
    CHECK(back.col("y").num == ds.col("y").num);
}

TEST_CASE("imputation") {
    Dataset ds;
    ds.rows = 3;
    ds.columns.push_back({"x", Role::Feature, Kind::Numeric,
                          {1.0, std::nan(""), 3.0}, {}});
    ds.columns.push_back({"c", Role::Feature, Kind::Categorical, {}, {"a", "", "b"}});
    const Dataset done = impute(ds);
    CHECK(done.col("x").num == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(done.col("c").cat == std::vector<std::string>{"a", "Missing", "b"});

    SUBCASE("non-missing cells never change") {
        CHECK(done.col("x").num[0] == 1.0);
        CHECK(done.col("c").cat[2] == "b");
    }
    SUBCASE("even count takes the middle average") {
        Dataset d2;
        d2.rows = 4;
        d2.columns.push_back({"x", Role::Feature, Kind::Numeric,
                              {4.0, 1.0, std::nan(""), 2.0}, {}});
        CHECK(impute(d2).col("x").num[2] == doctest::Approx(2.0));
    }
    SUBCASE("all-missing numeric column cannot be imputed") {
        Dataset d3;
        d3.rows = 2;
        d3.columns.push_back({"x", Role::Feature, Kind::Numeric,
                              {std::nan(""), std::nan("")}, {}});
        CHECK_THROWS_AS(impute(d3), CannotImpute);
    }
}

TEST_CASE("one-hot encoding") {
    Dataset ds;
    ds.rows = 5;
    ds.columns.push_back({"Sex", Role::Sensitive, Kind::Categorical, {},
                          {"Male", "Male", "Female", "Male", "Female"}});
    ds.columns.push_back({"x", Role::Feature, Kind::Numeric,
                          {0.0, 1.0, 1.0, 0.0, 1.0}, {}});
    auto [encoded, map] = one_hot(ds);

    SUBCASE("majority level becomes the reference") {
        REQUIRE(map.entries.size() == 1);
        CHECK(map.entries[0].reference == "Male");
        CHECK(encoded.has("Sex_Female"));
        CHECK(!encoded.has("Sex_Male"));
        CHECK(encoded.col("Sex_Female").role == Role::Sensitive);
        CHECK(encoded.col("Sex_Female").num ==
              std::vector<double>{0.0, 0.0, 1.0, 0.0, 1.0});
    }
    SUBCASE("numeric columns pass through unchanged") {
        CHECK(encoded.col("x").num == ds.col("x").num);
    }
    SUBCASE("dummies decode back to the source column") {
        for (std::size_t r = 0; r < ds.rows; ++r) {
            std::string decoded = map.entries[0].reference;
            for (const auto& level : map.entries[0].dummy_levels) {
                if (encoded.col("Sex_" + level).num[r] == 1.0) decoded = level;
            }
            CHECK(decoded == ds.col("Sex").cat[r]);
        }
    }
    SUBCASE("constant categorical yields no dummy but a warning") {
        Dataset d2;
        d2.rows = 2;
        d2.columns.push_back({"k", Role::Feature, Kind::Categorical, {}, {"a", "a"}});
        auto [enc2, map2] = one_hot(d2);
        CHECK(enc2.columns.empty());
        REQUIRE(map2.warnings.size() == 1);
    }
    SUBCASE("reference ties break lexicographically") {
        Dataset d3;
        d3.rows = 4;
        d3.columns.push_back({"k", Role::Feature, Kind::Categorical, {},
                              {"b", "a", "b", "a"}});
        auto [enc3, map3] = one_hot(d3);
        CHECK(map3.entries[0].reference == "a");
        CHECK(enc3.has("k_b"));
    }
}

TEST_CASE("standardization") {
    Dataset ds;
    ds.rows = 3;
    ds.columns.push_back({"x", Role::Feature, Kind::Numeric, {1.0, 2.0, 3.0}, {}});
    const std::vector<std::size_t> all{0, 1, 2};

    SUBCASE("hand-computed with the n-1 convention") {
        auto [out, stats] = standardize(ds, all);
        // sd of (1,2,3) with the unbiased convention is exactly 1.
        CHECK(out.col("x").num[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(out.col("x").num[1] == doctest::Approx(0.0));
        CHECK(out.col("x").num[2] == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(stats.size() == 1);
        CHECK(stats[0].mean == doctest::Approx(2.0));
        CHECK(stats[0].sd == doctest::Approx(1.0));
    }
    SUBCASE("idempotence") {
        auto [once, s1] = standardize(ds, all);
        auto [twice, s2] = standardize(once, all);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(twice.col("x").num[i] == doctest::Approx(once.col("x").num[i]).epsilon(1e-12));
        }
    }
    SUBCASE("fit rows drive the map for held-out rows") {
        Dataset d4;
        d4.rows = 4;
        d4.columns.push_back({"x", Role::Feature, Kind::Numeric,
                              {1.0, 2.0, 3.0, 10.0}, {}});
        auto [out, stats] = standardize(d4, {0, 1, 2});
        CHECK(out.col("x").num[3] == doctest::Approx((10.0 - 2.0) / 1.0));
    }
    SUBCASE("constant column is degenerate") {
        Dataset d5;
        d5.rows = 3;
        d5.columns.push_back({"x", Role::Feature, Kind::Numeric, {5.0, 5.0, 5.0}, {}});
        CHECK_THROWS_AS(standardize(d5, all), DegenerateVariance);
    }
    SUBCASE("non-feature columns are left alone") {
        Dataset d6;
        d6.rows = 3;
        d6.columns.push_back({"y", Role::Outcome, Kind::Numeric, {0.0, 1.0, 0.0}, {}});
        d6.columns.push_back({"x", Role::Feature, Kind::Numeric, {1.0, 2.0, 3.0}, {}});
        auto [out, stats] = standardize(d6, all);
        CHECK(out.col("y").num == std::vector<double>{0.0, 1.0, 0.0});
        CHECK(stats.size() == 1);
    }
}

TEST_CASE("train/test split") {
    SUBCASE("sizes follow the floor rule") {
        auto [tr, te] = split_indices(10, 0.8, RandomStream{3, 0});
        CHECK(tr.size() == 8);
        CHECK(te.size() == 2);
    }
    SUBCASE("deterministic given the stream") {
        auto [a_tr, a_te] = split_indices(100, 0.8, RandomStream{3, 1});
        auto [b_tr, b_te] = split_indices(100, 0.8, RandomStream{3, 1});
        CHECK(a_tr == b_tr);
        CHECK(a_te == b_te);
    }
    SUBCASE("disjoint and exhaustive") {
        auto [tr, te] = split_indices(57, 0.3, RandomStream{4, 2});
        std::vector<bool> seen(57, false);
        for (std::size_t i : tr) seen[i] = !seen[i];
        for (std::size_t i : te) seen[i] = !seen[i];
        for (bool b : seen) CHECK(b);
    }
    SUBCASE("single row goes to train") {
        auto [tr, te] = split_indices(1, 0.8, RandomStream{5, 0});
        CHECK(tr.size() == 1);
        CHECK(te.empty());
    }
    SUBCASE("dataset split mirrors the index split") {
        Dataset ds;
        ds.rows = 10;
        Column c{"x", Role::Feature, Kind::Numeric, {}, {}};
        for (int i = 0; i < 10; ++i) c.num.push_back(i);
        ds.columns.push_back(c);
        auto [tr, te] = split(ds, 0.8, RandomStream{6, 0});
        CHECK(tr.rows == 8);
        CHECK(te.rows == 2);
    }
    SUBCASE("invalid fraction") {
        CHECK_THROWS_AS(split_indices(10, 0.0, RandomStream{1, 1}), ConfigError);
        CHECK_THROWS_AS(split_indices(10, 1.0, RandomStream{1, 1}), ConfigError);
    }
}

TEST_CASE("model shape validation") {
    Dataset ds;
    ds.rows = 2;
    ds.columns.push_back({"y", Role::Outcome, Kind::Numeric, {0.0, 1.0}, {}});
    ds.columns.push_back({"w", Role::Weight, Kind::Numeric, {0.5, 1.0}, {}});
    CHECK_NOTHROW(ds.check_model_shape());

    SUBCASE("outcome outside {0,1}") {
        ds.columns[0].num[1] = 2.0;
        CHECK_THROWS_AS(ds.check_model_shape(), DataError);
    }
    SUBCASE("weight outside (0,1]") {
        ds.columns[1].num[0] = 0.0;
        CHECK_THROWS_AS(ds.check_model_shape(), DataError);
    }
    SUBCASE("two outcomes") {
        ds.columns.push_back({"y2", Role::Outcome, Kind::Numeric, {0.0, 0.0}, {}});
        CHECK_THROWS_AS(ds.check_model_shape(), SchemaError);
    }
}

TEST_CASE("schema json round trip") {
    const Schema s = basic_schema();
    const Schema back = Schema::from_json(s.to_json());
    REQUIRE(back.fields.size() == 3);
    for (const auto& f : back.fields) {
        bool found = false;
        for (const auto& g : s.fields) {
            found = found || (f.name == g.name && f.role == g.role && f.kind == g.kind);
        }
        CHECK(found);
    }
}
