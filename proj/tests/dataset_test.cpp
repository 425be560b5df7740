#include <doctest.h>

#include <cmath>

#include "nexus/dataset.hpp"
#include "nexus/errors.hpp"
#include "nexus/format.hpp"
#include "test_support.hpp"

using nexus::NexusDataset;
using nexus::Schema;

namespace {

const char* kHeader =
    "year,month,max_dry_bulb_temp,dew_point_temp,max_relative_humidity,"
    "avg_relative_humidity,max_wind_speed,avg_wind_speed,precipitation,enso_index,"
    "water_use,electricity_use,water_customers,electricity_customers";

std::string with_header(const std::string& rows) {
    return std::string(kHeader) + "\n" + rows;
}

} // namespace

TEST_CASE("ingest normalizes usage by customer counts") {
    testsup::TempDir dir("ingest");
    testsup::write_file(dir.file("city.csv"),
                        with_header("2010,7,88.1,65.2,93,71,18,8,4.1,0.5,5200,1.95,1400,2100\n"));

    NexusDataset ds = nexus::ingest_csv(dir.file("city.csv"), Schema::identity());
    REQUIRE(ds.n_rows() == 1);
    CHECK(ds.city_id == "city");
    CHECK(ds.timeline[0].year == 2010);
    CHECK(ds.timeline[0].month == 7);
    CHECK(ds.Y(0, 0) == 5200.0 / 1400.0);
    CHECK(ds.Y(0, 1) == 1.95 / 2100.0);
    CHECK(ds.X(0, 0) == 88.1);
    CHECK(ds.X(0, 7) == 0.5);
}

TEST_CASE("duplicate months are rejected") {
    testsup::TempDir dir("dup");
    testsup::write_file(dir.file("city.csv"),
                        with_header("2010,1,50,40,90,70,10,5,2,0.1,100,1,10,10\n"
                                    "2010,1,51,41,90,70,10,5,2,0.1,100,1,10,10\n"));
    CHECK_THROWS_AS(nexus::ingest_csv(dir.file("city.csv"), Schema::identity()),
                    nexus::DuplicateKeyError);
}

TEST_CASE("humidity outside range is rejected with the range in the message") {
    testsup::TempDir dir("hum");
    testsup::write_file(dir.file("city.csv"),
                        with_header("2010,1,50,40,140,70,10,5,2,0.1,100,1,10,10\n"));
    try {
        nexus::ingest_csv(dir.file("city.csv"), Schema::identity());
        FAIL("expected ValidationError");
    } catch (const nexus::ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[0,100]") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("missing column names the column") {
    testsup::TempDir dir("missing");
    testsup::write_file(dir.file("city.csv"), "year,month\n2010,1\n");
    try {
        nexus::ingest_csv(dir.file("city.csv"), Schema::identity());
        FAIL("expected SchemaError");
    } catch (const nexus::SchemaError& e) {
        CHECK(std::string(e.what()).find("max_dry_bulb_temp") != std::string::npos);
    }
}

TEST_CASE("row-level problems report the line") {
    testsup::TempDir dir("rows");

    SUBCASE("negative usage") {
        testsup::write_file(dir.file("bad.csv"),
                            with_header("2010,1,50,40,90,70,10,5,2,0.1,100,1,10,10\n"
                                        "2010,2,50,40,90,70,10,5,2,0.1,-5,1,10,10\n"));
        try {
            nexus::ingest_csv(dir.file("bad.csv"), Schema::identity());
            FAIL("expected ValidationError");
        } catch (const nexus::ValidationError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }

    SUBCASE("non-numeric field") {
        testsup::write_file(dir.file("bad.csv"),
                            with_header("2010,1,50,forty,90,70,10,5,2,0.1,100,1,10,10\n"));
        CHECK_THROWS_AS(nexus::ingest_csv(dir.file("bad.csv"), Schema::identity()),
                        nexus::ValidationError);
    }

    SUBCASE("dew point above dry bulb") {
        testsup::write_file(dir.file("bad.csv"),
                            with_header("2010,1,50,60,90,70,10,5,2,0.1,100,1,10,10\n"));
        CHECK_THROWS_AS(nexus::ingest_csv(dir.file("bad.csv"), Schema::identity()),
                        nexus::ValidationError);
    }

    SUBCASE("zero customers") {
        testsup::write_file(dir.file("bad.csv"),
                            with_header("2010,1,50,40,90,70,10,5,2,0.1,100,1,0,10\n"));
        CHECK_THROWS_AS(nexus::ingest_csv(dir.file("bad.csv"), Schema::identity()),
                        nexus::ValidationError);
    }
}

TEST_CASE("row order does not matter") {
    testsup::TempDir dir("perm");
    std::string row1 = "2010,2,50,40,90,70,10,5,2,0.1,100,1,10,10\n";
    std::string row2 = "2010,1,51,41,91,71,11,6,3,0.2,200,2,20,20\n";
    std::string row3 = "2011,1,52,42,92,72,12,7,4,0.3,300,3,30,30\n";
    testsup::write_file(dir.file("a.csv"), with_header(row1 + row2 + row3));
    testsup::write_file(dir.file("b.csv"), with_header(row3 + row1 + row2));

    NexusDataset a = nexus::ingest_csv(dir.file("a.csv"), Schema::identity());
    NexusDataset b = nexus::ingest_csv(dir.file("b.csv"), Schema::identity());
    CHECK(a.timeline == b.timeline);
    CHECK(a.X == b.X);
    CHECK(a.Y == b.Y);
}

TEST_CASE("normalization inverts against the raw usage column") {
    testsup::TempDir dir("norm");
    nexus::Rng rng(12);
    std::string body;
    std::vector<double> raw_water;
    std::vector<double> customers;
    for (int m = 1; m <= 12; ++m) {
        double usage = 1000.0 + 5000.0 * rng.next_double();
        double cust = 100.0 + std::floor(900.0 * rng.next_double());
        raw_water.push_back(usage);
        customers.push_back(cust);
        body += "2012," + std::to_string(m) + ",60,45,90,70,10,5,2,0.1," +
                nexus::format_double(usage) + ",2.5," + nexus::format_double(cust) + ",500\n";
    }
    testsup::write_file(dir.file("c.csv"), with_header(body));
    NexusDataset ds = nexus::ingest_csv(dir.file("c.csv"), Schema::identity());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        CHECK(ds.Y(i, 0) * customers[i] == doctest::Approx(raw_water[i]).epsilon(1e-9));
    }
}

TEST_CASE("schema files rename headers") {
    testsup::TempDir dir("schema");
    testsup::write_file(dir.file("schema.txt"),
                        "# canonical = header\n"
                        "year = YR\n"
                        "month = MO\n"
                        "max_dry_bulb_temp = TMAX\n");
    testsup::write_file(
        dir.file("city.csv"),
        "YR,MO,TMAX,dew_point_temp,max_relative_humidity,avg_relative_humidity,"
        "max_wind_speed,avg_wind_speed,precipitation,enso_index,water_use,"
        "electricity_use,water_customers,electricity_customers\n"
        "2010,7,88.1,65.2,93,71,18,8,4.1,0.5,5200,1.95,1400,2100\n");

    Schema schema = Schema::load(dir.file("schema.txt"));
    NexusDataset ds = nexus::ingest_csv(dir.file("city.csv"), schema);
    CHECK(ds.n_rows() == 1);

    testsup::write_file(dir.file("bad_schema.txt"), "unknown_thing = X\n");
    CHECK_THROWS_AS(Schema::load(dir.file("bad_schema.txt")), nexus::SchemaError);
}

TEST_CASE("multi-city files split per city") {
    testsup::TempDir dir("multi");
    std::string content = std::string("city,") + kHeader + "\n" +
                          "alpha,2010,1,50,40,90,70,10,5,2,0.1,100,1,10,10\n" +
                          "beta,2010,1,55,45,85,65,12,6,1,0.2,200,2,20,20\n" +
                          "alpha,2010,2,51,41,90,70,10,5,2,0.1,110,1,10,10\n";
    testsup::write_file(dir.file("cities.csv"), content);

    CHECK_THROWS_AS(nexus::ingest_csv(dir.file("cities.csv"), Schema::identity()),
                    nexus::ValidationError);

    std::vector<NexusDataset> all =
        nexus::ingest_csv_cities(dir.file("cities.csv"), Schema::identity());
    REQUIRE(all.size() == 2);
    CHECK(all[0].city_id == "alpha");
    CHECK(all[0].n_rows() == 2);
    CHECK(all[1].city_id == "beta");
    CHECK(all[1].n_rows() == 1);
}

namespace {

NexusDataset tiny_dataset(const std::vector<nexus::MonthStamp>& stamps,
                          const std::vector<double>& first_predictor) {
    NexusDataset ds;
    ds.city_id = "t";
    ds.timeline = stamps;
    ds.X = nexus::Matrix(stamps.size(), nexus::kPredictorCount);
    ds.Y = nexus::Matrix(stamps.size(), nexus::kResponseCount);
    ds.predictor_standardization.assign(nexus::kPredictorCount, std::nullopt);
    ds.response_standardization.assign(nexus::kResponseCount, std::nullopt);
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        ds.X(i, 0) = first_predictor[i];
        ds.X(i, 1) = ds.X(i, 0) - 10.0; // keep dew below dry bulb
        for (std::size_t j = 2; j < nexus::kPredictorCount; ++j) ds.X(i, j) = 50.0;
        ds.Y(i, 0) = 2.0 * static_cast<double>(i) + 1.0;
        ds.Y(i, 1) = 3.0;
    }
    return ds;
}

} // namespace

TEST_CASE("gap handling") {
    using nexus::MonthStamp;

    SUBCASE("a complete timeline passes through unchanged") {
        NexusDataset ds = tiny_dataset({{2011, 4}, {2011, 5}, {2011, 6}}, {10.0, 11.0, 12.0});
        NexusDataset out = nexus::handle_gaps(ds, nexus::GapPolicy::fail);
        CHECK(out.timeline == ds.timeline);
        CHECK(out.X == ds.X);
        CHECK(out.interpolated_months.empty());
    }

    SUBCASE("one missing month interpolates to the midpoint") {
        NexusDataset ds = tiny_dataset({{2011, 5}, {2011, 7}}, {10.0, 12.0});
        NexusDataset out = nexus::handle_gaps(ds, nexus::GapPolicy::interpolate);
        REQUIRE(out.n_rows() == 3);
        CHECK(out.timeline[1] == MonthStamp{2011, 6});
        CHECK(out.X(1, 0) == doctest::Approx(11.0).epsilon(1e-12));
        REQUIRE(out.interpolated_months.size() == 1);
        CHECK(out.interpolated_months[0] == MonthStamp{2011, 6});
    }

    SUBCASE("fail policy rejects any gap") {
        NexusDataset ds = tiny_dataset({{2011, 5}, {2011, 7}}, {10.0, 12.0});
        CHECK_THROWS_AS(nexus::handle_gaps(ds, nexus::GapPolicy::fail), nexus::GapError);
    }

    SUBCASE("three-month gaps exceed the interpolation limit") {
        NexusDataset ds = tiny_dataset({{2011, 5}, {2011, 9}}, {10.0, 12.0});
        CHECK_THROWS_AS(nexus::handle_gaps(ds, nexus::GapPolicy::interpolate), nexus::GapError);
    }
}

TEST_CASE("standardization uses the sample stddev and records metadata") {
    NexusDataset ds = tiny_dataset({{2011, 1}, {2011, 2}}, {30.0, 40.0});
    ds.Y(0, 0) = 2.0;
    ds.Y(1, 0) = 4.0;
    ds.Y(0, 1) = 1.0;
    ds.Y(1, 1) = 2.0;

    NexusDataset out = nexus::standardize(ds, nexus::StandardizeTarget::responses);
    double expected = 1.0 / std::sqrt(2.0);
    CHECK(out.Y(0, 0) == doctest::Approx(-expected).epsilon(1e-12));
    CHECK(out.Y(1, 0) == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(out.response_standardization[0].has_value());
    CHECK(out.response_standardization[0]->mean == doctest::Approx(3.0));
    CHECK(out.response_standardization[0]->stddev == doctest::Approx(std::sqrt(2.0)));

    SUBCASE("re-standardizing is idempotent") {
        NexusDataset twice = nexus::standardize(out, nexus::StandardizeTarget::responses);
        CHECK(twice.Y(0, 0) == doctest::Approx(out.Y(0, 0)).epsilon(1e-12));
        CHECK(twice.Y(1, 0) == doctest::Approx(out.Y(1, 0)).epsilon(1e-12));
        // composed metadata still inverts to the raw scale
        NexusDataset back = twice.destandardized();
        CHECK(back.Y(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(back.Y(1, 0) == doctest::Approx(4.0).epsilon(1e-9));
    }

    SUBCASE("constant columns are degenerate") {
        NexusDataset d2 = tiny_dataset({{2011, 1}, {2011, 2}}, {30.0, 40.0});
        CHECK_THROWS_AS(nexus::standardize(d2, nexus::StandardizeTarget::predictors),
                        nexus::DegenerateDataError);
    }
}

TEST_CASE("standardize round trips on random data") {
    nexus::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 12 + rng.next_below(60);
        NexusDataset ds;
        ds.city_id = "r";
        ds.X = nexus::Matrix(n, nexus::kPredictorCount);
        ds.Y = nexus::Matrix(n, nexus::kResponseCount);
        ds.predictor_standardization.assign(nexus::kPredictorCount, std::nullopt);
        ds.response_standardization.assign(nexus::kResponseCount, std::nullopt);
        nexus::MonthStamp stamp{2000, 1};
        for (std::size_t i = 0; i < n; ++i) {
            ds.timeline.push_back(stamp);
            stamp = stamp.next();
            for (std::size_t j = 0; j < nexus::kPredictorCount; ++j) {
                ds.X(i, j) = 20.0 * rng.next_gaussian() + 50.0;
            }
            ds.X(i, 1) = ds.X(i, 0) - 5.0;
            for (std::size_t k = 0; k < nexus::kResponseCount; ++k) {
                ds.Y(i, k) = 100.0 + 10.0 * rng.next_gaussian();
            }
        }

        NexusDataset out = nexus::standardize(ds, nexus::StandardizeTarget::both);
        NexusDataset back = out.destandardized();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < nexus::kPredictorCount; ++j) {
                CHECK(back.X(i, j) == doctest::Approx(ds.X(i, j)).epsilon(1e-9));
            }
            for (std::size_t k = 0; k < nexus::kResponseCount; ++k) {
                CHECK(back.Y(i, k) == doctest::Approx(ds.Y(i, k)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("enso lag shifts the last column and drops leading rows") {
    NexusDataset ds = tiny_dataset({{2011, 1}, {2011, 2}, {2011, 3}}, {10.0, 11.0, 12.0});
    ds.X(0, 7) = 1.0;
    ds.X(1, 7) = 2.0;
    ds.X(2, 7) = 3.0;

    NexusDataset lagged = nexus::lag_enso(ds, 1);
    REQUIRE(lagged.n_rows() == 2);
    CHECK(lagged.timeline[0] == nexus::MonthStamp{2011, 2});
    CHECK(lagged.X(0, 7) == 1.0);
    CHECK(lagged.X(1, 7) == 2.0);
    CHECK(lagged.X(0, 0) == 11.0);

    CHECK_THROWS_AS(nexus::lag_enso(ds, 3), nexus::InsufficientDataError);
    CHECK_THROWS_AS(nexus::lag_enso(ds, -1), nexus::ConfigError);
}

TEST_CASE("month stamps order and step correctly") {
    nexus::MonthStamp a{2010, 12};
    nexus::MonthStamp b{2011, 1};
    CHECK(a < b);
    CHECK(a.next() == b);
    CHECK(b.months_since(a) == 1);
    CHECK(a.to_string() == "2010-12");
}
