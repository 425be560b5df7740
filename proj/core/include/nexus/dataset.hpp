#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nexus/matrix.hpp"

namespace nexus {

// Fixed predictor column order; indices in every report refer to this list.
inline constexpr std::array<const char*, 8> kPredictorNames = {
    "max_dry_bulb_temp",  "dew_point_temp", "max_relative_humidity",
    "avg_relative_humidity", "max_wind_speed", "avg_wind_speed",
    "precipitation",      "enso_index",
};
inline constexpr int kPredictorCount = 8;

inline constexpr std::array<const char*, 2> kResponseNames = {"water_use", "electricity_use"};
inline constexpr int kResponseCount = 2;

struct MonthStamp {
    int year = 0;
    int month = 0; // 1..12

    auto operator<=>(const MonthStamp&) const = default;

    std::string to_string() const;
    // Months elapsed from `other` to this stamp.
    int months_since(const MonthStamp& other) const;
    MonthStamp next() const;
};

struct ClimateRecord {
    double max_dry_bulb_temp = 0.0;   // degF
    double dew_point_temp = 0.0;      // degF
    double max_relative_humidity = 0.0; // percent
    double avg_relative_humidity = 0.0; // percent
    double max_wind_speed = 0.0;      // mph
    double avg_wind_speed = 0.0;      // mph
    double precipitation = 0.0;       // inches
    double enso_index = 0.0;

    std::array<double, kPredictorCount> as_row() const;
    // Throws ValidationError naming the offending field; `context` prefixes
    // the message (typically "line N").
    void validate(const std::string& context) const;
};

struct DemandRecord {
    double water_use = 0.0;        // gallons per customer per month
    double electricity_use = 0.0;  // energy per customer per month
    double water_customers = 0.0;
    double electricity_customers = 0.0;

    void validate(const std::string& context) const;
};

struct ColumnStats {
    double mean = 0.0;
    double stddev = 1.0;
};

// Aligned monthly design matrix for one city. Immutable after construction;
// the transforming operations below return modified copies.
struct NexusDataset {
    std::string city_id;
    std::vector<MonthStamp> timeline;
    Matrix X; // n x 8, kPredictorNames order
    Matrix Y; // n x 2, water then electricity
    std::vector<std::optional<ColumnStats>> predictor_standardization; // size 8
    std::vector<std::optional<ColumnStats>> response_standardization;  // size 2
    std::vector<MonthStamp> interpolated_months; // provenance of gap filling

    std::size_t n_rows() const { return timeline.size(); }

    // Checks every construction invariant; throws on violation.
    void validate() const;

    // Undoes recorded standardization on both X and Y.
    NexusDataset destandardized() const;

    // Normalized per-customer table, one row per month.
    std::string to_csv() const;
};

// Canonical-name -> CSV-header mapping. Defaults to the identity; a schema
// file overrides individual names with `canonical = header` lines.
class Schema {
public:
    static Schema identity();
    static Schema load(const std::string& path);

    const std::string& header_for(const std::string& canonical) const;
    bool has_city_column() const { return has_city_; }
    void set_city_header(const std::string& header);

private:
    Schema() = default;
    std::vector<std::pair<std::string, std::string>> mapping_;
    bool has_city_ = false;
};

// Reads a UTF-8, comma-separated, header-first CSV with one row per
// city-month; usage columns are divided by customer counts; rows are sorted
// by month. A multi-city file is an error here (see ingest_csv_cities).
NexusDataset ingest_csv(const std::string& path, const Schema& schema);

// Splits a multi-city file into one validated dataset per city, ordered by
// first appearance.
std::vector<NexusDataset> ingest_csv_cities(const std::string& path, const Schema& schema);

enum class GapPolicy { fail, interpolate };

// Under `fail` any missing month raises. Under `interpolate`, gaps of at most
// two consecutive months are filled linearly per column and recorded in
// provenance; longer gaps raise.
NexusDataset handle_gaps(const NexusDataset& ds, GapPolicy policy);

enum class StandardizeTarget { responses, predictors, both };

// Zero-mean unit-variance transform using the sample (n-1) standard
// deviation; the applied (mean, stddev) is recorded so the transform inverts.
NexusDataset standardize(const NexusDataset& ds, StandardizeTarget which);

// Replaces the ENSO column with its value `lag` months earlier, dropping the
// first `lag` rows.
NexusDataset lag_enso(const NexusDataset& ds, int lag);

} // namespace nexus
