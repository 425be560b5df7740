#include "nexus/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nexus/errors.hpp"
#include "nexus/format.hpp"
#include "nexus/stats.hpp"

namespace nexus {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // tolerate CRLF
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& raw, const std::string& context,
                    const std::string& column) {
    std::string s = trim(raw);
    if (s.empty()) {
        throw ValidationError(context + ": empty value in column '" + column + "'");
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError(context + ": cannot parse '" + s + "' in column '" + column +
                              "' as a number");
    }
    return value;
}

int parse_int(const std::string& raw, const std::string& context, const std::string& column) {
    std::string s = trim(raw);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError(context + ": cannot parse '" + s + "' in column '" + column +
                              "' as an integer");
    }
    return value;
}

struct ParsedRow {
    std::string city;
    MonthStamp stamp;
    ClimateRecord climate;
    DemandRecord demand;
    std::size_t line = 0;
};

struct ColumnIndex {
    std::size_t year, month;
    std::array<std::size_t, kPredictorCount> predictors;
    std::size_t water_use, electricity_use, water_customers, electricity_customers;
    std::optional<std::size_t> city;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const Schema& schema) {
    auto find = [&](const std::string& canonical) -> std::size_t {
        const std::string& name = schema.header_for(canonical);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        throw SchemaError("missing required column '" + name + "' (for '" + canonical + "')");
    };

    ColumnIndex idx;
    idx.year = find("year");
    idx.month = find("month");
    for (int j = 0; j < kPredictorCount; ++j) {
        idx.predictors[static_cast<std::size_t>(j)] = find(kPredictorNames[static_cast<std::size_t>(j)]);
    }
    idx.water_use = find("water_use");
    idx.electricity_use = find("electricity_use");
    idx.water_customers = find("water_customers");
    idx.electricity_customers = find("electricity_customers");

    const std::string& city_name = schema.header_for("city");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == city_name) idx.city = i;
    }
    return idx;
}

std::vector<ParsedRow> parse_file(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": missing header row");
    ColumnIndex idx = resolve_columns(split_csv_line(line), schema);

    std::vector<ParsedRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        std::string context = path + " line " + std::to_string(line_no);

        auto field = [&](std::size_t i) -> const std::string& {
            if (i >= f.size()) {
                throw ValidationError(context + ": row has only " + std::to_string(f.size()) +
                                      " fields");
            }
            return f[i];
        };

        ParsedRow row;
        row.line = line_no;
        row.stamp.year = parse_int(field(idx.year), context, "year");
        row.stamp.month = parse_int(field(idx.month), context, "month");
        if (row.stamp.month < 1 || row.stamp.month > 12) {
            throw ValidationError(context + ": month " + std::to_string(row.stamp.month) +
                                  " outside [1,12]");
        }

        double* climate_fields[kPredictorCount] = {
            &row.climate.max_dry_bulb_temp,  &row.climate.dew_point_temp,
            &row.climate.max_relative_humidity, &row.climate.avg_relative_humidity,
            &row.climate.max_wind_speed,     &row.climate.avg_wind_speed,
            &row.climate.precipitation,      &row.climate.enso_index,
        };
        for (int j = 0; j < kPredictorCount; ++j) {
            *climate_fields[j] = parse_double(field(idx.predictors[static_cast<std::size_t>(j)]),
                                              context, kPredictorNames[static_cast<std::size_t>(j)]);
        }
        row.climate.validate(context);

        double raw_water = parse_double(field(idx.water_use), context, "water_use");
        double raw_electricity =
            parse_double(field(idx.electricity_use), context, "electricity_use");
        row.demand.water_customers =
            parse_double(field(idx.water_customers), context, "water_customers");
        row.demand.electricity_customers =
            parse_double(field(idx.electricity_customers), context, "electricity_customers");

        if (!std::isfinite(raw_water) || raw_water < 0.0) {
            throw ValidationError(context + ": water_use must be finite and non-negative, got " +
                                  format_double(raw_water));
        }
        if (!std::isfinite(raw_electricity) || raw_electricity < 0.0) {
            throw ValidationError(context +
                                  ": electricity_use must be finite and non-negative, got " +
                                  format_double(raw_electricity));
        }
        if (!(row.demand.water_customers > 0.0) ||
            !(row.demand.electricity_customers > 0.0)) {
            throw ValidationError(context + ": customer counts must be positive");
        }

        row.demand.water_use = raw_water / row.demand.water_customers;
        row.demand.electricity_use = raw_electricity / row.demand.electricity_customers;
        row.demand.validate(context);

        if (idx.city.has_value()) row.city = trim(field(*idx.city));
        rows.push_back(std::move(row));
    }
    return rows;
}

NexusDataset assemble(std::string city_id, std::vector<ParsedRow> rows,
                      const std::string& path) {
    std::sort(rows.begin(), rows.end(),
              [](const ParsedRow& a, const ParsedRow& b) { return a.stamp < b.stamp; });

    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].stamp == rows[i + 1].stamp) {
            throw DuplicateKeyError(path + ": duplicate month " + rows[i].stamp.to_string() +
                                    " for city '" + city_id + "'");
        }
    }

    NexusDataset ds;
    ds.city_id = std::move(city_id);
    ds.X = Matrix(rows.size(), kPredictorCount);
    ds.Y = Matrix(rows.size(), kResponseCount);
    ds.predictor_standardization.assign(kPredictorCount, std::nullopt);
    ds.response_standardization.assign(kResponseCount, std::nullopt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.timeline.push_back(rows[i].stamp);
        std::array<double, kPredictorCount> x = rows[i].climate.as_row();
        for (int j = 0; j < kPredictorCount; ++j) {
            ds.X(i, static_cast<std::size_t>(j)) = x[static_cast<std::size_t>(j)];
        }
        ds.Y(i, 0) = rows[i].demand.water_use;
        ds.Y(i, 1) = rows[i].demand.electricity_use;
    }
    ds.validate();
    return ds;
}

} // namespace

std::string MonthStamp::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

int MonthStamp::months_since(const MonthStamp& other) const {
    return (year - other.year) * 12 + (month - other.month);
}

MonthStamp MonthStamp::next() const {
    if (month == 12) return {year + 1, 1};
    return {year, month + 1};
}

std::array<double, kPredictorCount> ClimateRecord::as_row() const {
    return {max_dry_bulb_temp,  dew_point_temp, max_relative_humidity,
            avg_relative_humidity, max_wind_speed, avg_wind_speed,
            precipitation,      enso_index};
}

void ClimateRecord::validate(const std::string& context) const {
    for (double v : as_row()) {
        if (!std::isfinite(v)) throw ValidationError(context + ": non-finite climate value");
    }
    auto in_percent_range = [](double v) { return v >= 0.0 && v <= 100.0; };
    if (!in_percent_range(max_relative_humidity)) {
        throw ValidationError(context + ": max_relative_humidity " +
                              format_double(max_relative_humidity) + " outside range [0,100]");
    }
    if (!in_percent_range(avg_relative_humidity)) {
        throw ValidationError(context + ": avg_relative_humidity " +
                              format_double(avg_relative_humidity) + " outside range [0,100]");
    }
    if (max_wind_speed < 0.0 || avg_wind_speed < 0.0) {
        throw ValidationError(context + ": wind speed must be non-negative");
    }
    if (precipitation < 0.0) {
        throw ValidationError(context + ": precipitation must be non-negative");
    }
    if (dew_point_temp > max_dry_bulb_temp) {
        throw ValidationError(context + ": dew point " + format_double(dew_point_temp) +
                              " exceeds max dry bulb temperature " +
                              format_double(max_dry_bulb_temp));
    }
}

void DemandRecord::validate(const std::string& context) const {
    if (!std::isfinite(water_use) || water_use < 0.0) {
        throw ValidationError(context + ": per-customer water use must be finite and >= 0");
    }
    if (!std::isfinite(electricity_use) || electricity_use < 0.0) {
        throw ValidationError(context + ": per-customer electricity use must be finite and >= 0");
    }
    if (!(water_customers > 0.0) || !(electricity_customers > 0.0)) {
        throw ValidationError(context + ": customer counts must be positive");
    }
}

void NexusDataset::validate() const {
    const std::size_t n = timeline.size();
    if (X.rows() != n || Y.rows() != n) {
        throw ShapeError("dataset '" + city_id + "': matrix row counts disagree with timeline");
    }
    if (X.cols() != kPredictorCount || Y.cols() != kResponseCount) {
        throw ShapeError("dataset '" + city_id + "': wrong column count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (timeline[i].month < 1 || timeline[i].month > 12) {
            throw ValidationError("dataset '" + city_id + "': month outside [1,12]");
        }
        if (i + 1 < n && !(timeline[i] < timeline[i + 1])) {
            throw ValidationError("dataset '" + city_id + "': timeline not strictly increasing at " +
                                  timeline[i + 1].to_string());
        }
    }
    if (!X.all_finite() || !Y.all_finite()) {
        throw ValidationError("dataset '" + city_id + "': non-finite entry");
    }
    if (!predictor_standardization.empty() &&
        predictor_standardization.size() != kPredictorCount) {
        throw ShapeError("dataset '" + city_id + "': bad predictor standardization size");
    }
    if (!response_standardization.empty() &&
        response_standardization.size() != kResponseCount) {
        throw ShapeError("dataset '" + city_id + "': bad response standardization size");
    }
}

NexusDataset NexusDataset::destandardized() const {
    NexusDataset out = *this;
    for (int j = 0; j < kPredictorCount; ++j) {
        const auto& st = predictor_standardization[static_cast<std::size_t>(j)];
        if (!st.has_value()) continue;
        for (std::size_t i = 0; i < out.X.rows(); ++i) {
            out.X(i, static_cast<std::size_t>(j)) =
                out.X(i, static_cast<std::size_t>(j)) * st->stddev + st->mean;
        }
        out.predictor_standardization[static_cast<std::size_t>(j)] = std::nullopt;
    }
    for (int k = 0; k < kResponseCount; ++k) {
        const auto& st = response_standardization[static_cast<std::size_t>(k)];
        if (!st.has_value()) continue;
        for (std::size_t i = 0; i < out.Y.rows(); ++i) {
            out.Y(i, static_cast<std::size_t>(k)) =
                out.Y(i, static_cast<std::size_t>(k)) * st->stddev + st->mean;
        }
        out.response_standardization[static_cast<std::size_t>(k)] = std::nullopt;
    }
    return out;
}

std::string NexusDataset::to_csv() const {
    std::string out = "city,year,month";
    for (const char* name : kPredictorNames) out += std::string(",") + name;
    for (const char* name : kResponseNames) out += std::string(",") + name;
    out += "\n";
    for (std::size_t i = 0; i < n_rows(); ++i) {
        out += csv_field(city_id) + "," + std::to_string(timeline[i].year) + "," +
               std::to_string(timeline[i].month);
        for (int j = 0; j < kPredictorCount; ++j) {
            out += "," + format_double(X(i, static_cast<std::size_t>(j)));
        }
        for (int k = 0; k < kResponseCount; ++k) {
            out += "," + format_double(Y(i, static_cast<std::size_t>(k)));
        }
        out += "\n";
    }
    return out;
}

Schema Schema::identity() {
    Schema s;
    s.mapping_.emplace_back("year", "year");
    s.mapping_.emplace_back("month", "month");
    for (const char* name : kPredictorNames) s.mapping_.emplace_back(name, name);
    s.mapping_.emplace_back("water_use", "water_use");
    s.mapping_.emplace_back("electricity_use", "electricity_use");
    s.mapping_.emplace_back("water_customers", "water_customers");
    s.mapping_.emplace_back("electricity_customers", "electricity_customers");
    s.mapping_.emplace_back("city", "city");
    return s;
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path);

    Schema s = identity();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw SchemaError(path + " line " + std::to_string(line_no) +
                              ": expected 'canonical = header'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        bool known = false;
        for (auto& [canonical, header] : s.mapping_) {
            if (canonical == key) {
                header = value;
                known = true;
                break;
            }
        }
        if (!known) {
            throw SchemaError(path + " line " + std::to_string(line_no) + ": unknown column '" +
                              key + "'");
        }
    }
    return s;
}

const std::string& Schema::header_for(const std::string& canonical) const {
    for (const auto& [key, header] : mapping_) {
        if (key == canonical) return header;
    }
    throw SchemaError("unknown canonical column '" + canonical + "'");
}

void Schema::set_city_header(const std::string& header) {
    for (auto& [key, value] : mapping_) {
        if (key == "city") {
            value = header;
            has_city_ = true;
            return;
        }
    }
}

NexusDataset ingest_csv(const std::string& path, const Schema& schema) {
    std::vector<ParsedRow> rows = parse_file(path, schema);

    std::set<std::string> cities;
    for (const ParsedRow& r : rows) cities.insert(r.city);
    if (cities.size() > 1) {
        throw ValidationError(path + ": file contains " + std::to_string(cities.size()) +
                              " cities; ingest per city or use the multi-city path");
    }

    std::string city_id = cities.empty() || cities.begin()->empty()
                              ? std::filesystem::path(path).stem().string()
                              : *cities.begin();
    return assemble(std::move(city_id), std::move(rows), path);
}

std::vector<NexusDataset> ingest_csv_cities(const std::string& path, const Schema& schema) {
    std::vector<ParsedRow> rows = parse_file(path, schema);

    std::vector<std::string> order;
    std::map<std::string, std::vector<ParsedRow>> by_city;
    for (ParsedRow& r : rows) {
        std::string key = r.city.empty() ? std::filesystem::path(path).stem().string() : r.city;
        if (by_city.find(key) == by_city.end()) order.push_back(key);
        by_city[key].push_back(std::move(r));
    }

    std::vector<NexusDataset> out;
    for (const std::string& city : order) {
        out.push_back(assemble(city, std::move(by_city[city]), path));
    }
    return out;
}

NexusDataset handle_gaps(const NexusDataset& ds, GapPolicy policy) {
    ds.validate();
    if (ds.timeline.empty()) return ds;

    NexusDataset out;
    out.city_id = ds.city_id;
    out.predictor_standardization = ds.predictor_standardization;
    out.response_standardization = ds.response_standardization;
    out.interpolated_months = ds.interpolated_months;

    std::vector<MonthStamp> timeline;
    std::vector<std::array<double, kPredictorCount>> xs;
    std::vector<std::array<double, kResponseCount>> ys;

    auto push_row = [&](const MonthStamp& stamp, std::size_t i) {
        timeline.push_back(stamp);
        std::array<double, kPredictorCount> x{};
        for (int j = 0; j < kPredictorCount; ++j) x[static_cast<std::size_t>(j)] = ds.X(i, static_cast<std::size_t>(j));
        xs.push_back(x);
        std::array<double, kResponseCount> y{};
        for (int k = 0; k < kResponseCount; ++k) y[static_cast<std::size_t>(k)] = ds.Y(i, static_cast<std::size_t>(k));
        ys.push_back(y);
    };

    push_row(ds.timeline[0], 0);
    for (std::size_t i = 0; i + 1 < ds.timeline.size(); ++i) {
        int span = ds.timeline[i + 1].months_since(ds.timeline[i]) - 1;
        if (span > 0) {
            if (policy == GapPolicy::fail) {
                throw GapError("dataset '" + ds.city_id + "': " + std::to_string(span) +
                               "-month gap after " + ds.timeline[i].to_string());
            }
            if (span > 2) {
                throw GapError("dataset '" + ds.city_id + "': " + std::to_string(span) +
                               "-month gap after " + ds.timeline[i].to_string() +
                               " exceeds the 2-month interpolation limit");
            }
            MonthStamp stamp = ds.timeline[i];
            for (int g = 1; g <= span; ++g) {
                stamp = stamp.next();
                double w = static_cast<double>(g) / static_cast<double>(span + 1);
                timeline.push_back(stamp);
                std::array<double, kPredictorCount> x{};
                for (int j = 0; j < kPredictorCount; ++j) {
                    double a = ds.X(i, static_cast<std::size_t>(j));
                    double b = ds.X(i + 1, static_cast<std::size_t>(j));
                    x[static_cast<std::size_t>(j)] = a + (b - a) * w;
                }
                xs.push_back(x);
                std::array<double, kResponseCount> y{};
                for (int k = 0; k < kResponseCount; ++k) {
                    double a = ds.Y(i, static_cast<std::size_t>(k));
                    double b = ds.Y(i + 1, static_cast<std::size_t>(k));
                    y[static_cast<std::size_t>(k)] = a + (b - a) * w;
                }
                ys.push_back(y);
                out.interpolated_months.push_back(stamp);
            }
        }
        push_row(ds.timeline[i + 1], i + 1);
    }

    out.timeline = std::move(timeline);
    out.X = Matrix(xs.size(), kPredictorCount);
    out.Y = Matrix(ys.size(), kResponseCount);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int j = 0; j < kPredictorCount; ++j) {
            out.X(i, static_cast<std::size_t>(j)) = xs[i][static_cast<std::size_t>(j)];
        }
        for (int k = 0; k < kResponseCount; ++k) {
            out.Y(i, static_cast<std::size_t>(k)) = ys[i][static_cast<std::size_t>(k)];
        }
    }
    out.validate();
    return out;
}

namespace {

void standardize_column(Matrix& m, std::size_t col, std::optional<ColumnStats>& meta,
                        const std::string& name) {
    std::vector<double> values = m.column(col);
    double mu = mean(values);
    double sd = sample_stddev(values);
    if (sd <= 0.0) {
        throw DegenerateDataError("standardize: column '" + name + "' has zero variance");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, col) = (m(i, col) - mu) / sd;

    if (meta.has_value()) {
        // Compose so one inversion always returns to the raw scale.
        meta = ColumnStats{meta->mean + mu * meta->stddev, meta->stddev * sd};
    } else {
        meta = ColumnStats{mu, sd};
    }
}

} // namespace

NexusDataset standardize(const NexusDataset& ds, StandardizeTarget which) {
    NexusDataset out = ds;
    if (out.predictor_standardization.empty()) {
        out.predictor_standardization.assign(kPredictorCount, std::nullopt);
    }
    if (out.response_standardization.empty()) {
        out.response_standardization.assign(kResponseCount, std::nullopt);
    }
    if (which == StandardizeTarget::predictors || which == StandardizeTarget::both) {
        for (int j = 0; j < kPredictorCount; ++j) {
            standardize_column(out.X, static_cast<std::size_t>(j),
                               out.predictor_standardization[static_cast<std::size_t>(j)],
                               kPredictorNames[static_cast<std::size_t>(j)]);
        }
    }
    if (which == StandardizeTarget::responses || which == StandardizeTarget::both) {
        for (int k = 0; k < kResponseCount; ++k) {
            standardize_column(out.Y, static_cast<std::size_t>(k),
                               out.response_standardization[static_cast<std::size_t>(k)],
                               kResponseNames[static_cast<std::size_t>(k)]);
        }
    }
    return out;
}

NexusDataset lag_enso(const NexusDataset& ds, int lag) {
    if (lag < 0) throw ConfigError("lag_enso: lag must be >= 0");
    if (lag == 0) return ds;
    if (static_cast<std::size_t>(lag) >= ds.n_rows()) {
        throw InsufficientDataError("lag_enso: lag consumes the whole series");
    }

    const std::size_t enso_col = kPredictorCount - 1;
    const std::size_t n = ds.n_rows() - static_cast<std::size_t>(lag);
    NexusDataset out;
    out.city_id = ds.city_id;
    out.predictor_standardization = ds.predictor_standardization;
    out.response_standardization = ds.response_standardization;
    out.interpolated_months = ds.interpolated_months;
    out.X = Matrix(n, kPredictorCount);
    out.Y = Matrix(n, kResponseCount);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t src = i + static_cast<std::size_t>(lag);
        out.timeline.push_back(ds.timeline[src]);
        for (std::size_t j = 0; j < kPredictorCount; ++j) out.X(i, j) = ds.X(src, j);
        out.X(i, enso_col) = ds.X(src - static_cast<std::size_t>(lag), enso_col);
        for (std::size_t k = 0; k < kResponseCount; ++k) out.Y(i, k) = ds.Y(src, k);
    }
    out.validate();
    return out;
}

} // namespace nexus
