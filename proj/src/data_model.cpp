#include "causal_audit/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "causal_audit/stats.hpp"

namespace causal_audit {

namespace {

constexpr std::array<const char*, 7> kCsvColumns = {"id",      "race",     "gender", "country",
                                                    "h_index", "prestige", "outcome"};

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

double parse_double_field(const std::string& field, std::size_t row, const char* column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty())
        throw ParseError(row, std::string(column) + ": not a number: '" + field + "'");
    if (!std::isfinite(value))
        throw ParseError(row, std::string(column) + ": non-finite value: '" + field + "'");
    return value;
}

int parse_int_field(const std::string& field, std::size_t row, const char* column) {
    int value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty())
        throw ParseError(row, std::string(column) + ": not an integer: '" + field + "'");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

void validate_record(const PaperRecord& r, std::size_t row) {
    if (r.id.empty()) throw ParseError(row, "id: empty");
    auto check_binary = [&](int v, const char* name) {
        if (v != 0 && v != 1)
            throw ParseError(row, std::string(name) + ": must be 0 or 1, got " + std::to_string(v));
    };
    check_binary(r.race, "race");
    check_binary(r.gender, "gender");
    check_binary(r.country, "country");
    if (!std::isfinite(r.h_index) || r.h_index < 0.0)
        throw ParseError(row, "h_index: must be >= 0, got " + format_double(r.h_index));
    if (!std::isfinite(r.prestige) || r.prestige < 0.0 || r.prestige > 1.0)
        throw ParseError(row, "prestige: must be in [0,1], got " + format_double(r.prestige));
    if (r.outcome < 1 || r.outcome > 3)
        throw ParseError(row,
                         "outcome: must be in {1,2,3}, got " + std::to_string(r.outcome));
}

NumericSummary numeric_summary(const std::vector<double>& values) {
    NumericSummary s;
    s.mean = mean(values);
    s.sd = values.size() > 1 ? sample_sd(values) : 0.0;
    s.median = quantile(values, 0.5);
    s.iqr = quantile(values, 0.75) - quantile(values, 0.25);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    return s;
}

nlohmann::json numeric_summary_json(const NumericSummary& s) {
    return {{"mean", s.mean}, {"sd", s.sd},   {"median", s.median},
            {"iqr", s.iqr},   {"min", s.min}, {"max", s.max}};
}

}  // namespace

const char* attribute_name(Attribute a) {
    switch (a) {
        case Attribute::race: return "race";
        case Attribute::gender: return "gender";
        case Attribute::country: return "country";
    }
    return "?";
}

Attribute attribute_from_name(const std::string& name) {
    if (name == "race") return Attribute::race;
    if (name == "gender") return Attribute::gender;
    if (name == "country") return Attribute::country;
    throw ConfigError("unknown treatment attribute: '" + name + "'");
}

const char* column_name(Column c) {
    switch (c) {
        case Column::h_index: return "h_index";
        case Column::prestige: return "prestige";
        case Column::race: return "race";
        case Column::gender: return "gender";
        case Column::country: return "country";
    }
    return "?";
}

Column column_from_name(const std::string& name) {
    if (name == "h_index") return Column::h_index;
    if (name == "prestige") return Column::prestige;
    if (name == "race") return Column::race;
    if (name == "gender") return Column::gender;
    if (name == "country") return Column::country;
    throw ConfigError("unknown column: '" + name + "'");
}

Column column_of(Attribute a) {
    switch (a) {
        case Attribute::race: return Column::race;
        case Attribute::gender: return Column::gender;
        case Attribute::country: return Column::country;
    }
    return Column::race;
}

std::string attribute_level_label(Attribute a, int value) {
    switch (a) {
        case Attribute::race: return value ? "Minority" : "Majority";
        case Attribute::gender: return value ? "Female" : "Male";
        case Attribute::country: return value ? "Global South" : "Global North";
    }
    return "?";
}

int attribute_value(const PaperRecord& r, Attribute a) {
    switch (a) {
        case Attribute::race: return r.race;
        case Attribute::gender: return r.gender;
        case Attribute::country: return r.country;
    }
    return 0;
}

double column_value(const PaperRecord& r, Column c) {
    switch (c) {
        case Column::h_index: return r.h_index;
        case Column::prestige: return r.prestige;
        case Column::race: return static_cast<double>(r.race);
        case Column::gender: return static_cast<double>(r.gender);
        case Column::country: return static_cast<double>(r.country);
    }
    return 0.0;
}

void TreatmentSpec::validate() const {
    const Column treated_col = column_of(treatment);
    for (Column c : covariates) {
        if (c == treated_col)
            throw ConfigError(std::string("treatment attribute '") + attribute_name(treatment) +
                              "' cannot also be a covariate");
    }
}

nlohmann::json TreatmentSpec::to_json() const {
    nlohmann::json cov = nlohmann::json::array();
    for (Column c : covariates) cov.push_back(column_name(c));
    return {{"treatment", attribute_name(treatment)},
            {"covariates", cov},
            {"outcome", "outcome"}};
}

TreatmentSpec TreatmentSpec::from_json(const nlohmann::json& j) {
    TreatmentSpec spec;
    spec.treatment = attribute_from_name(j.at("treatment").get<std::string>());
    for (const auto& c : j.at("covariates")) spec.covariates.push_back(column_from_name(c));
    spec.validate();
    return spec;
}

Dataset Dataset::from_records(std::vector<PaperRecord> records, Provenance provenance,
                              bool enforce_unique_ids) {
    for (std::size_t i = 0; i < records.size(); ++i) validate_record(records[i], i + 1);
    if (enforce_unique_ids) {
        std::unordered_set<std::string> seen;
        seen.reserve(records.size());
        for (const auto& r : records) {
            if (!seen.insert(r.id).second)
                throw IntegrityError("duplicate id: '" + r.id + "'");
        }
    }
    Dataset ds;
    ds.records_ = std::move(records);
    ds.provenance_ = provenance;
    return ds;
}

std::vector<int> Dataset::treatment_vector(const TreatmentSpec& spec) const {
    std::vector<int> t(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i)
        t[i] = attribute_value(records_[i], spec.treatment);
    return t;
}

std::vector<double> Dataset::outcome_vector() const {
    std::vector<double> y(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i)
        y[i] = static_cast<double>(records_[i].outcome);
    return y;
}

std::vector<double> Dataset::column_vector(Column c) const {
    std::vector<double> x(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) x[i] = column_value(records_[i], c);
    return x;
}

std::vector<std::vector<double>> Dataset::covariate_columns(const TreatmentSpec& spec) const {
    std::vector<std::vector<double>> cols;
    cols.reserve(spec.covariates.size());
    for (Column c : spec.covariates) cols.push_back(column_vector(c));
    return cols;
}

void Dataset::require_both_groups(const TreatmentSpec& spec) const {
    std::size_t n1 = 0;
    for (const auto& r : records_) n1 += static_cast<std::size_t>(attribute_value(r, spec.treatment));
    if (n1 == 0 || n1 == records_.size())
        throw DomainError(std::string("treatment '") + attribute_name(spec.treatment) +
                          "': a group is empty (n_treated=" + std::to_string(n1) +
                          ", n=" + std::to_string(records_.size()) + ")");
}

Dataset parse_csv(std::istream& in, Provenance provenance) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    std::array<int, kCsvColumns.size()> position;
    position.fill(-1);
    for (std::size_t i = 0; i < header.size(); ++i) {
        bool known = false;
        for (std::size_t j = 0; j < kCsvColumns.size(); ++j) {
            if (header[i] == kCsvColumns[j]) {
                if (position[j] != -1)
                    throw SchemaError("duplicate column: '" + header[i] + "'");
                position[j] = static_cast<int>(i);
                known = true;
                break;
            }
        }
        if (!known) throw SchemaError("unknown column: '" + header[i] + "'");
    }
    for (std::size_t j = 0; j < kCsvColumns.size(); ++j) {
        if (position[j] == -1)
            throw SchemaError(std::string("missing column: '") + kCsvColumns[j] + "'");
    }

    std::vector<PaperRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
        PaperRecord r;
        r.id = fields[static_cast<std::size_t>(position[0])];
        r.race = parse_int_field(fields[static_cast<std::size_t>(position[1])], row, "race");
        r.gender = parse_int_field(fields[static_cast<std::size_t>(position[2])], row, "gender");
        r.country = parse_int_field(fields[static_cast<std::size_t>(position[3])], row, "country");
        r.h_index =
            parse_double_field(fields[static_cast<std::size_t>(position[4])], row, "h_index");
        r.prestige =
            parse_double_field(fields[static_cast<std::size_t>(position[5])], row, "prestige");
        r.outcome = parse_int_field(fields[static_cast<std::size_t>(position[6])], row, "outcome");
        validate_record(r, row);
        records.push_back(std::move(r));
    }
    return Dataset::from_records(std::move(records), provenance);
}

Dataset parse_csv_file(const std::string& path, Provenance provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset file: '" + path + "'");
    return parse_csv(in, provenance);
}

void write_csv(const Dataset& ds, std::ostream& out) {
    out << "id,race,gender,country,h_index,prestige,outcome\n";
    for (const auto& r : ds.records()) {
        out << r.id << ',' << r.race << ',' << r.gender << ',' << r.country << ','
            << format_double(r.h_index) << ',' << format_double(r.prestige) << ',' << r.outcome
            << '\n';
    }
}

std::string to_csv(const Dataset& ds) {
    std::ostringstream out;
    write_csv(ds, out);
    return out.str();
}

Summary summarize(const Dataset& ds) {
    if (ds.size() == 0) throw DomainError("summarize: empty dataset");
    Summary s;
    s.n = ds.size();
    std::vector<double> h, y;
    h.reserve(ds.size());
    y.reserve(ds.size());
    double race_sum = 0, gender_sum = 0, country_sum = 0, prestige_sum = 0;
    for (const auto& r : ds.records()) {
        ++s.outcome_counts[static_cast<std::size_t>(r.outcome - 1)];
        race_sum += r.race;
        gender_sum += r.gender;
        country_sum += r.country;
        prestige_sum += r.prestige;
        h.push_back(r.h_index);
        y.push_back(static_cast<double>(r.outcome));
    }
    const auto n = static_cast<double>(ds.size());
    s.share_race = race_sum / n;
    s.share_gender = gender_sum / n;
    s.share_country = country_sum / n;
    s.prestige_mean = prestige_sum / n;
    s.h_index = numeric_summary(h);
    s.outcome = numeric_summary(y);
    return s;
}

nlohmann::json Summary::to_json() const {
    return {{"n", n},
            {"outcome_counts", {outcome_counts[0], outcome_counts[1], outcome_counts[2]}},
            {"share_minority", share_race},
            {"share_female", share_gender},
            {"share_global_south", share_country},
            {"prestige_mean", prestige_mean},
            {"h_index", numeric_summary_json(h_index)},
            {"outcome", numeric_summary_json(outcome)}};
}

std::string Summary::to_text() const {
    std::ostringstream out;
    char buf[160];
    const auto n_d = static_cast<double>(n);
    out << "Descriptive Statistics (N=" << n << ")\n";
    auto line = [&](const char* a, const char* b, const std::string& v) {
        std::snprintf(buf, sizeof(buf), "  %-26s %-16s %s\n", a, b, v.c_str());
        out << buf;
    };
    auto pct = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * x);
        return std::string(buf);
    };
    auto count_pct = [&](std::size_t c) {
        std::snprintf(buf, sizeof(buf), "%zu (%.1f%%)", c, 100.0 * static_cast<double>(c) / n_d);
        return std::string(buf);
    };
    auto mean_sd = [&](const NumericSummary& v) {
        std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", v.mean, v.sd);
        return std::string(buf);
    };
    auto med_iqr = [&](const NumericSummary& v) {
        std::snprintf(buf, sizeof(buf), "%.1f (%.1f)", v.median, v.iqr);
        return std::string(buf);
    };
    auto range = [&](const NumericSummary& v) {
        std::snprintf(buf, sizeof(buf), "%g-%g", v.min, v.max);
        return std::string(buf);
    };
    line("Acceptance Ranking", "Rank 3", count_pct(outcome_counts[2]));
    line("", "Rank 2", count_pct(outcome_counts[1]));
    line("", "Rank 1", count_pct(outcome_counts[0]));
    line("Author Race", "Majority", pct(1.0 - share_race));
    line("", "Minority", pct(share_race));
    line("Author Gender", "Male", pct(1.0 - share_gender));
    line("", "Female", pct(share_gender));
    line("Country of Affiliation", "Global North", pct(1.0 - share_country));
    line("", "Global South", pct(share_country));
    line("Max h-index", "Mean (SD)", mean_sd(h_index));
    line("", "Median (IQR)", med_iqr(h_index));
    line("", "Range", range(h_index));
    line("Acceptance Ranking", "Mean (SD)", mean_sd(outcome));
    line("", "Median (IQR)", med_iqr(outcome));
    line("", "Range", range(outcome));
    return out.str();
}

}  // namespace causal_audit
