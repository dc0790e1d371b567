#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal_audit/errors.hpp"

namespace causal_audit {

// One paper. Binary codings: race 1 = minority, gender 1 = female,
// country 1 = Global South; outcome 3 = highly accepted .. 1 = rejected.
struct PaperRecord {
    std::string id;
    int race = 0;
    int gender = 0;
    int country = 0;
    double h_index = 0.0;   // quality proxy, >= 0
    double prestige = 0.0;  // institutional prestige, in [0, 1]
    int outcome = 1;        // acceptance rank in {1, 2, 3}

    bool operator==(const PaperRecord&) const = default;
};

// Sensitive attributes usable as a treatment.
enum class Attribute { race, gender, country };

// Any column usable as a covariate.
enum class Column { h_index, prestige, race, gender, country };

const char* attribute_name(Attribute a);
Attribute attribute_from_name(const std::string& name);
const char* column_name(Column c);
Column column_from_name(const std::string& name);
Column column_of(Attribute a);

// Group label in the coding direction fixed above (value in {0, 1}).
std::string attribute_level_label(Attribute a, int value);

int attribute_value(const PaperRecord& r, Attribute a);
double column_value(const PaperRecord& r, Column c);

// Role assignment for one causal question: which attribute is the treatment
// and which columns enter the propensity / adjustment model.
struct TreatmentSpec {
    Attribute treatment = Attribute::race;
    std::vector<Column> covariates;  // ordered; outcome is always `outcome`

    // Throws ConfigError if the treatment appears among the covariates.
    void validate() const;

    nlohmann::json to_json() const;
    static TreatmentSpec from_json(const nlohmann::json& j);
};

enum class Provenance { synthetic, ingested };

class Dataset {
public:
    Dataset() = default;

    // Validates record invariants; `enforce_unique_ids` is relaxed only for
    // bootstrap resamples, where repeated units are legitimate.
    static Dataset from_records(std::vector<PaperRecord> records, Provenance provenance,
                                bool enforce_unique_ids = true);

    const std::vector<PaperRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    Provenance provenance() const { return provenance_; }

    std::vector<int> treatment_vector(const TreatmentSpec& spec) const;
    std::vector<double> outcome_vector() const;
    std::vector<double> column_vector(Column c) const;
    // One vector per covariate, in spec order.
    std::vector<std::vector<double>> covariate_columns(const TreatmentSpec& spec) const;

    // Throws DomainError unless both treatment groups are non-empty.
    void require_both_groups(const TreatmentSpec& spec) const;

private:
    std::vector<PaperRecord> records_;
    Provenance provenance_ = Provenance::ingested;
};

// Strict CSV ingestion. Header required; canonical columns
// id,race,gender,country,h_index,prestige,outcome in any order; LF or CRLF.
Dataset parse_csv(std::istream& in, Provenance provenance = Provenance::ingested);
Dataset parse_csv_file(const std::string& path, Provenance provenance = Provenance::ingested);

// Canonical column order, shortest-round-trip numeric formatting. parse_csv
// of the output reproduces the dataset bit-exactly.
void write_csv(const Dataset& ds, std::ostream& out);
std::string to_csv(const Dataset& ds);

struct NumericSummary {
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Descriptive statistics in the layout of the standard corpus table.
struct Summary {
    std::size_t n = 0;
    std::array<std::size_t, 3> outcome_counts{};  // ranks 1..3
    double share_race = 0.0;                      // minority share
    double share_gender = 0.0;                    // female share
    double share_country = 0.0;                   // Global South share
    double prestige_mean = 0.0;
    NumericSummary h_index;
    NumericSummary outcome;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

Summary summarize(const Dataset& ds);

}  // namespace causal_audit
