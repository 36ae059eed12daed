#include "fairdec/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fairdec {

std::string to_string(Role r) {
    switch (r) {
        case Role::Sensitive: return "sensitive";
        case Role::Feature: return "feature";
        case Role::Outcome: return "outcome";
        case Role::Weight: return "weight";
    }
    return "feature";
}

std::string to_string(Kind k) {
    return k == Kind::Numeric ? "numeric" : "categorical";
}

Role role_from_string(std::string_view s) {
    if (s == "sensitive") return Role::Sensitive;
    if (s == "feature") return Role::Feature;
    if (s == "outcome") return Role::Outcome;
    if (s == "weight") return Role::Weight;
    throw ConfigError("unknown role '" + std::string(s) + "'");
}

Kind kind_from_string(std::string_view s) {
    if (s == "numeric") return Kind::Numeric;
    if (s == "categorical") return Kind::Categorical;
    throw ConfigError("unknown kind '" + std::string(s) + "'");
}

bool Dataset::has(std::string_view name) const { return col_index(name) >= 0; }

int Dataset::col_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

const Column& Dataset::col(std::string_view name) const {
    int i = col_index(name);
    if (i < 0) throw SchemaError("column '" + std::string(name) + "' not found");
    return columns[static_cast<std::size_t>(i)];
}

Column& Dataset::col(std::string_view name) {
    int i = col_index(name);
    if (i < 0) throw SchemaError("column '" + std::string(name) + "' not found");
    return columns[static_cast<std::size_t>(i)];
}

void Dataset::check_model_shape() const {
    int outcomes = 0;
    int weights = 0;
    for (const auto& c : columns) {
        if (c.size() != rows) {
            throw ShapeError("column '" + c.name + "' length differs from row count");
        }
        if (c.role == Role::Outcome) {
            ++outcomes;
            if (c.kind != Kind::Numeric) {
                throw SchemaError("outcome column '" + c.name + "' must be numeric");
            }
            for (double v : c.num) {
                if (v != 0.0 && v != 1.0) {
                    throw DataError("outcome column '" + c.name +
                                    "' must hold values in {0,1}");
                }
            }
        }
        if (c.role == Role::Weight) {
            ++weights;
            for (double v : c.num) {
                if (!(v > 0.0 && v <= 1.0)) {
                    throw DataError("weight column '" + c.name +
                                    "' must hold values in (0,1]");
                }
            }
        }
    }
    if (outcomes != 1) throw SchemaError("exactly one outcome column is required");
    if (weights > 1) throw SchemaError("at most one weight column is allowed");
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.rows = idx.size();
    out.columns.reserve(ds.columns.size());
    for (const auto& c : ds.columns) {
        Column nc;
        nc.name = c.name;
        nc.role = c.role;
        nc.kind = c.kind;
        if (c.kind == Kind::Numeric) {
            nc.num.reserve(idx.size());
            for (std::size_t i : idx) nc.num.push_back(c.num.at(i));
        } else {
            nc.cat.reserve(idx.size());
            for (std::size_t i : idx) nc.cat.push_back(c.cat.at(i));
        }
        out.columns.push_back(std::move(nc));
    }
    return out;
}

Schema Schema::from_json(const nlohmann::json& j) try {
    Schema s;
    if (!j.is_object()) throw ConfigError("schema must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& v = it.value();
        s.fields.push_back({it.key(), role_from_string(v.at("role").get<std::string>()),
                            kind_from_string(v.at("kind").get<std::string>())});
    }
    return s;
} catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
}

nlohmann::json Schema::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : fields) {
        j[f.name] = {{"role", to_string(f.role)}, {"kind", to_string(f.kind)}};
    }
    return j;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset read_csv(std::istream& in, const Schema& schema) {
    std::string header;
    if (!std::getline(in, header)) {
        throw FormatError(0, "empty file, expected a header row");
    }
    const std::vector<std::string> names = split_csv_line(header);
    std::vector<int> schema_to_file(schema.fields.size(), -1);
    for (std::size_t f = 0; f < schema.fields.size(); ++f) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (names[c] == schema.fields[f].name) {
                schema_to_file[f] = static_cast<int>(c);
                break;
            }
        }
        if (schema_to_file[f] < 0) {
            throw SchemaError("declared column '" + schema.fields[f].name +
                              "' absent from CSV header");
        }
    }

    Dataset ds;
    for (const auto& f : schema.fields) {
        Column c;
        c.name = f.name;
        c.role = f.role;
        c.kind = f.kind;
        ds.columns.push_back(std::move(c));
    }

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != names.size()) {
            throw FormatError(row, "expected " + std::to_string(names.size()) +
                                       " cells, got " + std::to_string(cells.size()));
        }
        for (std::size_t f = 0; f < schema.fields.size(); ++f) {
            const std::string& cell = cells[static_cast<std::size_t>(schema_to_file[f])];
            Column& c = ds.columns[f];
            if (c.kind == Kind::Numeric) {
                if (is_missing_token(cell)) {
                    c.num.push_back(std::numeric_limits<double>::quiet_NaN());
                } else {
                    try {
                        std::size_t pos = 0;
                        double v = std::stod(cell, &pos);
                        if (pos != cell.size()) throw std::invalid_argument(cell);
                        c.num.push_back(v);
                    } catch (const std::exception&) {
                        // Unparseable numeric cells become missing markers.
                        c.num.push_back(std::numeric_limits<double>::quiet_NaN());
                    }
                }
            } else {
                c.cat.push_back(is_missing_token(cell) ? std::string() : cell);
            }
        }
    }
    ds.rows = row;
    return ds;
}

Dataset read_csv(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return read_csv(in, schema);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t i = 0; i < ds.columns.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(ds.columns[i].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t i = 0; i < ds.columns.size(); ++i) {
            if (i) out << ',';
            const Column& c = ds.columns[i];
            if (c.kind == Kind::Numeric) {
                out << format_number(c.num[r]);
            } else {
                out << csv_escape(c.cat[r]);
            }
        }
        out << '\n';
    }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_csv(ds, out);
}

Dataset impute(const Dataset& ds) {
    Dataset out = ds;
    for (auto& c : out.columns) {
        if (c.kind == Kind::Numeric) {
            std::vector<double> present;
            present.reserve(c.num.size());
            for (double v : c.num) {
                if (!std::isnan(v)) present.push_back(v);
            }
            bool any_missing = present.size() != c.num.size();
            if (!any_missing) continue;
            if (present.empty()) throw CannotImpute(c.name);
            std::sort(present.begin(), present.end());
            const std::size_t n = present.size();
            const double median = (n % 2 == 1)
                                      ? present[n / 2]
                                      : 0.5 * (present[n / 2 - 1] + present[n / 2]);
            for (double& v : c.num) {
                if (std::isnan(v)) v = median;
            }
        } else {
            for (auto& v : c.cat) {
                if (v.empty()) v = "Missing";
            }
        }
    }
    return out;
}

std::pair<Dataset, EncodingMap> one_hot(const Dataset& ds) {
    Dataset out;
    out.rows = ds.rows;
    EncodingMap map;
    for (const auto& c : ds.columns) {
        if (c.kind == Kind::Numeric) {
            out.columns.push_back(c);
            continue;
        }
        std::map<std::string, std::size_t> counts;
        for (const auto& v : c.cat) {
            if (v.empty()) {
                throw DataError("one_hot: column '" + c.name +
                                "' still has missing values; impute first");
            }
            ++counts[v];
        }
        if (counts.size() < 2) {
            map.warnings.push_back("column '" + c.name +
                                   "' has a single level and was dropped");
            continue;
        }
        // Reference = most frequent level, ties resolved lexicographically
        // (std::map iteration order already gives the smallest key first).
        std::string reference;
        std::size_t best = 0;
        for (const auto& [level, n] : counts) {
            if (n > best) {
                best = n;
                reference = level;
            }
        }
        EncodingMap::Entry entry;
        entry.column = c.name;
        entry.reference = reference;
        for (const auto& [level, n] : counts) {
            (void)n;
            if (level == reference) continue;
            entry.dummy_levels.push_back(level);
            Column dummy;
            dummy.name = c.name + "_" + level;
            dummy.role = c.role;
            dummy.kind = Kind::Numeric;
            dummy.num.reserve(ds.rows);
            for (const auto& v : c.cat) dummy.num.push_back(v == level ? 1.0 : 0.0);
            out.columns.push_back(std::move(dummy));
        }
        map.entries.push_back(std::move(entry));
    }
    return {std::move(out), std::move(map)};
}

std::pair<Dataset, std::vector<ColumnStats>> standardize(
    const Dataset& ds, const std::vector<std::size_t>& fit_rows) {
    if (fit_rows.size() < 2) {
        throw InsufficientData("standardize: need at least two fit rows");
    }
    Dataset out = ds;
    std::vector<ColumnStats> stats;
    for (auto& c : out.columns) {
        if (c.kind != Kind::Numeric || c.role != Role::Feature) continue;
        double mean = 0.0;
        for (std::size_t i : fit_rows) mean += c.num.at(i);
        mean /= static_cast<double>(fit_rows.size());
        double ss = 0.0;
        for (std::size_t i : fit_rows) {
            const double d = c.num.at(i) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(fit_rows.size() - 1));
        if (!(sd > 0.0)) {
            throw DegenerateVariance("standardize: column '" + c.name +
                                     "' is constant on the fit rows");
        }
        for (double& v : c.num) v = (v - mean) / sd;
        stats.push_back({c.name, mean, sd});
    }
    return {std::move(out), std::move(stats)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double train_fraction, RandomStream stream) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train_fraction must lie in (0,1)");
    }
    std::vector<std::size_t> perm(rows);
    for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
    Rng rng(stream);
    for (std::size_t i = rows; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(rows)));
    if (rows == 1) n_train = 1;  // single row goes to train
    std::vector<std::size_t> train(perm.begin(), perm.begin() + n_train);
    std::vector<std::size_t> test(perm.begin() + n_train, perm.end());
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  RandomStream stream) {
    auto [tr, te] = split_indices(ds.rows, train_fraction, stream);
    return {take_rows(ds, tr), take_rows(ds, te)};
}

}  // namespace fairdec
