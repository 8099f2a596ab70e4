#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "naggs/problems.hpp"

namespace naggs {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ConfigError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                          ": non-numeric cell '" + std::string(cell) + "'");
    }
    return value;
}

std::size_t resolve_column(int c, std::size_t width, std::size_t line_no) {
    const long idx = c < 0 ? static_cast<long>(width) + c : c;
    if (idx < 0 || idx >= static_cast<long>(width)) {
        throw ConfigError("line " + std::to_string(line_no) + ": column index " + std::to_string(c) +
                          " out of range for " + std::to_string(width) + " columns");
    }
    return static_cast<std::size_t>(idx);
}

}  // namespace

LogisticRegressionProblem parse_csv_dataset(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header_pending = schema.has_header;
    std::vector<std::vector<double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (width == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(width) + " columns, found " +
                              std::to_string(cells.size()));
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) row[c] = parse_cell(cells[c], line_no, c);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("dataset has no data rows");
    if (width < 2) throw ConfigError("dataset needs a label column and at least one feature");

    const std::size_t label_col = resolve_column(schema.label_column, width, line_no);
    std::vector<std::size_t> feat_cols;
    if (schema.feature_columns.empty()) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c != label_col) feat_cols.push_back(c);
        }
    } else {
        for (int c : schema.feature_columns) {
            const std::size_t r = resolve_column(c, width, line_no);
            if (r == label_col) throw ConfigError("label column listed as a feature");
            feat_cols.push_back(r);
        }
    }

    LogisticRegressionProblem p;
    p.l2_reg = schema.l2_reg;
    p.includes_bias = schema.includes_bias;
    p.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feat_cols.size()));
    p.labels.resize(static_cast<Eigen::Index>(rows.size()));

    std::set<double> raw_labels;
    for (const auto& row : rows) raw_labels.insert(row[label_col]);
    const bool zero_one = std::all_of(raw_labels.begin(), raw_labels.end(),
                                      [](double v) { return v == 0.0 || v == 1.0; });
    const bool plus_minus = std::all_of(raw_labels.begin(), raw_labels.end(),
                                        [](double v) { return v == -1.0 || v == 1.0; });
    if (!schema.positive_class && !zero_one && !plus_minus) {
        throw ConfigError("labels are not binary; set positive_class for a one-vs-rest reduction");
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double raw = rows[i][label_col];
        double y = 0.0;
        if (schema.positive_class) {
            y = raw == *schema.positive_class ? 1.0 : 0.0;
        } else {
            y = raw == 1.0 ? 1.0 : 0.0;
        }
        p.labels[r] = y;
        for (std::size_t j = 0; j < feat_cols.size(); ++j) {
            p.features(r, static_cast<Eigen::Index>(j)) = rows[i][feat_cols[j]];
        }
    }
    if (schema.standardize) standardize(p.features);
    return p;
}

LogisticRegressionProblem load_csv_dataset(const std::string& path, const CsvSchema& schema) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open dataset '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv_dataset(ss.str(), schema);
}

}  // namespace naggs
