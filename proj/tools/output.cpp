#include "output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "naggs/common.hpp"

namespace naggs::cli {

void Table::add_row(std::vector<nlohmann::json> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error("table " + stem + ": row width " + std::to_string(row.size()) +
                               " does not match " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

Table& OutputBundle::table(std::string stem, std::vector<std::string> columns) {
    tables.push_back(Table{std::move(stem), std::move(columns), {}});
    return tables.back();
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
    switch (v.type()) {
        case nlohmann::json::value_t::null:
            return "";
        case nlohmann::json::value_t::boolean:
            return v.get<bool>() ? "true" : "false";
        case nlohmann::json::value_t::number_integer:
            return std::to_string(v.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned:
            return std::to_string(v.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float:
            return format_double(v.get<double>());
        case nlohmann::json::value_t::string: {
            const auto& s = v.get_ref<const std::string&>();
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string quoted = "\"";
            for (char c : s) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            return quoted + "\"";
        }
        default:
            return v.dump();
    }
}

// JSON has no representation for non-finite numbers.
nlohmann::json json_cell(const nlohmann::json& v) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) return format_double(v.get<double>());
    return v;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
        os << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = json_cell(row[c]);
        rows.push_back(std::move(obj));
    }
    return {{"columns", t.columns}, {"rows", std::move(rows)}};
}

std::vector<std::filesystem::path> write_all(const OutputBundle& bundle,
                                             const std::filesystem::path& dir, OutputFormat format,
                                             const nlohmann::json& meta) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text, nlohmann::json file_meta) {
        const auto path = dir / name;
        write_text(path, text);
        file_meta["file"] = name;
        write_text(dir / (name + ".meta.json"), file_meta.dump(2) + "\n");
        written.push_back(path);
    };
    for (const Table& t : bundle.tables) {
        nlohmann::json m = meta;
        m["columns"] = t.columns;
        if (format == OutputFormat::csv) {
            emit(t.stem + ".csv", to_csv(t), std::move(m));
        } else {
            emit(t.stem + ".json", to_json(t).dump(2) + "\n", std::move(m));
        }
    }
    for (const auto& [name, doc] : bundle.documents) emit(name, doc.dump(2) + "\n", meta);
    return written;
}

}  // namespace naggs::cli
