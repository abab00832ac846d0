#include "odrpo/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace odrpo::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file '" + path + "'");
    Table table;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << path << ":" << line_number << ": expected " << table.header.size()
                << " fields, found " << fields.size();
            throw ValidationError(msg.str());
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty())
        throw ValidationError(path + ": missing header row");
    return table;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // plus and minus zero print alike
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

struct Writer::Impl {
    std::ofstream out;
};

Writer::Writer(const std::string& path) : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw ValidationError("cannot open output file '" + path + "'");
    }
}

Writer::~Writer() { delete impl_; }

void Writer::comment(const std::string& text) { impl_->out << "# " << text << "\n"; }

void Writer::header(const std::vector<std::string>& columns) { row(columns); }

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << fields[i];
    }
    impl_->out << '\n';
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end)
        throw ValidationError(context + ": cannot parse number '" + text + "'");
    return value;
}

int parse_int(const std::string& text, const std::string& context) {
    int value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end)
        throw ValidationError(context + ": cannot parse integer '" + text + "'");
    return value;
}

std::vector<RewardGroupRow> read_reward_groups(const std::string& path) {
    const Table table = read_file(path);
    if (table.header.empty() || table.header[0] != "group_id")
        throw ValidationError(path + ": header must start with 'group_id,r_1,...,r_G'");
    if (table.header.size() < 3)
        throw ValidationError(path + ": header needs at least columns r_1 and r_2 (G >= 2)");
    for (std::size_t i = 1; i < table.header.size(); ++i) {
        const std::string expected = "r_" + std::to_string(i);
        if (table.header[i] != expected)
            throw ValidationError(path + ": header column " + std::to_string(i + 1) +
                                  " must be '" + expected + "'");
    }
    std::vector<RewardGroupRow> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        RewardGroupRow row;
        row.group_id = table.rows[r][0];
        for (std::size_t i = 1; i < table.rows[r].size(); ++i)
            row.rewards.push_back(
                parse_double(table.rows[r][i], path + " row " + std::to_string(r + 1)));
        out.push_back(std::move(row));
    }
    if (out.empty()) throw ValidationError(path + ": no reward groups found");
    return out;
}

}  // namespace odrpo::csv
