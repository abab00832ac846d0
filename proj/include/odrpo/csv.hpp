#pragma once

#include <string>
#include <utility>
#include <vector>

#include "odrpo/errors.hpp"

namespace odrpo::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Comma-separated, '.' decimal, LF line endings, mandatory header row.
// Lines starting with '#' are comments and are skipped.
Table read_file(const std::string& path);

// Shortest round-trip formatting; "nan"/"inf" for non-finite values.
std::string format_double(double value);

class Writer {
  public:
    explicit Writer(const std::string& path);
    ~Writer();

    void comment(const std::string& text);            // "# text" line
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& fields);

  private:
    struct Impl;
    Impl* impl_;
};

// One reward group per row under the header `group_id,r_1,...,r_G`.
struct RewardGroupRow {
    std::string group_id;
    std::vector<double> rewards;
};

std::vector<RewardGroupRow> read_reward_groups(const std::string& path);

double parse_double(const std::string& text, const std::string& context);
int parse_int(const std::string& text, const std::string& context);

}  // namespace odrpo::csv
