#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace labelaudit {

struct ScoreEntry {
    uint64_t id = 0;
    double score = 0.0;
    std::size_t rank = 0; // 0 = most suspicious
};

/// Per-example scores of one method plus the induced ranking. Lower score
/// means more suspicious everywhere in this toolkit; ranks are ascending
/// score with ties broken by ascending id.
struct ScoreTable {
    std::string method;
    std::vector<ScoreEntry> entries; // sorted by rank

    static ScoreTable from_scores(std::string method,
                                  const std::vector<uint64_t>& ids,
                                  const std::vector<double>& scores);

    std::vector<uint64_t> ranking() const;
};

void save_score_tables(const std::vector<ScoreTable>& tables,
                       const std::filesystem::path& path);
std::vector<ScoreTable> load_score_tables(const std::filesystem::path& path);

} // namespace labelaudit
