#include "labelaudit/score_table.hpp"
#include "labelaudit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace labelaudit {

ScoreTable ScoreTable::from_scores(std::string method,
                                   const std::vector<uint64_t>& ids,
                                   const std::vector<double>& scores) {
    if (ids.size() != scores.size())
        throw ArgumentError("score/id count mismatch");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return ids[a] < ids[b];
    });
    ScoreTable t;
    t.method = std::move(method);
    t.entries.reserve(ids.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        t.entries.push_back({ids[order[r]], scores[order[r]], r});
    return t;
}

std::vector<uint64_t> ScoreTable::ranking() const {
    std::vector<uint64_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
}

void save_score_tables(const std::vector<ScoreTable>& tables,
                       const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "id,method,score,rank\n";
    char buf[64];
    for (const auto& t : tables) {
        for (const auto& e : t.entries) {
            auto res = std::to_chars(buf, buf + sizeof(buf), e.score,
                                     std::chars_format::general, 17);
            os << e.id << ',' << t.method << ','
               << std::string_view(buf, res.ptr - buf) << ',' << e.rank
               << "\n";
        }
    }
}

std::vector<ScoreTable> load_score_tables(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "id,method,score,rank")
        throw FormatError("bad score table header in " + path.string());
    std::vector<ScoreTable> tables;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id_s, method, score_s, rank_s;
        if (!std::getline(ss, id_s, ',') || !std::getline(ss, method, ',') ||
            !std::getline(ss, score_s, ',') || !std::getline(ss, rank_s, ','))
            throw FormatError("bad score table row in " + path.string());
        auto it = std::find_if(tables.begin(), tables.end(),
                               [&](const auto& t) { return t.method == method; });
        if (it == tables.end()) {
            tables.push_back({method, {}});
            it = tables.end() - 1;
        }
        try {
            it->entries.push_back(
                {std::stoull(id_s), std::stod(score_s), std::stoull(rank_s)});
        } catch (const std::exception&) {
            throw FormatError("unparseable score table row in " +
                              path.string());
        }
    }
    for (auto& t : tables)
        std::sort(t.entries.begin(), t.entries.end(),
                  [](const auto& a, const auto& b) { return a.rank < b.rank; });
    return tables;
}

} // namespace labelaudit
