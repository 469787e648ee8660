#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dragan/errors.hpp"
#include "dragan/vocab.hpp"

namespace dragan {

// One (query, title, category) record; category stored by name until bound
// to a label map.
struct RawExample {
    std::string query;
    std::string title;
    std::string category;
};

struct LabelMap {
    std::vector<std::string> names;  // id -> name
    std::unordered_map<std::string, int> ids;

    static LabelMap from_examples(const std::vector<RawExample>& examples) {
        LabelMap m;
        std::vector<std::string> sorted;
        for (const auto& e : examples) {
            if (!m.ids.count(e.category)) {
                m.ids[e.category] = 0;  // placeholder
                sorted.push_back(e.category);
            }
        }
        std::sort(sorted.begin(), sorted.end());
        m.names = sorted;
        m.ids.clear();
        for (int i = 0; i < static_cast<int>(m.names.size()); ++i) m.ids[m.names[i]] = i;
        return m;
    }

    int id_of(const std::string& name) const {
        auto it = ids.find(name);
        if (it == ids.end()) return -1;
        return it->second;
    }

    int size() const { return static_cast<int>(names.size()); }
};

// Tokenized training triple: x, source of z, and y.
struct Example {
    TokenSeq query;
    TokenSeq title;
    int category = -1;
};

// One record per line, three tab-separated fields query<TAB>title<TAB>category.
inline std::vector<RawExample> load_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<RawExample> out;
    std::vector<std::string> bad_lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            bad_lines.push_back("line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
            continue;
        }
        RawExample e{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)};
        if (e.query.empty() || e.title.empty() || e.category.empty()) {
            const char* field = e.query.empty() ? "query" : (e.title.empty() ? "title" : "category");
            bad_lines.push_back("line " + std::to_string(lineno) + ": missing \"" + field + "\"");
            continue;
        }
        out.push_back(std::move(e));
    }
    if (!bad_lines.empty()) {
        std::string msg = path + ": " + std::to_string(bad_lines.size()) + " malformed line(s)";
        for (const auto& b : bad_lines) msg += "\n  " + b;
        throw DataError(msg);
    }
    return out;
}

inline void save_tsv(const std::string& path, const std::vector<RawExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& e : examples) out << e.query << '\t' << e.title << '\t' << e.category << '\n';
}

// Binds raw records to a label map and tokenizes. Unknown categories are an
// ingestion error listing the offending lines. Queries and titles longer
// than the caps are truncated.
inline std::vector<Example> encode_examples(const std::vector<RawExample>& raw, const Vocab& vocab,
                                            const LabelMap& labels, int q_max, int s_max) {
    std::vector<Example> out;
    out.reserve(raw.size());
    std::vector<std::string> bad;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const int cat = labels.id_of(raw[i].category);
        if (cat < 0) {
            bad.push_back("line " + std::to_string(i + 1) + ": unknown category \"" + raw[i].category + "\"");
            continue;
        }
        Example e;
        e.query = vocab.encode(raw[i].query);
        e.title = vocab.encode(raw[i].title);
        if (static_cast<int>(e.query.size()) > q_max) e.query.resize(q_max);
        if (static_cast<int>(e.title.size()) > s_max) e.title.resize(s_max);
        e.category = cat;
        out.push_back(std::move(e));
    }
    if (!bad.empty()) {
        std::string msg = std::to_string(bad.size()) + " bad record(s)";
        for (const auto& b : bad) msg += "\n  " + b;
        throw DataError(msg);
    }
    return out;
}

}  // namespace dragan
