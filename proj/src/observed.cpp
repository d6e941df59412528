#include "longnbt/observed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace longnbt {

double ObservedMatrix::sampling_probability() const { return d / std::sqrt(double(m) * double(n)); }

double ObservedMatrix::scale() const { return std::sqrt(double(m) * double(n)) / d; }

ObservedMatrix ingest(index_t n, index_t m, double d, std::vector<RawEntry> raw_entries,
                      bool pre_scaled) {
    if (n < 2) throw invalid_input("ingest: n must be >= 2");
    if (m < n) throw invalid_input("ingest: m must be >= n");
    if (!(d > 1.0)) throw invalid_input("ingest: d must be > 1");
    double root_mn = std::sqrt(double(m) * double(n));
    if (d >= root_mn)
        throw invalid_input("ingest: d >= sqrt(mn) gives sampling probability p >= 1");

    for (const RawEntry& e : raw_entries) {
        if (e.x < 0 || e.x >= n || e.y < 0 || e.y >= m)
            throw invalid_input("ingest: index out of range at (" + std::to_string(e.x) + "," +
                                std::to_string(e.y) + ")");
        if (!std::isfinite(e.value))
            throw invalid_input("ingest: non-finite value at (" + std::to_string(e.x) + "," +
                                std::to_string(e.y) + ")");
    }
    std::sort(raw_entries.begin(), raw_entries.end(), [](const RawEntry& a, const RawEntry& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    for (std::size_t i = 1; i < raw_entries.size(); ++i) {
        if (raw_entries[i].x == raw_entries[i - 1].x && raw_entries[i].y == raw_entries[i - 1].y)
            throw invalid_input("ingest: duplicate entry at (" + std::to_string(raw_entries[i].x) +
                                "," + std::to_string(raw_entries[i].y) + ")");
    }

    ObservedMatrix obs;
    obs.n = n;
    obs.m = m;
    obs.d = d;
    obs.entries.reserve(raw_entries.size());
    double scale = pre_scaled ? 1.0 : root_mn / d;
    for (const RawEntry& e : raw_entries) obs.entries.push_back({e.x, e.y, scale * e.value});
    return obs;
}

ObservedMatrix read_observed(std::istream& in) {
    std::string line;
    auto next_content_line = [&](std::string& out_line) -> bool {
        while (std::getline(in, out_line)) {
            std::size_t hash = out_line.find('#');
            if (hash != std::string::npos) out_line.erase(hash);
            if (out_line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
        }
        return false;
    };

    if (!next_content_line(line)) throw invalid_input("observed file: missing header");
    index_t n, m;
    double d;
    {
        std::istringstream hs(line);
        if (!(hs >> n >> m >> d)) throw invalid_input("observed file: malformed header: " + line);
    }
    std::vector<RawEntry> raw;
    while (next_content_line(line)) {
        RawEntry e;
        std::istringstream es(line);
        if (!(es >> e.x >> e.y >> e.value))
            throw invalid_input("observed file: malformed entry line: " + line);
        raw.push_back(e);
    }
    return ingest(n, m, d, std::move(raw), /*pre_scaled=*/false);
}

ObservedMatrix read_observed_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open observed file: " + path);
    return read_observed(in);
}

void write_observed(std::ostream& out, const ObservedMatrix& obs) {
    out << std::setprecision(17);
    out << obs.n << ' ' << obs.m << ' ' << obs.d << '\n';
    double inv_scale = 1.0 / obs.scale();
    for (const Entry& e : obs.entries)
        out << e.x << ' ' << e.y << ' ' << e.a * inv_scale << '\n';
}

void write_observed_file(const std::string& path, const ObservedMatrix& obs) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot open for writing: " + path);
    write_observed(out, obs);
}

}  // namespace longnbt
