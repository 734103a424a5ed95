#include "sol/sim/metrics.hpp"

#include <fstream>
#include <sstream>

#include "sol/errors.hpp"

namespace sol::sim {

uint64_t MetricsSample::known_total() const {
    // Columns are cumulative in depth; the widest one is the total.
    return known_by_depth.empty() ? 0 : known_by_depth.back();
}

std::string MetricsLog::csv_header() const {
    std::string h = "time_s,direct_total";
    for (uint32_t d = 2; d <= maxdegree; d++) h += ",known_d" + std::to_string(d);
    h += ",handshake_bytes,sync_query_bytes,sync_response_bytes,total_bytes";
    h += ",sign_ops,verify_ops,repo_bytes_mean,repo_bytes_max";
    h += ",aborted_transfers,buffer_rejections";
    return h;
}

std::string MetricsLog::to_csv() const {
    std::ostringstream out;
    out << csv_header() << "\n";
    for (const MetricsSample& s : samples) {
        out << s.time_s << ',' << s.direct_total;
        for (uint64_t v : s.known_by_depth) out << ',' << v;
        out << ',' << s.handshake_bytes << ',' << s.sync_query_bytes << ','
            << s.sync_response_bytes << ',' << s.total_bytes();
        out << ',' << s.sign_ops << ',' << s.verify_ops;
        // Mean with two decimals via integer math, so output is
        // reproducible to the byte.
        uint64_t scaled = num_nodes ? s.repo_bytes_total * 100 / num_nodes : 0;
        out << ',' << scaled / 100 << '.' << (scaled % 100 < 10 ? "0" : "") << scaled % 100;
        out << ',' << s.repo_bytes_max << ',' << s.aborted_transfers << ','
            << s.buffer_rejections << "\n";
    }
    return out.str();
}

void export_metrics(const MetricsLog& log, const std::filesystem::path& path) {
    std::error_code ec;
    std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write metrics CSV: " + path.string());
    out << log.to_csv();
    if (!out) throw IoError("short write to metrics CSV: " + path.string());
}

}  // namespace sol::sim
