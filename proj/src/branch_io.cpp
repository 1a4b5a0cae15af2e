#include "bcfg/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bcfg {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// FNV-1a over the canonical rendering of every settings field; stable
// across platforms for identical settings.
void fnv(std::uint64_t& h, const std::string& piece) {
    for (unsigned char c : piece) {
        h ^= c;
        h *= 1099511628211ULL;
    }
}

PointClass parse_class(const std::string& token, int line_no) {
    if (token == "local_minimum") return PointClass::local_minimum;
    if (token == "saddle") return PointClass::saddle;
    if (token == "degenerate") return PointClass::degenerate;
    throw ParseError("line " + std::to_string(line_no) +
                     ": unknown classification '" + token + "'");
}

EventKind parse_event_kind(const std::string& token) {
    for (EventKind k :
         {EventKind::turning_point, EventKind::start_bifurcation,
          EventKind::collision_stop, EventKind::s_bound, EventKind::max_steps,
          EventKind::loop_closed, EventKind::newton_failure})
        if (token == to_string(k)) return k;
    throw ParseError("unknown event kind '" + token + "'");
}

double parse_double(const std::string& token, int line_no) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         token + "'");
    return v;
}

long parse_int(const std::string& token, int line_no) {
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": bad integer '" +
                         token + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string settings_hash(const ContinuationSettings& s) {
    std::uint64_t h = 1469598103934665603ULL;
    fnv(h, fmt17(s.delta));
    fnv(h, fmt17(s.newton_tol));
    fnv(h, std::to_string(s.max_newton_iters));
    fnv(h, std::to_string(s.max_steps));
    fnv(h, fmt17(s.s_min));
    fnv(h, fmt17(s.s_max));
    fnv(h, fmt17(s.collision_tol));
    fnv(h, fmt17(s.epsilon_switch));
    fnv(h, fmt17(s.delta_s_switch));
    fnv(h, s.probe_turning_points ? "1" : "0");
    fnv(h, std::to_string(s.seed));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void write_branch_csv(std::ostream& out, const BranchRecord& record) {
    const int nd = record.dimension *
                   static_cast<int>(record.masses.size());
    out << "# bcfg-branch v1\n";
    out << "# scenario: " << record.scenario << "\n";
    out << "# s_star: " << fmt17(record.s_star) << "\n";
    out << "# direction: " << record.direction << "\n";
    out << "# dimension: " << record.dimension << "\n";
    out << "# masses:";
    for (double mv : record.masses) out << " " << fmt17(mv);
    out << "\n";
    out << "# settings: " << record.settings_hash << "\n";
    out << "# events:";
    for (const BranchEvent& e : record.events)
        out << " " << e.index << ":" << to_string(e.kind);
    out << "\n";

    out << "step,s,arclength,U,residual,iminus,izero,iplus,class";
    for (int c = 0; c < nd; ++c) out << ",q" << c;
    out << "\n";

    for (std::size_t i = 0; i < record.points.size(); ++i) {
        const BranchPoint& p = record.points[i];
        out << i << "," << fmt17(p.s) << "," << fmt17(p.arclength) << ","
            << fmt17(p.potential) << "," << fmt17(p.residual_norm) << ","
            << p.inertia.minus << "," << p.inertia.zero << "," << p.inertia.plus
            << "," << to_string(p.classification);
        for (int c = 0; c < nd; ++c) out << "," << fmt17(p.q.coords()[c]);
        out << "\n";
    }
}

BranchRecord read_branch_csv(std::istream& in) {
    BranchRecord rec;
    std::string line;
    int line_no = 0;
    bool saw_magic = false, saw_columns = false;
    int nd = 0;

    auto header_value = [](const std::string& l, const std::string& key,
                           std::string& out_value) {
        const std::string prefix = "# " + key + ":";
        if (l.rfind(prefix, 0) != 0) return false;
        out_value = l.substr(prefix.size());
        if (!out_value.empty() && out_value.front() == ' ')
            out_value.erase(0, 1);
        return true;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (line.rfind("#", 0) == 0) {
            std::string value;
            if (line.rfind("# bcfg-branch", 0) == 0) {
                if (line != "# bcfg-branch v1")
                    throw ParseError("line 1: unsupported branch format '" +
                                     line + "'");
                saw_magic = true;
            } else if (header_value(line, "scenario", value)) {
                rec.scenario = value;
            } else if (header_value(line, "s_star", value)) {
                rec.s_star = parse_double(value, line_no);
            } else if (header_value(line, "direction", value)) {
                rec.direction = value;
            } else if (header_value(line, "dimension", value)) {
                rec.dimension = static_cast<int>(parse_int(value, line_no));
            } else if (header_value(line, "masses", value)) {
                std::istringstream ms(value);
                std::string tok;
                rec.masses.clear();
                while (ms >> tok) rec.masses.push_back(parse_double(tok, line_no));
            } else if (header_value(line, "settings", value)) {
                rec.settings_hash = value;
            } else if (header_value(line, "events", value)) {
                std::istringstream es(value);
                std::string tok;
                while (es >> tok) {
                    const auto colon = tok.find(':');
                    if (colon == std::string::npos)
                        throw ParseError("line " + std::to_string(line_no) +
                                         ": bad event '" + tok + "'");
                    BranchEvent e;
                    e.index = static_cast<int>(
                        parse_int(tok.substr(0, colon), line_no));
                    e.kind = parse_event_kind(tok.substr(colon + 1));
                    rec.events.push_back(e);
                }
            } else {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unknown header line '" + line + "'");
            }
            continue;
        }

        if (!saw_columns) {
            if (line.rfind("step,s,arclength,U,residual,iminus,izero,iplus,class",
                           0) != 0)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected the column header, got '" + line +
                                 "'");
            if (rec.masses.empty() || rec.dimension == 0)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": masses/dimension header must precede data");
            nd = rec.dimension * static_cast<int>(rec.masses.size());
            const auto cols = split(line, ',');
            if (static_cast<int>(cols.size()) != 9 + nd)
                throw ParseError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(9 + nd) + " columns, got " +
                                 std::to_string(cols.size()));
            saw_columns = true;
            continue;
        }

        const auto cols = split(line, ',');
        if (static_cast<int>(cols.size()) != 9 + nd)
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(9 + nd) + " fields, got " +
                             std::to_string(cols.size()));
        const long step = parse_int(cols[0], line_no);
        if (step != static_cast<long>(rec.points.size()))
            throw ParseError("line " + std::to_string(line_no) +
                             ": non-consecutive step index " + cols[0]);

        Eigen::VectorXd flat(nd);
        for (int c = 0; c < nd; ++c) flat[c] = parse_double(cols[9 + c], line_no);
        const int n = static_cast<int>(rec.masses.size());
        BranchPoint p{Configuration(n, rec.dimension, flat),
                      parse_double(cols[1], line_no)};
        p.arclength = parse_double(cols[2], line_no);
        p.potential = parse_double(cols[3], line_no);
        p.residual_norm = parse_double(cols[4], line_no);
        p.inertia.minus = static_cast<int>(parse_int(cols[5], line_no));
        p.inertia.zero = static_cast<int>(parse_int(cols[6], line_no));
        p.inertia.plus = static_cast<int>(parse_int(cols[7], line_no));
        p.classification = parse_class(cols[8], line_no);
        rec.points.push_back(std::move(p));
    }

    if (!saw_magic) throw ParseError("missing '# bcfg-branch v1' header");
    if (!saw_columns) throw ParseError("missing column header row");
    return rec;
}

BranchRecord read_branch_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return read_branch_csv(in);
}

}  // namespace bcfg
