#include "elixir/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "elixir/errors.hpp"

namespace elixir {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& token, std::size_t lineno) {
    T value{};
    const auto res =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw ParseError("bad number '" + token + "' at line " +
                         std::to_string(lineno));
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value))
            throw ParseError("non-finite number at line " + std::to_string(lineno));
    }
    return value;
}

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                           : eol - pos);
        ++lineno;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        Line line{lineno, {}};
        std::istringstream ss{std::string(raw)};
        std::string tok;
        while (ss >> tok) {
            if (tok[0] == '#') break;
            line.tokens.push_back(tok);
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace

std::string serialize_scenario(const ScenarioConfig& sc) {
    std::ostringstream out;
    out << "scenario " << sc.name << '\n';
    out << "seed " << sc.seed << '\n';
    out << "image_size " << sc.image_size << '\n';
    out << "steps_per_phase " << sc.steps_per_phase << '\n';
    out << "estimator_noise_sigma " << fmt(sc.estimator_noise_sigma) << '\n';
    for (std::size_t p = 0; p < sc.phases.size(); ++p) {
        out << "phase " << sc.phases[p].name << " {\n";
        out << "  ambient " << fmt(sc.phases[p].ambient) << '\n';
        for (std::size_t a = 0; a < sc.au_profiles.size(); ++a)
            out << "  objects " << sc.au_profiles[a].name << ' '
                << sc.object_counts[p][a] << '\n';
        out << "}\n";
    }
    for (const auto& au : sc.au_profiles) {
        out << "au " << au.name << " {\n";
        out << "  width " << fmt(au.width) << '\n';
        out << "  priority " << fmt(au.priority) << '\n';
        out << "  dimension_weights";
        for (const double w : au.dimension_weights) out << ' ' << fmt(w);
        out << '\n';
        for (const auto& [phase, opt] : au.optimum)
            out << "  optimum " << phase << ' ' << to_string(opt) << '\n';
        out << "}\n";
    }
    return out.str();
}

ScenarioConfig parse_scenario(std::string_view text) {
    const auto lines = tokenize(text);
    if (lines.empty()) throw ParseError("empty scenario");

    ScenarioConfig sc;
    sc.phases.clear();
    // raw per-phase object counts by AU name; resolved once the AU list is known
    std::vector<std::map<std::string, std::int64_t>> raw_counts;
    std::set<std::string> seen_scalars;

    std::size_t i = 0;
    auto expect_scalar_once = [&seen_scalars](const Line& line) {
        if (!seen_scalars.insert(line.tokens[0]).second)
            throw ParseError("duplicate key '" + line.tokens[0] + "' at line " +
                             std::to_string(line.number));
    };

    while (i < lines.size()) {
        const Line& line = lines[i];
        const auto& t = line.tokens;
        const auto& key = t[0];

        if (key == "scenario" || key == "seed" || key == "image_size" ||
            key == "steps_per_phase" || key == "estimator_noise_sigma") {
            if (t.size() != 2)
                throw ParseError("expected '" + key + " <value>' at line " +
                                 std::to_string(line.number));
            expect_scalar_once(line);
            if (key == "scenario") sc.name = t[1];
            else if (key == "seed") sc.seed = parse_number<std::uint64_t>(t[1], line.number);
            else if (key == "image_size") sc.image_size = parse_number<int>(t[1], line.number);
            else if (key == "steps_per_phase")
                sc.steps_per_phase = parse_number<std::int64_t>(t[1], line.number);
            else sc.estimator_noise_sigma = parse_number<double>(t[1], line.number);
            ++i;
            continue;
        }

        if (key == "phase") {
            if (t.size() != 3 || t[2] != "{")
                throw ParseError("expected 'phase <name> {' at line " +
                                 std::to_string(line.number));
            PhaseSpec phase;
            phase.name = t[1];
            raw_counts.emplace_back();
            auto& counts = raw_counts.back();
            bool saw_ambient = false;
            ++i;
            for (;; ++i) {
                if (i >= lines.size())
                    throw ParseError("unterminated phase block '" + phase.name + "'");
                const auto& bt = lines[i].tokens;
                if (bt[0] == "}") {
                    ++i;
                    break;
                }
                if (bt[0] == "ambient" && bt.size() == 2) {
                    if (saw_ambient)
                        throw ParseError("duplicate ambient at line " +
                                         std::to_string(lines[i].number));
                    phase.ambient = parse_number<double>(bt[1], lines[i].number);
                    saw_ambient = true;
                } else if (bt[0] == "objects" && bt.size() == 3) {
                    if (!counts.emplace(bt[1], parse_number<std::int64_t>(bt[2], lines[i].number)).second)
                        throw ParseError("duplicate objects entry for '" + bt[1] +
                                         "' at line " + std::to_string(lines[i].number));
                } else {
                    throw ParseError("unexpected phase entry at line " +
                                     std::to_string(lines[i].number));
                }
            }
            sc.phases.push_back(std::move(phase));
            continue;
        }

        if (key == "au") {
            if (t.size() != 3 || t[2] != "{")
                throw ParseError("expected 'au <name> {' at line " +
                                 std::to_string(line.number));
            AuProfile au;
            au.name = t[1];
            ++i;
            for (;; ++i) {
                if (i >= lines.size())
                    throw ParseError("unterminated au block '" + au.name + "'");
                const auto& bt = lines[i].tokens;
                if (bt[0] == "}") {
                    ++i;
                    break;
                }
                if (bt[0] == "width" && bt.size() == 2) {
                    au.width = parse_number<double>(bt[1], lines[i].number);
                } else if (bt[0] == "priority" && bt.size() == 2) {
                    au.priority = parse_number<double>(bt[1], lines[i].number);
                } else if (bt[0] == "dimension_weights" && bt.size() == 5) {
                    for (int d = 0; d < 4; ++d)
                        au.dimension_weights[static_cast<std::size_t>(d)] =
                            parse_number<double>(bt[static_cast<std::size_t>(d) + 1],
                                                 lines[i].number);
                } else if (bt[0] == "optimum" && bt.size() >= 3) {
                    std::string vec;
                    for (std::size_t k = 2; k < bt.size(); ++k) vec += bt[k];
                    if (!au.optimum.emplace(bt[1], parse_settings(vec)).second)
                        throw ParseError("duplicate optimum for phase '" + bt[1] +
                                         "' at line " + std::to_string(lines[i].number));
                } else {
                    throw ParseError("unexpected au entry at line " +
                                     std::to_string(lines[i].number));
                }
            }
            for (const auto& existing : sc.au_profiles)
                if (existing.name == au.name)
                    throw ParseError("duplicate au block '" + au.name + "'");
            sc.au_profiles.push_back(std::move(au));
            continue;
        }

        throw ParseError("unexpected token '" + key + "' at line " +
                         std::to_string(line.number));
    }

    // resolve per-phase object counts against the AU list (missing -> 0)
    sc.object_counts.assign(raw_counts.size(),
                            std::vector<std::int64_t>(sc.au_profiles.size(), 0));
    for (std::size_t p = 0; p < raw_counts.size(); ++p) {
        for (const auto& [name, count] : raw_counts[p]) {
            bool found = false;
            for (std::size_t a = 0; a < sc.au_profiles.size(); ++a) {
                if (sc.au_profiles[a].name == name) {
                    sc.object_counts[p][a] = count;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw ParseError("objects entry references unknown AU '" + name + "'");
        }
    }

    sc.validate();
    return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void save_scenario(const ScenarioConfig& scenario,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << serialize_scenario(scenario);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

} // namespace elixir
