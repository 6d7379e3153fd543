#include "swimevo/space_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace swimevo {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, std::size_t line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw std::invalid_argument(fmt::format("line {}: '{}' is not a number", line, tok));
    return v;
}

ParameterSpace parse_space_text(std::string_view doc) {
    std::vector<DimensionSpec> dims;
    std::size_t line_no = 0;
    std::istringstream in{std::string(doc)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument(fmt::format("line {}: expected 'name unit [period=P] : values'", line_no));
        const auto head = split_ws(std::string_view(line).substr(0, colon));
        const auto tail = split_ws(std::string_view(line).substr(colon + 1));
        if (head.size() < 2 || head.size() > 3)
            throw std::invalid_argument(fmt::format("line {}: expected name, unit and optional period", line_no));

        DimensionSpec dim;
        dim.name = head[0];
        dim.unit = head[1] == "-" ? "" : head[1];
        if (head.size() == 3) {
            if (head[2].rfind("period=", 0) != 0)
                throw std::invalid_argument(fmt::format("line {}: unknown attribute '{}'", line_no, head[2]));
            dim.period = parse_double(head[2].substr(7), line_no);
        }
        for (const auto& tok : tail) dim.values.push_back(parse_double(tok, line_no));
        dims.push_back(std::move(dim));
    }
    return ParameterSpace(std::move(dims));
}

}  // namespace

std::string write_space_text(const ParameterSpace& space) {
    std::string out = "# name unit [period=P] : values\n";
    for (const auto& dim : space.dimensions()) {
        out += fmt::format("{} {}", dim.name, dim.unit.empty() ? "-" : dim.unit);
        if (dim.period) out += fmt::format(" period={}", *dim.period);
        out += " :";
        for (double v : dim.values) out += fmt::format(" {}", v);
        out += "\n";
    }
    return out;
}

ParameterSpace parse_space(std::string_view document) {
    const auto first = document.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && document[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(document);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(fmt::format("malformed JSON space: {}", e.what()));
        }
        return space_from_json(doc);
    }
    return parse_space_text(document);
}

ParameterSpace load_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open space file '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_space(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
    }
}

nlohmann::json space_to_json(const ParameterSpace& space) {
    auto dims = nlohmann::json::array();
    for (const auto& dim : space.dimensions()) {
        nlohmann::json d = {{"name", dim.name}, {"unit", dim.unit}, {"values", dim.values}};
        d["periodic"] = dim.periodic();
        if (dim.period) d["period"] = *dim.period;
        dims.push_back(std::move(d));
    }
    return {{"dimensions", std::move(dims)}, {"cardinality", cardinality(space)}};
}

ParameterSpace space_from_json(const nlohmann::json& doc) {
    try {
        std::vector<DimensionSpec> dims;
        for (const auto& d : doc.at("dimensions")) {
            DimensionSpec dim;
            dim.name = d.at("name").get<std::string>();
            dim.unit = d.value("unit", std::string{});
            dim.values = d.at("values").get<std::vector<double>>();
            if (d.contains("period") && !d["period"].is_null()) dim.period = d["period"].get<double>();
            if (d.value("periodic", dim.period.has_value()) != dim.period.has_value())
                throw std::invalid_argument(
                    fmt::format("dimension '{}': 'periodic' requires a 'period'", dim.name));
            dims.push_back(std::move(dim));
        }
        return ParameterSpace(std::move(dims));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(fmt::format("malformed space document: {}", e.what()));
    }
}

nlohmann::json genotype_to_json(const Genotype& g) { return g.indices; }

Genotype genotype_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw std::invalid_argument("genotype: expected an array of indices");
    Genotype g;
    for (const auto& v : doc) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 0xffffffffLL)
            throw std::invalid_argument("genotype: indices must be non-negative integers");
        g.indices.push_back(v.get<std::uint32_t>());
    }
    return g;
}

}  // namespace swimevo
