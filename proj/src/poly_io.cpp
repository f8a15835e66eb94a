#include "affinorm/poly_io.hpp"

#include "affinorm/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace affinorm {

using nlohmann::json;

SparsePolynomial parse_polynomial_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dim") || !doc.contains("terms")) {
        throw FormatError("polynomial JSON must be an object with \"dim\" and \"terms\"");
    }
    if (!doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1) {
        throw FormatError("\"dim\" must be a positive integer");
    }
    const auto dim = doc["dim"].get<long long>();
    if (!doc["terms"].is_array()) {
        throw FormatError("\"terms\" must be an array");
    }
    std::vector<Monomial> terms;
    const json& arr = doc["terms"];
    for (std::size_t l = 0; l < arr.size(); ++l) {
        const json& t = arr[l];
        const std::string where = "term " + std::to_string(l) + ": ";
        if (!t.is_object() || !t.contains("coeff") || !t.contains("exps")) {
            throw FormatError(where + "expected object with \"coeff\" and \"exps\"");
        }
        if (!t["coeff"].is_number()) {
            throw FormatError(where + "\"coeff\" must be a number");
        }
        if (!t["exps"].is_array()) {
            throw FormatError(where + "\"exps\" must be an array");
        }
        Monomial m{t["coeff"].get<double>(), {}};
        long long prev = -1;
        for (const json& pair : t["exps"]) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
                !pair[1].is_number_integer()) {
                throw FormatError(where + "each exps entry must be [index, exponent]");
            }
            const auto i = pair[0].get<long long>();
            const auto e = pair[1].get<long long>();
            if (i < 0 || i >= dim) {
                throw FormatError(where + "index " + std::to_string(i) + " out of range [0, " +
                                  std::to_string(dim) + ")");
            }
            if (e < 1) {
                throw FormatError(where + "exponent must be a positive integer");
            }
            if (i == prev) {
                throw FormatError(where + "duplicate index " + std::to_string(i));
            }
            if (i < prev) {
                throw FormatError(where + "exps must be sorted ascending by index");
            }
            prev = i;
            m.exps.emplace_back(static_cast<Index>(i), static_cast<unsigned>(e));
        }
        terms.push_back(std::move(m));
    }
    return SparsePolynomial(static_cast<std::size_t>(dim), terms);
}

SparsePolynomial read_polynomial_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open polynomial file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_polynomial_json(ss.str());
}

std::string to_polynomial_json(const SparsePolynomial& poly)
{
    json terms = json::array();
    for (const Monomial& m : poly.terms()) {
        json exps = json::array();
        for (const auto& [i, e] : m.exps) {
            exps.push_back({i, e});
        }
        terms.push_back({{"coeff", m.coeff}, {"exps", exps}});
    }
    json doc;
    doc["dim"] = poly.dim();
    doc["terms"] = terms;
    return doc.dump();
}

void write_polynomial_json(const SparsePolynomial& poly, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write polynomial file: " + path);
    }
    out << to_polynomial_json(poly) << '\n';
}

} // namespace affinorm
