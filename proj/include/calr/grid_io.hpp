#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "calr/errors.hpp"
#include "calr/source.hpp"

namespace calr {

// Grid file format (whitespace separated, '#' starts a comment):
//
//   origin <x> <y>
//   cell   <dx> <dy>
//   dims   <nx> <ny>
//   <nx*ny values, row i (along x) holding ny values along y>
//
// The three header lines may appear in any order before the values.

inline std::shared_ptr<GridSource> read_grid(std::istream& in) {
    std::string content;
    {
        std::ostringstream buf;
        std::string line;
        while (std::getline(in, line)) {
            if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
            buf << line << '\n';
        }
        content = buf.str();
    }
    std::istringstream tokens(content);
    double xo = NAN, yo = NAN, dx = NAN, dy = NAN;
    long long nx = -1, ny = -1;
    std::string word;
    int headers = 0;
    while (headers < 3 && tokens >> word) {
        if (word == "origin") {
            if (!(tokens >> xo >> yo)) throw InvalidParameter("grid: malformed origin line");
        } else if (word == "cell") {
            if (!(tokens >> dx >> dy)) throw InvalidParameter("grid: malformed cell line");
        } else if (word == "dims") {
            if (!(tokens >> nx >> ny)) throw InvalidParameter("grid: malformed dims line");
        } else {
            throw InvalidParameter("grid: unexpected token '" + word + "' in header");
        }
        ++headers;
    }
    if (headers < 3 || std::isnan(xo) || std::isnan(dx) || nx <= 0 || ny <= 0) {
        throw InvalidParameter("grid: header needs origin, cell and dims");
    }
    const auto count = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<double> values;
    values.reserve(count);
    while (tokens >> word) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(word, &used);
        } catch (const std::exception&) {
            throw InvalidParameter("grid: cannot parse value '" + word + "'");
        }
        if (used != word.size()) throw InvalidParameter("grid: cannot parse value '" + word + "'");
        if (!std::isfinite(v)) throw InvalidParameter("grid: non-finite value '" + word + "'");
        values.push_back(v);
    }
    if (values.size() != count) {
        throw InvalidParameter("grid: expected " + std::to_string(count) + " values, found " +
                               std::to_string(values.size()));
    }
    return std::make_shared<GridSource>(xo, yo, dx, dy, static_cast<std::size_t>(nx),
                                        static_cast<std::size_t>(ny), std::move(values));
}

inline std::shared_ptr<GridSource> read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open grid file " + path);
    return read_grid(in);
}

inline void write_grid(std::ostream& out, const GridSource& g) {
    out << std::setprecision(17);
    out << "origin " << g.x_origin() << ' ' << g.y_origin() << '\n';
    out << "cell " << g.dx() << ' ' << g.dy() << '\n';
    out << "dims " << g.nx() << ' ' << g.ny() << '\n';
    for (std::size_t i = 0; i < g.nx(); ++i) {
        for (std::size_t j = 0; j < g.ny(); ++j) {
            out << (j ? " " : "") << g.values()[i * g.ny() + j];
        }
        out << '\n';
    }
}

}  // namespace calr
