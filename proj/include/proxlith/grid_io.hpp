#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "proxlith/grid.hpp"

namespace proxlith {

/// A scalar field on disk: header lines, then row-major values, one grid row
/// per line at %.9g. Values written at this precision re-serialize
/// byte-identically after a read, so the format is a fixpoint under
/// read/write cycles.
struct GridFile {
    std::string type;  // transmission | intensity | dose | height
    std::string unit;  // "1", "mJ/cm2", "um", ...
    Grid2<double> grid;
    std::optional<double> gap_um;
    std::string comment;
};

inline void write_grid(std::ostream& os, const GridFile& gf) {
    for (double v : gf.grid.data)
        if (!std::isfinite(v))
            throw std::invalid_argument("write_grid: grid contains non-finite values");
    char buf[40];
    os << "# proxlith grid v1\n";
    os << "type " << gf.type << '\n';
    os << "nx " << gf.grid.nx << '\n';
    os << "ny " << gf.grid.ny << '\n';
    std::snprintf(buf, sizeof buf, "%.9g", gf.grid.pitch);
    os << "pitch_um " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.9g", gf.grid.origin.x);
    os << "origin_um " << buf;
    std::snprintf(buf, sizeof buf, "%.9g", gf.grid.origin.y);
    os << ' ' << buf << '\n';
    os << "unit " << gf.unit << '\n';
    if (gf.gap_um) {
        std::snprintf(buf, sizeof buf, "%.9g", *gf.gap_um);
        os << "gap_um " << buf << '\n';
    }
    if (!gf.comment.empty()) os << "comment " << gf.comment << '\n';
    os << "data\n";
    for (std::size_t j = 0; j < gf.grid.ny; ++j) {
        for (std::size_t i = 0; i < gf.grid.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.9g", gf.grid.at(i, j));
            if (i) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

inline GridFile read_grid(std::istream& is) {
    GridFile gf;
    gf.unit = "1";
    std::size_t nx = 0, ny = 0;
    double pitch = 0.0;
    Vec2 origin{};
    bool have_origin = false;

    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("grid parse error at line " + std::to_string(lineno) +
                                 ": " + what);
    };
    bool in_data = false;
    Grid2<double> g;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!in_data) {
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "type") ls >> gf.type;
            else if (key == "nx") ls >> nx;
            else if (key == "ny") ls >> ny;
            else if (key == "pitch_um") ls >> pitch;
            else if (key == "origin_um") { ls >> origin.x >> origin.y; have_origin = true; }
            else if (key == "unit") ls >> gf.unit;
            else if (key == "gap_um") { double g2; ls >> g2; gf.gap_um = g2; }
            else if (key == "comment") {
                auto p = line.find(' ');
                gf.comment = p == std::string::npos ? "" : line.substr(p + 1);
            } else if (key == "data") {
                if (nx == 0 || ny == 0) fail("data before nx/ny");
                if (!(pitch > 0.0)) fail("data before a positive pitch_um");
                if (!have_origin) origin = {0.5 * pitch, 0.5 * pitch};
                g = Grid2<double>(nx, ny, pitch, origin);
                in_data = true;
                continue;
            } else fail("unknown header key '" + key + "'");
            if (!ls && key != "comment") fail("malformed value for '" + key + "'");
        } else {
            if (row >= ny) fail("more data rows than ny");
            std::istringstream ls(line);
            for (std::size_t i = 0; i < nx; ++i) {
                if (!(ls >> g.at(i, row))) fail("short data row");
                if (!std::isfinite(g.at(i, row))) fail("non-finite value");
            }
            double extra;
            if (ls >> extra) fail("long data row");
            ++row;
        }
    }
    if (!in_data) { ++lineno; fail("missing data section"); }
    if (row != ny) { ++lineno; fail("expected " + std::to_string(ny) + " data rows, got " +
                                    std::to_string(row)); }
    gf.grid = std::move(g);
    return gf;
}

/// Writes to a temporary file in the same directory, then renames into
/// place, so readers never observe a partial file.
inline void write_grid_file(const std::string& path, const GridFile& gf) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open for write: " + tmp);
        write_grid(os, gf);
        if (!os) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot rename into place: " + path);
    }
}

inline GridFile read_grid_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    return read_grid(is);
}

}  // namespace proxlith
