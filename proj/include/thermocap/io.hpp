#pragma once

// Text output: ledger CSV, per-field CSV snapshots and legacy VTK.
//
// CSV snapshot layout: one header line "nx ny lx ly time", then the values
// row by row (j = 0 first), comma separated, 17 significant digits. Face
// components are written on their own (nx+1) x ny and nx x (ny+1) lattices.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermocap/diagnostics.hpp"
#include "thermocap/error.hpp"
#include "thermocap/scheme.hpp"

namespace thermocap::io {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_lattice(std::ostream& os, const Grid& g, double time, const std::vector<double>& v, int cols,
                          int rows) {
  os << g.nx << ' ' << g.ny << ' ' << fmt(g.lx) << ' ' << fmt(g.ly) << ' ' << fmt(time) << '\n';
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) os << (i ? "," : "") << fmt(v[std::size_t(j) * cols + i]);
    os << '\n';
  }
}

struct Lattice {
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0, time = 0.0;
  std::vector<std::vector<double>> rows;
};

inline Lattice read_lattice(std::istream& in) {
  Lattice l;
  if (!(in >> l.nx >> l.ny >> l.lx >> l.ly >> l.time)) throw Error("snapshot: malformed header");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    l.rows.push_back(std::move(row));
  }
  return l;
}

inline void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  body(os);
  if (!os) throw Error("write failed for '" + p.string() + "'");
}

inline void write_csv_snapshot(const std::filesystem::path& dir, const State& s, const Model& m) {
  const Grid& g = m.grid;
  const std::string tag = "_" + std::to_string(s.k) + ".csv";
  const CellField theta = s.theta(m);
  auto cells = [&](const char* name, const CellField& f) {
    write_file(dir / (name + tag), [&](std::ostream& os) { write_lattice(os, g, s.time, f.v, g.nx, g.ny); });
  };
  cells("phi", s.phi);
  cells("mu", s.mu);
  cells("theta", theta);
  cells("p", s.p);
  write_file(dir / ("ux" + tag), [&](std::ostream& os) { write_lattice(os, g, s.time, s.u.x, g.nx + 1, g.ny); });
  write_file(dir / ("uy" + tag), [&](std::ostream& os) { write_lattice(os, g, s.time, s.u.y, g.nx, g.ny + 1); });
}

/// Legacy VTK structured points with cell data; velocity averaged to cells.
inline void write_vtk_snapshot(const std::filesystem::path& dir, const State& s, const Model& m) {
  const Grid& g = m.grid;
  const CellField theta = s.theta(m);
  write_file(dir / ("state_" + std::to_string(s.k) + ".vtk"), [&](std::ostream& os) {
    os << "# vtk DataFile Version 3.0\nthermocap t=" << fmt(s.time) << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.nx + 1 << ' ' << g.ny + 1 << " 1\nORIGIN 0 0 0\n";
    os << "SPACING " << fmt(g.dx()) << ' ' << fmt(g.dy()) << " 1\n";
    os << "CELL_DATA " << g.n_cells() << '\n';
    for (auto [name, f] : {std::pair<const char*, const CellField*>{"phi", &s.phi},
                           {"mu", &s.mu}, {"theta", &theta}, {"p", &s.p}}) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : f->v) os << fmt(x) << '\n';
    }
    os << "VECTORS u double\n";
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        os << fmt(0.5 * (s.u.xf(i, j) + s.u.xf(i + 1, j))) << ' ' << fmt(0.5 * (s.u.yf(i, j) + s.u.yf(i, j + 1)))
           << " 0\n";
  });
}

inline void write_ledger(const std::filesystem::path& p, const RunLedger& ledger) {
  write_file(p, [&](std::ostream& os) { ledger.write_csv(os); });
}

}  // namespace thermocap::io
