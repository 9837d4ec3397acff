#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cattle/csv.hpp"
#include "cattle/maxent.hpp"

namespace cattle::maxent {

int EntropyProgram::add_variable(double lo, double hi, std::string name, double typical_magnitude) {
  lower.push_back(lo);
  upper.push_back(hi);
  typical.push_back(typical_magnitude);
  names.push_back(std::move(name));
  if (!cost.empty()) cost.push_back(0.0);
  return variables() - 1;
}

void EntropyProgram::add_entropy(int var, double weight, double scale, double offset) {
  entropy.push_back({var, weight, scale, offset});
}

int EntropyProgram::add_equality(const Coeffs& coeffs, double rhs) {
  const int row = equalities();
  for (const auto& [col, v] : coeffs) a_eq.push_back({row, col, v});
  b_eq.push_back(rhs);
  return row;
}

int EntropyProgram::add_inequality(const Coeffs& coeffs, double rhs) {
  const int row = inequalities();
  for (const auto& [col, v] : coeffs) a_in.push_back({row, col, v});
  b_in.push_back(rhs);
  return row;
}

void EntropyProgram::set_cost(int var, double c) {
  if (cost.empty()) cost.assign(lower.size(), 0.0);
  cost.at(static_cast<std::size_t>(var)) = c;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::MaxIter:
      return "MaxIter";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
  }
  return "?";
}

double entropy_objective(const EntropyProgram& p, std::span<const double> x) {
  double h = 0.0;
  for (const auto& t : p.entropy) {
    const double u = t.scale * x[t.index];
    const double arg = u + t.offset;
    if (u == 0.0) continue;
    h -= t.weight * u * std::log(arg);
  }
  for (std::size_t j = 0; j < p.cost.size(); ++j) h -= p.cost[j] * x[j];
  return h;
}

namespace {

std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return csv::format_double(v);
}

double parse_num(std::string_view s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::stod(std::string(s));
}

}  // namespace

void dump_program(std::ostream& os, const EntropyProgram& p) {
  os << "dims," << p.equalities() << ',' << p.variables() << ',' << p.inequalities() << '\n';
  for (int j = 0; j < p.variables(); ++j) {
    os << "lo,0," << j << ',' << num(p.lower[j]) << '\n';
    os << "up,0," << j << ',' << num(p.upper[j]) << '\n';
    if (p.typical[j] != 0.0) os << "typ,0," << j << ',' << num(p.typical[j]) << '\n';
  }
  for (std::size_t j = 0; j < p.cost.size(); ++j) {
    if (p.cost[j] != 0.0) os << "cost,0," << j << ',' << num(p.cost[j]) << '\n';
  }
  for (std::size_t k = 0; k < p.entropy.size(); ++k) {
    const auto& t = p.entropy[k];
    os << "ent," << k << ',' << t.index << ',' << num(t.weight) << '\n';
    os << "entscale," << k << ',' << t.index << ',' << num(t.scale) << '\n';
    os << "entoff," << k << ',' << t.index << ',' << num(t.offset) << '\n';
  }
  for (const auto& e : p.a_eq) os << "aeq," << e.row << ',' << e.col << ',' << num(e.value) << '\n';
  for (int i = 0; i < p.equalities(); ++i) os << "beq," << i << ",0," << num(p.b_eq[i]) << '\n';
  for (const auto& e : p.a_in) os << "ain," << e.row << ',' << e.col << ',' << num(e.value) << '\n';
  for (int i = 0; i < p.inequalities(); ++i) os << "bin," << i << ",0," << num(p.b_in[i]) << '\n';
}

EntropyProgram load_program(std::istream& is) {
  EntropyProgram p;
  std::string line;
  int line_no = 0;
  bool have_dims = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw std::runtime_error("program line " + std::to_string(line_no) + ": expected 4 fields");
    const auto kind = f[0];
    const int row = std::stoi(std::string(f[1]));
    const int col = std::stoi(std::string(f[2]));
    if (kind == "dims") {
      const int n = col;
      p.lower.assign(n, 0.0);
      p.upper.assign(n, kInf);
      p.typical.assign(n, 0.0);
      p.names.assign(n, {});
      p.b_eq.assign(row, 0.0);
      p.b_in.assign(std::stoi(std::string(f[3])), 0.0);
      have_dims = true;
      continue;
    }
    if (!have_dims) throw std::runtime_error("program dump must start with a dims line");
    const double v = parse_num(f[3]);
    auto entry = [&](int k) -> EntropyTerm& {
      if (static_cast<int>(p.entropy.size()) <= k) p.entropy.resize(k + 1);
      p.entropy[k].index = col;
      return p.entropy[k];
    };
    if (kind == "lo") {
      p.lower.at(col) = v;
    } else if (kind == "up") {
      p.upper.at(col) = v;
    } else if (kind == "typ") {
      p.typical.at(col) = v;
    } else if (kind == "cost") {
      p.set_cost(col, v);
    } else if (kind == "ent") {
      entry(row).weight = v;
    } else if (kind == "entscale") {
      entry(row).scale = v;
    } else if (kind == "entoff") {
      entry(row).offset = v;
    } else if (kind == "aeq") {
      p.a_eq.push_back({row, col, v});
    } else if (kind == "beq") {
      p.b_eq.at(row) = v;
    } else if (kind == "ain") {
      p.a_in.push_back({row, col, v});
    } else if (kind == "bin") {
      p.b_in.at(row) = v;
    } else {
      throw std::runtime_error("program line " + std::to_string(line_no) + ": unknown kind '" +
                               std::string(kind) + "'");
    }
  }
  return p;
}

}  // namespace cattle::maxent
