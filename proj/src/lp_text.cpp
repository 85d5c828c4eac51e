#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "evflex/csv.hpp"
#include "evflex/errors.hpp"
#include "evflex/lp_core.hpp"

namespace evflex::lp {

namespace {

std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return csv::format_double(v);
}

double parse_num(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("lp-text: bad number '" + s + "'");
  return v;
}

const char* sense_name(RowSense s) {
  switch (s) {
    case RowSense::le: return "le";
    case RowSense::eq: return "eq";
    case RowSense::ge: return "ge";
  }
  return "?";
}

RowSense parse_sense(const std::string& s) {
  if (s == "le") return RowSense::le;
  if (s == "eq") return RowSense::eq;
  if (s == "ge") return RowSense::ge;
  throw ConfigError("lp-text: bad row sense '" + s + "'");
}

}  // namespace

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  out << "minimize\n";
  out << "offset " << num(lp.objective_offset()) << "\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variable(j);
    out << "var " << v.name << ' ' << num(v.lower) << ' ' << num(v.upper) << ' ' << num(v.cost)
        << "\n";
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.row(i);
    out << "row " << r.name << ' ' << sense_name(r.sense) << ' ' << num(r.rhs);
    for (const RowEntry& e : r.entries)
      out << ' ' << num(e.coeff) << ' ' << lp.variable(e.var).name;
    out << "\n";
  }
}

LinearProgram read_lp_text(std::istream& in) {
  LinearProgram lp;
  std::map<std::string, int> var_index;
  std::string line;
  bool saw_sense = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "minimize") {
      saw_sense = true;
    } else if (tok == "offset") {
      std::string v;
      ss >> v;
      lp.set_objective_offset(parse_num(v));
    } else if (tok == "var") {
      std::string name, lo, up, cost;
      if (!(ss >> name >> lo >> up >> cost))
        throw ConfigError("lp-text line " + std::to_string(lineno) + ": malformed var");
      int j = lp.add_variable(name, parse_num(lo), parse_num(up), parse_num(cost));
      if (!var_index.emplace(name, j).second)
        throw ConfigError("lp-text: duplicate variable name " + name);
    } else if (tok == "row") {
      std::string name, sense, rhs;
      if (!(ss >> name >> sense >> rhs))
        throw ConfigError("lp-text line " + std::to_string(lineno) + ": malformed row");
      int r = lp.add_row(name, parse_sense(sense), parse_num(rhs));
      std::string coeff, var;
      while (ss >> coeff) {
        if (!(ss >> var))
          throw ConfigError("lp-text line " + std::to_string(lineno) + ": dangling coefficient");
        auto it = var_index.find(var);
        if (it == var_index.end())
          throw ConfigError("lp-text line " + std::to_string(lineno) + ": unknown variable " + var);
        lp.add_entry(r, it->second, parse_num(coeff));
      }
    } else {
      throw ConfigError("lp-text line " + std::to_string(lineno) + ": unknown directive " + tok);
    }
  }
  if (!saw_sense) throw ConfigError("lp-text: missing 'minimize' header");
  lp.validate();
  return lp;
}

void write_lp_text_file(const LinearProgram& lp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write LP file: " + path);
  write_lp_text(lp, out);
}

LinearProgram read_lp_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read LP file: " + path);
  return read_lp_text(in);
}

void write_solution_text(const Solution& sol, std::ostream& out) {
  const char* st = "infeasible";
  if (sol.status == SolveStatus::optimal) st = "optimal";
  else if (sol.status == SolveStatus::unbounded) st = "unbounded";
  else if (sol.status == SolveStatus::iteration_limit) st = "iteration_limit";
  out << "status " << st << "\n";
  out << "objective " << num(sol.objective) << "\n";
  for (size_t j = 0; j < sol.x.size(); ++j) out << "x " << j << ' ' << num(sol.x[j]) << "\n";
  for (size_t i = 0; i < sol.row_dual.size(); ++i)
    out << "dual " << i << ' ' << num(sol.row_dual[i]) << "\n";
}

Solution read_solution_text(std::istream& in) {
  Solution sol;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "status") {
      std::string v;
      ss >> v;
      if (v == "optimal") sol.status = SolveStatus::optimal;
      else if (v == "unbounded") sol.status = SolveStatus::unbounded;
      else if (v == "iteration_limit") sol.status = SolveStatus::iteration_limit;
      else sol.status = SolveStatus::infeasible;
    } else if (tok == "objective") {
      std::string v;
      ss >> v;
      sol.objective = parse_num(v);
    } else if (tok == "x" || tok == "dual") {
      size_t idx;
      std::string v;
      ss >> idx >> v;
      auto& vec = (tok == "x") ? sol.x : sol.row_dual;
      if (vec.size() <= idx) vec.resize(idx + 1, 0.0);
      vec[idx] = parse_num(v);
    } else {
      throw ConfigError("solution-text: unknown directive " + tok);
    }
  }
  return sol;
}

FileExchangeBackend::FileExchangeBackend(std::string command, std::string work_dir)
    : command_(std::move(command)), work_dir_(std::move(work_dir)) {}

Solution FileExchangeBackend::solve(const LinearProgram& lp, const Tolerances&) {
  std::string problem = work_dir_ + "/problem.lp";
  std::string answer = work_dir_ + "/solution.txt";
  write_lp_text_file(lp, problem);
  std::string cmd = command_ + " " + problem + " " + answer;
  int rc = std::system(cmd.c_str());
  if (rc != 0) throw ModelError("external solver failed with exit code " + std::to_string(rc));
  std::ifstream in(answer);
  if (!in) throw ModelError("external solver produced no solution file");
  return read_solution_text(in);
}

}  // namespace evflex::lp
