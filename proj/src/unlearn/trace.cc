#include "ukit/unlearn/trace.h"

#include <sstream>

#include "ukit/errors.h"
#include "ukit/io.h"

namespace ukit::unlearn {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError("bad trace cell '" + s + "'");
  }
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out = "epoch,loss_f,loss_r,acc_test,acc_f,acc_r,flos,seconds,phase\n";
  for (const TraceRow& r : trace) {
    out += std::to_string(r.epoch) + "," + cell(r.loss_f) + "," + format_double(r.loss_r) + "," +
           format_double(r.acc_test) + "," + cell(r.acc_f) + "," + format_double(r.acc_r) + "," +
           format_double(r.flos) + "," + format_double(r.seconds) + "," + r.phase + "\n";
  }
  return out;
}

Trace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  Trace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) throw ConfigError("trace row has " + std::to_string(cells.size()) + " cells");
    TraceRow r;
    r.epoch = std::stoi(cells[0]);
    r.loss_f = parse_cell(cells[1]);
    r.loss_r = parse_cell(cells[2]).value_or(0.0);
    r.acc_test = parse_cell(cells[3]).value_or(0.0);
    r.acc_f = parse_cell(cells[4]);
    r.acc_r = parse_cell(cells[5]).value_or(0.0);
    r.flos = parse_cell(cells[6]).value_or(0.0);
    r.seconds = parse_cell(cells[7]).value_or(0.0);
    r.phase = cells[8];
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace ukit::unlearn
