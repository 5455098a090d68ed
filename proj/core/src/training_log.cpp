#include "inlab/training_log.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "inlab/error.hpp"

namespace inlab {

std::vector<std::string> log_columns() {
  return {"iteration",     "env_steps",    "episodes",      "mean_reward",
          "mean_length",   "mean_mimic",   "mean_alive",    "mean_balance",
          "mean_velocity", "mean_sync",    "falls",         "mean_forward_velocity",
          "policy_loss",   "value_loss",   "entropy",       "clip_fraction",
          "approx_kl",     "update_aborted"};
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("bad number in log: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError("bad integer in log: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string to_csv(const TrainingLog& log) {
  std::ostringstream out;
  out << kLogSchema << '\n';
  const auto cols = log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : log.rows) {
    out << r.iteration << ',' << r.env_steps << ',' << r.episodes << ',' << fmt(r.mean_reward) << ','
        << fmt(r.mean_length) << ',' << fmt(r.mean_mimic) << ',' << fmt(r.mean_alive) << ','
        << fmt(r.mean_balance) << ',' << fmt(r.mean_velocity) << ',' << fmt(r.mean_sync) << ','
        << r.falls << ',' << fmt(r.mean_forward_velocity) << ',' << fmt(r.policy_loss) << ','
        << fmt(r.value_loss) << ',' << fmt(r.entropy) << ',' << fmt(r.clip_fraction) << ','
        << fmt(r.approx_kl) << ',' << r.update_aborted << '\n';
  }
  return out.str();
}

TrainingLog parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLogSchema) throw FormatError("missing or unknown log schema line");
  if (!std::getline(in, line)) throw FormatError("missing log column header");
  const auto cols = log_columns();
  {
    std::string expected;
    for (std::size_t i = 0; i < cols.size(); ++i) expected += (i ? "," : "") + cols[i];
    if (line != expected) throw FormatError("unexpected log columns");
  }
  TrainingLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != cols.size()) throw FormatError("log row has the wrong number of fields");
    IterationRow r;
    r.iteration = static_cast<int>(to_int(f[0]));
    r.env_steps = to_int(f[1]);
    r.episodes = static_cast<int>(to_int(f[2]));
    r.mean_reward = to_double(f[3]);
    r.mean_length = to_double(f[4]);
    r.mean_mimic = to_double(f[5]);
    r.mean_alive = to_double(f[6]);
    r.mean_balance = to_double(f[7]);
    r.mean_velocity = to_double(f[8]);
    r.mean_sync = to_double(f[9]);
    r.falls = static_cast<int>(to_int(f[10]));
    r.mean_forward_velocity = to_double(f[11]);
    r.policy_loss = to_double(f[12]);
    r.value_loss = to_double(f[13]);
    r.entropy = to_double(f[14]);
    r.clip_fraction = to_double(f[15]);
    r.approx_kl = to_double(f[16]);
    r.update_aborted = static_cast<int>(to_int(f[17]));
    log.rows.push_back(r);
  }
  return log;
}

void write_log(const TrainingLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write log: " + path);
  out << to_csv(log);
}

TrainingLog read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read log: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::vector<double> smoothed_reward(const TrainingLog& log, int window) {
  std::vector<double> out;
  out.reserve(log.rows.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    double s = 0.0;
    int n = 0;
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    for (std::size_t k = lo; k <= i; ++k) {
      if (std::isfinite(log.rows[k].mean_reward)) {
        s += log.rows[k].mean_reward;
        ++n;
      }
    }
    out.push_back(n ? s / n : std::nan(""));
  }
  return out;
}

}  // namespace inlab
