#include "nmt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nmt/errors.hpp"
#include "nmt/format.hpp"

namespace nmt {

const char* to_string(JobKind job) noexcept {
  switch (job) {
    case JobKind::kNmt: return "nmt";
    case JobKind::kGrid: return "grid";
    case JobKind::kDuality: return "duality";
    case JobKind::kSweepCompare: return "sweep-compare";
  }
  return "unknown";
}

const char* to_string(TaskFamily family) noexcept {
  switch (family) {
    case TaskFamily::kQuadratic: return "quadratic";
    case TaskFamily::kLogistic: return "logistic";
    case TaskFamily::kRanking: return "ranking";
    case TaskFamily::kSharedTrunk: return "shared-trunk";
  }
  return "unknown";
}

namespace {

// ---------------------------------------------------------------------------
// Document model and parser

struct Value {
  enum class Type { kNumber, kBool, kString, kArray } type = Type::kNumber;
  std::string text;             // number literal or string contents
  bool boolean = false;
  std::vector<Value> items;
};

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

struct Section {
  std::string name;
  std::vector<Entry> entries;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  std::vector<Section> parse(std::vector<ValidationIssue>& issues) {
    std::vector<Section> sections;
    sections.push_back({"", {}, 0});
    std::istringstream in(text_);
    std::string raw;
    int line_no = 0;
    std::set<std::string> seen_sections;
    while (std::getline(in, raw)) {
      ++line_no;
      line_ = strip_comment(raw);
      pos_ = 0;
      skip_ws();
      if (pos_ >= line_.size()) continue;
      const std::string where = "line " + std::to_string(line_no);
      try {
        if (line_[pos_] == '[') {
          const auto close = line_.find(']', pos_);
          if (close == std::string::npos) throw std::runtime_error("unterminated section header");
          std::string name = trim(line_.substr(pos_ + 1, close - pos_ - 1));
          if (name.empty() || trim(line_.substr(close + 1)).size() != 0) {
            throw std::runtime_error("malformed section header");
          }
          for (char c : name) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
              throw std::runtime_error("invalid character in section name");
            }
          }
          if (!seen_sections.insert(name).second) {
            throw std::runtime_error("duplicate section [" + name + "]");
          }
          sections.push_back({name, {}, line_no});
          continue;
        }
        const auto eq = line_.find('=', pos_);
        if (eq == std::string::npos) throw std::runtime_error("expected key = value");
        std::string key = trim(line_.substr(pos_, eq - pos_));
        if (key.empty()) throw std::runtime_error("empty key");
        for (char c : key) {
          if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            throw std::runtime_error("invalid character in key '" + key + "'");
          }
        }
        for (const auto& e : sections.back().entries) {
          if (e.key == key) throw std::runtime_error("duplicate key '" + key + "'");
        }
        pos_ = eq + 1;
        Value v = parse_value();
        skip_ws();
        if (pos_ != line_.size()) throw std::runtime_error("trailing characters after value");
        sections.back().entries.push_back({key, std::move(v), line_no});
      } catch (const std::runtime_error& e) {
        issues.push_back({where, e.what()});
      }
    }
    return sections;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) {
      ++pos_;
    }
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= line_.size()) throw std::runtime_error("missing value");
    Value v;
    const char c = line_[pos_];
    if (c == '"') {
      v.type = Value::Type::kString;
      ++pos_;
      while (true) {
        if (pos_ >= line_.size()) throw std::runtime_error("unterminated string");
        char ch = line_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= line_.size()) throw std::runtime_error("dangling escape");
          ch = line_[pos_++];
          if (ch != '"' && ch != '\\') throw std::runtime_error("unsupported escape");
        }
        v.text += ch;
      }
      return v;
    }
    if (c == '[') {
      v.type = Value::Type::kArray;
      ++pos_;
      skip_ws();
      if (pos_ < line_.size() && line_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(parse_value());
        if (v.items.back().type == Value::Type::kArray) {
          throw std::runtime_error("nested arrays are not supported");
        }
        skip_ws();
        if (pos_ >= line_.size()) throw std::runtime_error("unterminated array");
        if (line_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (line_[pos_] == ']') {
          ++pos_;
          return v;
        }
        throw std::runtime_error("expected ',' or ']' in array");
      }
    }
    std::size_t end = pos_;
    while (end < line_.size() && line_[end] != ',' && line_[end] != ']' && line_[end] != ' ' &&
           line_[end] != '\t' && line_[end] != '\r') {
      ++end;
    }
    const std::string token = line_.substr(pos_, end - pos_);
    pos_ = end;
    if (token == "true" || token == "false") {
      v.type = Value::Type::kBool;
      v.boolean = token == "true";
      return v;
    }
    double d = 0.0;
    const char* b = token.data();
    auto [ptr, ec] = std::from_chars(b, b + token.size(), d);
    if (token.empty() || ec != std::errc() || ptr != b + token.size()) {
      throw std::runtime_error("cannot parse value '" + token + "'");
    }
    v.type = Value::Type::kNumber;
    v.text = token;
    return v;
  }

  const std::string& text_;
  std::string line_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Typed, consuming reader over the document. Every key that is never read is
// reported as unknown.

class Reader {
 public:
  Reader(std::vector<Section> sections, std::vector<ValidationIssue>& issues)
      : sections_(std::move(sections)), issues_(issues) {}

  bool has_section(const std::string& name) const { return find_section(name) != nullptr; }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& s : sections_) out.push_back(s.name);
    return out;
  }

  const Entry* take(const std::string& section, const std::string& key) {
    const Section* s = find_section(section);
    if (!s) return nullptr;
    for (const auto& e : s->entries) {
      if (e.key == key) {
        used_.insert(qualified(section, key));
        return &e;
      }
    }
    return nullptr;
  }

  void mark_section(const std::string& name) { used_sections_.insert(name); }

  template <typename T, typename Check>
  void number(const std::string& section, const std::string& key, T& out, Check&& check,
              const char* requirement) {
    const Entry* e = take(section, key);
    if (!e) return;
    T parsed{};
    if (!to_number(e->value, parsed)) {
      issue(section, key, "expected a number");
      return;
    }
    if (!check(parsed)) {
      issue(section, key, requirement);
      return;
    }
    out = parsed;
  }

  void boolean(const std::string& section, const std::string& key, bool& out) {
    const Entry* e = take(section, key);
    if (!e) return;
    if (e->value.type != Value::Type::kBool) {
      issue(section, key, "expected true or false");
      return;
    }
    out = e->value.boolean;
  }

  bool string(const std::string& section, const std::string& key, std::string& out) {
    const Entry* e = take(section, key);
    if (!e) return false;
    if (e->value.type != Value::Type::kString) {
      issue(section, key, "expected a quoted string");
      return false;
    }
    out = e->value.text;
    return true;
  }

  bool doubles(const std::string& section, const std::string& key, std::vector<double>& out) {
    const Entry* e = take(section, key);
    if (!e) return false;
    if (e->value.type != Value::Type::kArray) {
      issue(section, key, "expected an array of numbers");
      return false;
    }
    std::vector<double> values;
    for (const auto& item : e->value.items) {
      double d = 0.0;
      if (!to_number(item, d) || !std::isfinite(d)) {
        issue(section, key, "expected an array of finite numbers");
        return false;
      }
      values.push_back(d);
    }
    out = std::move(values);
    return true;
  }

  void issue(const std::string& section, const std::string& key, const std::string& message) {
    issues_.push_back({qualified(section, key), message});
  }

  void report_unknown() {
    for (const auto& s : sections_) {
      if (!s.name.empty() && !used_sections_.count(s.name)) {
        issues_.push_back({s.name, "unknown section"});
        continue;
      }
      for (const auto& e : s.entries) {
        if (!used_.count(qualified(s.name, e.key))) {
          issues_.push_back({qualified(s.name, e.key), "unknown key"});
        }
      }
    }
  }

 private:
  static std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  static bool to_number(const Value& v, double& out) {
    if (v.type != Value::Type::kNumber) return false;
    const char* b = v.text.data();
    auto [ptr, ec] = std::from_chars(b, b + v.text.size(), out);
    return ec == std::errc() && ptr == b + v.text.size();
  }

  template <typename Int>
  static bool to_number(const Value& v, Int& out) {
    if (v.type != Value::Type::kNumber) return false;
    const char* b = v.text.data();
    auto [ptr, ec] = std::from_chars(b, b + v.text.size(), out);
    return ec == std::errc() && ptr == b + v.text.size();
  }

  std::vector<Section> sections_;
  std::vector<ValidationIssue>& issues_;
  std::set<std::string> used_;
  std::set<std::string> used_sections_;
};

bool parse_job(const std::string& s, JobKind& out) {
  for (JobKind j : {JobKind::kNmt, JobKind::kGrid, JobKind::kDuality, JobKind::kSweepCompare}) {
    if (s == to_string(j)) {
      out = j;
      return true;
    }
  }
  return false;
}

bool parse_family(const std::string& s, TaskFamily& out) {
  for (TaskFamily f : {TaskFamily::kQuadratic, TaskFamily::kLogistic, TaskFamily::kRanking,
                       TaskFamily::kSharedTrunk}) {
    if (s == to_string(f)) {
      out = f;
      return true;
    }
  }
  return false;
}

const auto positive = [](auto v) { return v > 0; };
const auto nonnegative = [](auto v) { return v >= 0; };
const auto any_value = [](auto) { return true; };

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::vector<ValidationIssue> issues;
  Parser parser(text);
  auto sections = parser.parse(issues);
  Reader r(std::move(sections), issues);
  ExperimentConfig c;

  for (const char* name : {"experiment", "data", "model", "optimizer", "problem", "grid",
                                  "analysis"}) {
    r.mark_section(name);
  }

  // [experiment]
  std::string job;
  if (!r.take("experiment", "job")) {
    r.issue("experiment", "job", "is required");
  } else if (r.string("experiment", "job", job) && !parse_job(job, c.job)) {
    r.issue("experiment", "job", "must be one of nmt, grid, duality, sweep-compare");
  }
  r.number("experiment", "seed", c.seed, any_value, "");
  r.string("experiment", "out_dir", c.out_dir);
  r.number("experiment", "threads", c.threads, positive, "must be >= 1");
  r.number("experiment", "dominance_tol", c.dominance_tol,
           [](double v) { return v >= 0 && std::isfinite(v); }, "must be >= 0");

  // [data]
  if (r.has_section("data")) {
    SyntheticConfig d;
    r.number("data", "n_examples", d.n_examples, [](std::size_t v) { return v >= 2; },
             "must be >= 2");
    r.number("data", "n_features", d.n_features, positive, "must be >= 1");
    r.number("data", "n_tasks", d.n_tasks, positive, "must be >= 1");
    r.number("data", "correlation", d.correlation,
             [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
    r.number("data", "noise", d.noise, [](double v) { return v >= 0.0 && std::isfinite(v); },
             "must be >= 0");
    c.data = d;
  }

  // [model]
  r.number("model", "trunk_width", c.model.trunk_width, positive, "must be >= 1");
  r.boolean("model", "trunk_bias", c.model.trunk_bias);
  r.boolean("model", "head_bias", c.model.head_bias);
  r.number("model", "init_scale", c.model.init_scale,
           [](double v) { return v >= 0.0 && std::isfinite(v); }, "must be >= 0");

  // [optimizer]
  auto& o = c.optimizer;
  const auto finite_positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  r.number("optimizer", "eta", o.eta, finite_positive, "must be > 0");
  r.number("optimizer", "tau", o.tau, finite_positive, "must be > 0");
  r.number("optimizer", "lambda_init", o.lambda_init,
           [](double v) { return v >= 0.0 && std::isfinite(v); }, "must be >= 0");
  r.number("optimizer", "max_iters", o.max_iters, positive, "must be >= 1");
  r.number("optimizer", "conv_tol", o.conv_tol, finite_positive, "must be > 0");
  r.number("optimizer", "conv_window", o.conv_window, positive, "must be >= 1");
  r.number("optimizer", "batch_size", o.batch.size, nonnegative, "must be >= 0");
  r.boolean("optimizer", "clamp_lambda", o.clamp_lambda);
  r.number("optimizer", "full_eval_every", o.full_eval_every, positive, "must be >= 1");

  // [task.N], consecutive from 1
  std::set<std::string> task_sections;
  for (const auto& name : r.section_names()) {
    if (name.rfind("task.", 0) == 0) task_sections.insert(name);
  }
  for (std::size_t k = 1; task_sections.count("task." + std::to_string(k)); ++k) {
    const std::string sec = "task." + std::to_string(k);
    r.mark_section(sec);
    TaskSpec t;
    std::string kind;
    if (!r.string(sec, "kind", kind)) {
      r.issue(sec, "kind", "is required");
    } else if (!parse_family(kind, t.family)) {
      r.issue(sec, "kind", "must be one of quadratic, logistic, ranking, shared-trunk");
    }
    r.doubles(sec, "center", t.center);
    r.doubles(sec, "scale", t.scale);
    r.string(sec, "label", t.label);
    r.number(sec, "l2", t.l2, [](double v) { return v >= 0.0 && std::isfinite(v); },
             "must be >= 0");
    r.number(sec, "max_pairs", t.max_pairs, nonnegative, "must be >= 0");
    if (t.family == TaskFamily::kQuadratic) {
      if (t.center.empty()) r.issue(sec, "center", "is required for quadratic tasks");
      if (t.scale.empty()) t.scale.assign(t.center.size(), 1.0);
      if (t.scale.size() != t.center.size()) r.issue(sec, "scale", "must match center in length");
      for (double s : t.scale) {
        if (!(s > 0.0)) {
          r.issue(sec, "scale", "entries must be > 0");
          break;
        }
      }
    } else if (t.label.empty()) {
      r.issue(sec, "label", "is required for data-backed tasks");
    }
    c.tasks.push_back(std::move(t));
  }
  if (c.tasks.empty()) r.issue("task.1", "kind", "at least one [task.N] section is required");

  // [problem]
  if (r.doubles("problem", "tolerances", c.tolerances)) {
    if (c.tolerances.size() != c.tasks.size()) {
      r.issue("problem", "tolerances", "needs one entry per task");
    }
    for (double t : c.tolerances) {
      if (!(t >= 0.0)) {
        r.issue("problem", "tolerances", "entries must be >= 0");
        break;
      }
    }
  }
  std::vector<double> theta0;
  if (r.doubles("problem", "theta0", theta0)) c.theta0 = theta0;

  // [grid] and [grid.N]
  std::string mode = "simplex";
  if (r.string("grid", "mode", mode) && mode != "simplex" && mode != "raw") {
    r.issue("grid", "mode", "must be simplex or raw");
  }
  const bool simplex = mode != "raw";
  std::vector<std::vector<double>> lists;
  for (std::size_t k = 1; r.has_section("grid." + std::to_string(k)); ++k) {
    const std::string sec = "grid." + std::to_string(k);
    r.mark_section(sec);
    std::vector<double> w;
    if (!r.doubles(sec, "weights", w)) r.issue(sec, "weights", "is required");
    for (double v : w) {
      if (!(v > 0.0 && v <= 1.0)) {
        r.issue(sec, "weights", "entries must lie in (0, 1]");
        break;
      }
    }
    lists.push_back(std::move(w));
  }
  if (!lists.empty() || !simplex) {
    c.grid.weights_per_task = lists;
    c.grid.normalization = simplex ? WeightNormalization::kSimplex : WeightNormalization::kRaw;
  }

  // [analysis]
  auto& a = c.analysis;
  const auto finite = [](double v) { return std::isfinite(v); };
  r.number("analysis", "box_lower", a.box_lower, finite, "must be finite");
  r.number("analysis", "box_upper", a.box_upper, finite, "must be finite");
  r.number("analysis", "resolution", a.resolution, finite_positive, "must be > 0");
  r.boolean("analysis", "refine", a.refine);
  r.number("analysis", "lambda_points", a.lambda_points, [](std::size_t v) { return v >= 2; },
           "must be >= 2");
  r.number("analysis", "lambda_min", a.lambda_min, finite_positive, "must be > 0");
  r.number("analysis", "lambda_max", a.lambda_max, finite_positive, "must be > 0");
  r.number("analysis", "xi_points", a.xi_points, [](std::size_t v) { return v >= 1; },
           "must be >= 1");
  std::vector<double> star;
  if (r.doubles("analysis", "theta_star", star)) a.theta_star = star;
  if (!(a.box_upper > a.box_lower)) r.issue("analysis", "box_upper", "must exceed box_lower");
  if (!(a.lambda_max > a.lambda_min)) r.issue("analysis", "lambda_max", "must exceed lambda_min");

  // Cross-section checks.
  bool needs_data = false;
  for (const auto& t : c.tasks) needs_data = needs_data || t.family != TaskFamily::kQuadratic;
  if (needs_data && !c.data) r.issue("data", "n_examples", "a [data] section is required");
  if (c.data) c.data->seed = c.seed;
  if (!c.tasks.empty()) {
    const bool quad = c.tasks.front().family == TaskFamily::kQuadratic;
    const bool trunk = c.tasks.front().family == TaskFamily::kSharedTrunk;
    for (std::size_t k = 0; k < c.tasks.size(); ++k) {
      const auto f = c.tasks[k].family;
      const bool ok = quad ? f == TaskFamily::kQuadratic
                           : trunk ? f == TaskFamily::kSharedTrunk
                                   : (f == TaskFamily::kLogistic || f == TaskFamily::kRanking);
      if (!ok) {
        r.issue("task." + std::to_string(k + 1), "kind",
                "tasks must share one parameter space (all quadratic, all linear, or all "
                "shared-trunk)");
      }
      if (quad && f == TaskFamily::kQuadratic &&
          c.tasks[k].center.size() != c.tasks.front().center.size()) {
        r.issue("task." + std::to_string(k + 1), "center", "dimension differs from task.1");
      }
    }
  }
  if ((c.job == JobKind::kGrid || c.job == JobKind::kSweepCompare || c.job == JobKind::kDuality) &&
      c.tasks.size() < 2) {
    r.issue("experiment", "job", "needs at least two tasks");
  }
  if (c.job == JobKind::kDuality) {
    for (std::size_t k = 0; k + 1 < c.tasks.size(); ++k) {
      if (k >= c.tolerances.size() || !(c.tolerances[k] > 0.0)) {
        r.issue("problem", "tolerances", "duality jobs need r_i > 0 on every constraint");
        break;
      }
    }
  }

  r.report_unknown();
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({{"config", "cannot open " + path}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "job = " << quote(to_string(c.job)) << "\n"
      << "seed = " << c.seed << "\n";
  if (!c.out_dir.empty()) out << "out_dir = " << quote(c.out_dir) << "\n";
  out << "threads = " << c.threads << "\n"
      << "dominance_tol = " << format_double(c.dominance_tol) << "\n";
  if (c.data) {
    out << "\n[data]\n"
        << "n_examples = " << c.data->n_examples << "\n"
        << "n_features = " << c.data->n_features << "\n"
        << "n_tasks = " << c.data->n_tasks << "\n"
        << "correlation = " << format_double(c.data->correlation) << "\n"
        << "noise = " << format_double(c.data->noise) << "\n";
  }
  out << "\n[model]\n"
      << "trunk_width = " << c.model.trunk_width << "\n"
      << "trunk_bias = " << boolean(c.model.trunk_bias) << "\n"
      << "head_bias = " << boolean(c.model.head_bias) << "\n"
      << "init_scale = " << format_double(c.model.init_scale) << "\n";
  const auto& o = c.optimizer;
  out << "\n[optimizer]\n"
      << "eta = " << format_double(o.eta) << "\n"
      << "tau = " << format_double(o.tau) << "\n"
      << "lambda_init = " << format_double(o.lambda_init) << "\n"
      << "max_iters = " << o.max_iters << "\n"
      << "conv_tol = " << format_double(o.conv_tol) << "\n"
      << "conv_window = " << o.conv_window << "\n"
      << "batch_size = " << o.batch.size << "\n"
      << "clamp_lambda = " << boolean(o.clamp_lambda) << "\n"
      << "full_eval_every = " << o.full_eval_every << "\n";
  if (!c.tolerances.empty() || c.theta0) {
    out << "\n[problem]\n";
    if (!c.tolerances.empty()) out << "tolerances = " << array(c.tolerances) << "\n";
    if (c.theta0) out << "theta0 = " << array(*c.theta0) << "\n";
  }
  for (std::size_t k = 0; k < c.tasks.size(); ++k) {
    const auto& t = c.tasks[k];
    out << "\n[task." << k + 1 << "]\n"
        << "kind = " << quote(to_string(t.family)) << "\n";
    if (t.family == TaskFamily::kQuadratic) {
      out << "center = " << array(t.center) << "\n"
          << "scale = " << array(t.scale) << "\n";
    } else {
      out << "label = " << quote(t.label) << "\n";
      if (t.family == TaskFamily::kLogistic) out << "l2 = " << format_double(t.l2) << "\n";
      if (t.family == TaskFamily::kRanking) out << "max_pairs = " << t.max_pairs << "\n";
    }
  }
  out << "\n[grid]\n"
      << "mode = "
      << quote(c.grid.normalization == WeightNormalization::kSimplex ? "simplex" : "raw") << "\n";
  for (std::size_t k = 0; k < c.grid.weights_per_task.size(); ++k) {
    out << "\n[grid." << k + 1 << "]\n"
        << "weights = " << array(c.grid.weights_per_task[k]) << "\n";
  }
  const auto& a = c.analysis;
  out << "\n[analysis]\n"
      << "box_lower = " << format_double(a.box_lower) << "\n"
      << "box_upper = " << format_double(a.box_upper) << "\n"
      << "resolution = " << format_double(a.resolution) << "\n"
      << "refine = " << boolean(a.refine) << "\n"
      << "lambda_points = " << a.lambda_points << "\n"
      << "lambda_min = " << format_double(a.lambda_min) << "\n"
      << "lambda_max = " << format_double(a.lambda_max) << "\n"
      << "xi_points = " << a.xi_points << "\n";
  if (a.theta_star) out << "theta_star = " << array(*a.theta_star) << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nmt
