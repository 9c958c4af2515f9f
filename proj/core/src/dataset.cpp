#include "rtdpa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rtdpa/errors.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

std::string to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::date: return "date";
    case ColumnKind::identifier: return "identifier";
  }
  return "?";
}

std::string to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::feature: return "feature";
    case ColumnRole::row_type: return "row_type";
    case ColumnRole::target: return "target";
    case ColumnRole::ignored: return "ignored";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "date") return ColumnKind::date;
  if (s == "identifier") return ColumnKind::identifier;
  throw InputError("unknown column kind '" + s + "'");
}

ColumnRole column_role_from_string(const std::string& s) {
  if (s == "feature") return ColumnRole::feature;
  if (s == "row_type") return ColumnRole::row_type;
  if (s == "target") return ColumnRole::target;
  if (s == "ignored") return ColumnRole::ignored;
  throw InputError("unknown column role '" + s + "'");
}

int Schema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

int Schema::row_type_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].role == ColumnRole::row_type) return static_cast<int>(i);
  return -1;
}

int Schema::target_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].role == ColumnRole::target) return static_cast<int>(i);
  return -1;
}

void Schema::validate() const {
  if (columns.empty()) throw InputError("schema has no columns");
  std::set<std::string> seen;
  int n_row_type = 0, n_target = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw InputError("schema column with empty name");
    if (!seen.insert(c.name).second)
      throw InputError("duplicate schema column '" + c.name + "'");
    if (c.role == ColumnRole::row_type) ++n_row_type;
    if (c.role == ColumnRole::target) ++n_target;
    if (c.kind == ColumnKind::identifier && c.role == ColumnRole::feature)
      throw InputError("identifier column '" + c.name + "' cannot have role feature");
  }
  if (n_row_type != 1)
    throw InputError("schema must declare exactly one row_type column, found " +
                     std::to_string(n_row_type));
  if (n_target != 1)
    throw InputError("schema must declare exactly one target column, found " +
                     std::to_string(n_target));
}

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("schema JSON must be an object");
  static const std::set<std::string> allowed = {"columns", "missing_sentinels", "class_names"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("schema: unknown key '" + it.key() + "'");
  if (!j.contains("columns") || !j["columns"].is_array())
    throw InputError("schema: 'columns' array is required");

  Schema s;
  s.columns.clear();
  for (const auto& jc : j["columns"]) {
    static const std::set<std::string> col_keys = {"name", "kind", "role"};
    for (auto it = jc.begin(); it != jc.end(); ++it)
      if (!col_keys.count(it.key()))
        throw InputError("schema column: unknown key '" + it.key() + "'");
    ColumnSpec c;
    if (!jc.contains("name")) throw InputError("schema column without 'name'");
    c.name = jc.at("name").get<std::string>();
    c.kind = column_kind_from_string(jc.value("kind", "numeric"));
    c.role = column_role_from_string(jc.value("role", "feature"));
    s.columns.push_back(std::move(c));
  }
  if (j.contains("missing_sentinels")) {
    s.missing_sentinels = j["missing_sentinels"].get<std::vector<std::string>>();
    if (std::find(s.missing_sentinels.begin(), s.missing_sentinels.end(), "") ==
        s.missing_sentinels.end())
      s.missing_sentinels.insert(s.missing_sentinels.begin(), "");
  }
  if (j.contains("class_names")) {
    for (auto it = j["class_names"].begin(); it != j["class_names"].end(); ++it) {
      int code = 0;
      const std::string& key = it.key();
      auto res = std::from_chars(key.data(), key.data() + key.size(), code);
      if (res.ec != std::errc() || res.ptr != key.data() + key.size())
        throw InputError("schema class_names: key '" + key + "' is not an integer code");
      s.class_names[code] = it.value().get<std::string>();
    }
  }
  s.validate();
  return s;
}

Schema Schema::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("schema file '" + path + "': " + e.what());
  }
  return from_json(j);
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns)
    cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"role", to_string(c.role)}});
  nlohmann::json j{{"columns", cols}, {"missing_sentinels", missing_sentinels}};
  if (!class_names.empty()) {
    nlohmann::json names;
    for (const auto& [code, name] : class_names) names[std::to_string(code)] = name;
    j["class_names"] = names;
  }
  return j;
}

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (in_quotes) throw InputError("unterminated quote in CSV record");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  // Howard Hinnant's algorithm.
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

bool parse_iso_date(const std::string& s, std::int64_t& days_out) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y;
  unsigned m, d;
  auto parse_uint = [](const char* b, const char* e, auto& out) {
    auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e;
  };
  if (!parse_uint(s.data(), s.data() + 4, y)) return false;
  if (!parse_uint(s.data() + 5, s.data() + 7, m)) return false;
  if (!parse_uint(s.data() + 8, s.data() + 10, d)) return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  days_out = days_from_civil(y, m, d);
  return true;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  if (b == e) return false;
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

Cell parse_cell(const std::string& raw, const ColumnSpec& col, const Schema& schema,
                std::size_t row_1based, const std::string& origin) {
  for (const auto& sentinel : schema.missing_sentinels)
    if (raw == sentinel) return Cell::missing();
  switch (col.kind) {
    case ColumnKind::numeric: {
      double v;
      if (!parse_double(raw, v))
        throw InputError(origin + ": row " + std::to_string(row_1based) + ", column '" +
                         col.name + "': cannot parse '" + raw + "' as numeric");
      return Cell::number(v);
    }
    case ColumnKind::date: {
      std::int64_t days;
      if (!parse_iso_date(raw, days))
        throw InputError(origin + ": row " + std::to_string(row_1based) + ", column '" +
                         col.name + "': cannot parse '" + raw + "' as date (YYYY-MM-DD)");
      return Cell::number(static_cast<double>(days));
    }
    case ColumnKind::categorical:
    case ColumnKind::identifier:
      return Cell::text(raw);
  }
  return Cell::missing();
}

// Logical CSV records: newlines inside quotes do not terminate a record.
std::vector<std::string> logical_records(const std::string& content) {
  std::vector<std::string> records;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char ch = content[i];
    if (ch == '"') in_quotes = !in_quotes;
    if (ch == '\n' && !in_quotes) {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      records.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  if (!cur.empty()) records.push_back(std::move(cur));
  return records;
}

}  // namespace

Dataset parse_csv(const std::string& content, const Schema& schema, const std::string& origin) {
  schema.validate();
  auto records = logical_records(content);
  if (records.empty()) throw InputError(origin + ": empty file");

  const auto header = split_csv_record(records.front());
  if (header.size() != schema.columns.size()) {
    // Name the first schema column absent from the header for a precise error.
    for (const auto& c : schema.columns)
      if (std::find(header.begin(), header.end(), c.name) == header.end())
        throw InputError(origin + ": header is missing column '" + c.name + "'");
    throw InputError(origin + ": header has " + std::to_string(header.size()) +
                     " columns, schema declares " + std::to_string(schema.columns.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != schema.columns[i].name)
      throw InputError(origin + ": header column " + std::to_string(i + 1) + " is '" +
                       header[i] + "', schema declares '" + schema.columns[i].name + "'");

  Dataset d;
  d.schema = schema;
  d.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto fields = split_csv_record(records[r]);
    if (fields.size() != schema.columns.size())
      throw InputError(origin + ": row " + std::to_string(r) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(schema.columns.size()));
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (std::size_t cix = 0; cix < fields.size(); ++cix)
      row.push_back(parse_cell(fields[cix], schema.columns[cix], schema, r, origin));
    d.rows.push_back(std::move(row));
  }
  if (d.rows.empty()) throw InputError(origin + ": no data rows");
  return d;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path);
}

std::map<std::string, Dataset> partition_by_row_type(const Dataset& d) {
  const int rt = d.schema.row_type_index();
  if (rt < 0) throw InputError("dataset schema has no row_type column");
  std::map<std::string, Dataset> parts;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const Cell& cell = d.rows[i][static_cast<std::size_t>(rt)];
    if (cell.is_missing())
      throw InputError("row " + std::to_string(i + 1) + ": missing row-type value");
    const std::string key =
        cell.is_text() ? cell.as_text() : std::to_string(cell.as_number());
    auto [it, inserted] = parts.try_emplace(key);
    if (inserted) it->second.schema = d.schema;
    it->second.rows.push_back(d.rows[i]);
  }
  return parts;
}

int CodeMap::translate(int original) const {
  auto it = to_current.find(original);
  if (it == to_current.end()) return original;
  return it->second;
}

std::map<int, std::size_t> TypedPartition::class_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& l : labels) counts[l.code] = 0;
  for (int c : targets) ++counts[c];
  return counts;
}

std::string TypedPartition::class_name(int code) const {
  for (const auto& l : labels)
    if (l.code == code) return l.name;
  return std::to_string(code);
}

TypedPartition make_typed_partition(const Dataset& per_type, const std::string& row_type) {
  const int ti = per_type.schema.target_index();
  if (ti < 0) throw InputError("dataset schema has no target column");
  TypedPartition p;
  p.row_type = row_type;
  p.targets.reserve(per_type.rows.size());
  std::set<int> codes;
  for (std::size_t i = 0; i < per_type.rows.size(); ++i) {
    const Cell& cell = per_type.rows[i][static_cast<std::size_t>(ti)];
    if (cell.is_missing())
      throw InputError("row " + std::to_string(i + 1) + ": missing target value");
    int code;
    if (cell.is_number()) {
      const double v = cell.as_number();
      code = static_cast<int>(std::llround(v));
      if (std::abs(v - code) > 1e-9)
        throw InputError("row " + std::to_string(i + 1) + ": target '" + std::to_string(v) +
                         "' is not an integer class code");
    } else {
      double v;
      if (!parse_double(cell.as_text(), v) || std::abs(v - std::llround(v)) > 1e-9)
        throw InputError("row " + std::to_string(i + 1) + ": target '" + cell.as_text() +
                         "' is not an integer class code");
      code = static_cast<int>(std::llround(v));
    }
    p.targets.push_back(code);
    codes.insert(code);
  }
  for (int c : codes) {
    auto it = per_type.schema.class_names.find(c);
    p.labels.push_back({c, it != per_type.schema.class_names.end() ? it->second
                                                                   : std::to_string(c)});
    p.code_map.to_current[c] = c;
  }
  return p;
}

TypedPartition apply_label_policy(const TypedPartition& p, const LabelPolicy& policy) {
  TypedPartition out = p;
  auto counts = out.class_counts();

  for (const auto& [src_orig, dst_orig] : policy.merges) {
    const int src = out.code_map.translate(src_orig);
    const int dst = out.code_map.translate(dst_orig);
    if (src == dst) continue;  // already merged; keeps repeat applications identity
    if (!counts.count(src) || !counts.count(dst))
      throw InputError("label policy: merge " + std::to_string(src_orig) + "->" +
                       std::to_string(dst_orig) + " names a class absent from the data");
    if (counts[src] >= policy.min_class_count) continue;

    for (int& c : out.targets)
      if (c == src) c = dst;
    counts[dst] += counts[src];
    counts.erase(src);
    out.labels.erase(std::remove_if(out.labels.begin(), out.labels.end(),
                                    [&](const ClassLabel& l) { return l.code == src; }),
                     out.labels.end());
    for (auto& [orig, cur] : out.code_map.to_current)
      if (cur == src) cur = dst;
  }

  if (out.labels.empty()) throw InputError("label policy produced zero classes");

  // Re-index the surviving codes contiguously 1..K, keeping names.
  std::map<int, int> reindex;
  int next = 1;
  for (auto& l : out.labels) {
    reindex[l.code] = next;
    l.code = next;
    ++next;
  }
  for (int& c : out.targets) c = reindex.at(c);
  for (auto& [orig, cur] : out.code_map.to_current) cur = reindex.at(cur);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<int>& y, const SplitSpec& s) {
  if (y.size() < 2) throw InputError("split requires at least 2 rows");
  if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
    throw InputError("test_fraction must be in (0,1)");

  std::vector<std::size_t> train, test;
  Rng rng(derive_seed(s.seed, "split"));

  if (!s.stratified) {
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(y.size()) * s.test_fraction));
    n_test = std::min(n_test, y.size());
    test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  } else {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    for (auto& [cls, idx] : by_class) {
      (void)cls;
      rng.shuffle(idx);
      std::size_t n_test = static_cast<std::size_t>(
          std::llround(static_cast<double>(idx.size()) * s.test_fraction));
      if (idx.size() >= 2) {
        n_test = std::max<std::size_t>(1, std::min(n_test, idx.size() - 1));
      } else {
        n_test = std::min(n_test, idx.size());
      }
      for (std::size_t i = 0; i < idx.size(); ++i)
        (i < n_test ? test : train).push_back(idx[i]);
    }
  }
  if (test.empty()) throw InputError("split produced an empty test set");
  if (train.empty()) throw InputError("split produced an empty train set");
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

namespace {

TypedPartition take_partition_rows(const TypedPartition& p,
                                   std::span<const std::size_t> idx) {
  TypedPartition out;
  out.row_type = p.row_type;
  out.feature_names = p.feature_names;
  out.labels = p.labels;
  out.code_map = p.code_map;
  out.targets.reserve(idx.size());
  for (std::size_t i : idx) out.targets.push_back(p.targets[i]);
  if (!p.features.empty()) out.features = p.features.take_rows(idx);
  return out;
}

}  // namespace

std::pair<TypedPartition, TypedPartition> stratified_split(const TypedPartition& p,
                                                           const SplitSpec& s) {
  if (!p.features.empty() && p.features.rows() != p.targets.size())
    throw std::logic_error("TypedPartition: feature/target row count mismatch");
  auto [train_idx, test_idx] = stratified_split_indices(p.targets, s);
  return {take_partition_rows(p, train_idx), take_partition_rows(p, test_idx)};
}

Dataset take_rows(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.schema = d.schema;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(d.rows[i]);
  return out;
}

}  // namespace rtdpa
