#include "stablemil/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "stablemil/canonical_json.hpp"

namespace stablemil {

namespace {

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

double parse_number(std::string_view text, const std::string& where) {
  double value = 0.0;
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw Error(ErrorCode::kParseError, where + ": bad number '" + std::string(text) + "'");
  return value;
}

Bag bag_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, where + ": record is not an object");
  Bag bag;
  try {
    if (!j.contains("id") || !j.contains("label") || !j.contains("instances"))
      throw Error(ErrorCode::kParseError, where + ": record needs id, label and instances");
    const auto& id = j.at("id");
    bag.id = id.is_string() ? id.get<std::string>() : id.dump();
    bag.label = j.at("label").get<int>();
    if (bag.label != 0 && bag.label != 1)
      throw Error(ErrorCode::kParseError, where + ": label must be 0 or 1");
    for (const auto& row : j.at("instances")) {
      Instance inst;
      inst.features = row.get<std::vector<double>>();
      bag.instances.push_back(std::move(inst));
    }
    if (bag.instances.empty()) throw Error(ErrorCode::kParseError, where + ": bag has no instances");
    if (j.contains("truth") && !j.at("truth").is_null()) {
      const auto& truth = j.at("truth");
      if (!truth.is_array() || truth.size() != bag.instances.size())
        throw Error(ErrorCode::kParseError, where + ": truth list length differs from instance count");
      for (std::size_t i = 0; i < truth.size(); ++i)
        bag.instances[i].truth = parse_role(truth[i].get<std::string>());
    }
    if (j.contains("background") && !j.at("background").is_null())
      bag.background = j.at("background").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, where + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError && std::string(e.what()).find(where) == std::string::npos)
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    throw;
  }
  return bag;
}

Json bag_to_json(const Bag& bag) {
  Json j = Json::object();
  j["id"] = bag.id;
  j["label"] = bag.label;
  Json rows = Json::array();
  for (const auto& inst : bag.instances) {
    Json row = Json::array();
    for (double v : inst.features) row.push_back(v);
    rows.push_back(std::move(row));
  }
  j["instances"] = std::move(rows);
  const bool any_known = std::any_of(bag.instances.begin(), bag.instances.end(), [](const Instance& x) {
    return x.truth != InstanceRole::kUnknown;
  });
  if (any_known) {
    Json truth = Json::array();
    for (const auto& inst : bag.instances) truth.push_back(std::string(to_string(inst.truth)));
    j["truth"] = std::move(truth);
  } else {
    j["truth"] = nullptr;
  }
  if (!bag.background.empty()) j["background"] = bag.background;
  return j;
}

void check_dims(MILDataset& ds, const std::string& source) {
  if (ds.bags.empty()) throw Error(ErrorCode::kEmptyDataset, source + ": no bags");
  ds.dim = ds.bags.front().dim();
  for (const auto& bag : ds.bags)
    for (const auto& inst : bag.instances)
      if (inst.dim() != ds.dim)
        throw Error(ErrorCode::kDimMismatch, source + ": bag '" + bag.id + "' has dim " +
                                                 std::to_string(inst.dim()) + ", expected " +
                                                 std::to_string(ds.dim));
  validate(ds);
}

MILDataset read_jsonl(std::istream& in, const std::string& source) {
  MILDataset ds;
  ds.source = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = at_line(source, line_no);
    Json j = parse_json(line, where);
    if (j.is_object() && j.contains("meta") && !j.contains("instances")) {
      if (!ds.bags.empty()) throw Error(ErrorCode::kParseError, where + ": meta must precede bags");
      for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it)
        ds.meta[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      continue;
    }
    ds.bags.push_back(bag_from_json(j, where));
  }
  check_dims(ds, source);
  return ds;
}

MILDataset read_csv(std::istream& in, const std::string& source) {
  MILDataset ds;
  ds.source = source;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = at_line(source, line_no);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (dim == 0) {
      if (cells.size() < 3 || cells[0] != "bag_id" || cells[1] != "label")
        throw Error(ErrorCode::kParseError, where + ": header must be bag_id,label,f1,...,fd");
      dim = cells.size() - 2;
      continue;
    }
    if (cells.size() != dim + 2)
      throw Error(ErrorCode::kDimMismatch, where + ": expected " + std::to_string(dim) +
                                               " features, got " + std::to_string(cells.size() - 2));
    const double label_value = parse_number(cells[1], where);
    if (label_value != 0.0 && label_value != 1.0)
      throw Error(ErrorCode::kParseError, where + ": label must be 0 or 1");
    const int label = static_cast<int>(label_value);
    Instance inst;
    inst.features.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) inst.features.push_back(parse_number(cells[k + 2], where));
    auto [it, inserted] = index.try_emplace(cells[0], ds.bags.size());
    if (inserted) {
      Bag bag;
      bag.id = cells[0];
      bag.label = label;
      ds.bags.push_back(std::move(bag));
    } else if (ds.bags[it->second].label != label) {
      throw Error(ErrorCode::kParseError, where + ": bag '" + cells[0] + "' has conflicting labels");
    }
    ds.bags[it->second].instances.push_back(std::move(inst));
  }
  check_dims(ds, source);
  return ds;
}

}  // namespace

DatasetFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::kCsv : DatasetFormat::kJsonl;
}

MILDataset read_dataset(std::istream& in, DatasetFormat format, const std::string& source) {
  return format == DatasetFormat::kCsv ? read_csv(in, source) : read_jsonl(in, source);
}

MILDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_dataset(in, format, path.string());
}

MILDataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

void write_dataset(std::ostream& out, const MILDataset& dataset, DatasetFormat format) {
  if (format == DatasetFormat::kCsv) {
    out << "bag_id,label";
    for (std::size_t k = 1; k <= dataset.dim; ++k) out << ",f" << k;
    out << '\n';
    for (const auto& bag : dataset.bags)
      for (const auto& inst : bag.instances) {
        out << bag.id << ',' << bag.label;
        for (double v : inst.features) out << ',' << format_double(v);
        out << '\n';
      }
    return;
  }
  if (!dataset.meta.empty()) {
    Json meta = Json::object();
    for (const auto& [k, v] : dataset.meta) meta[k] = v;
    Json line = Json::object();
    line["meta"] = std::move(meta);
    out << to_canonical(line) << '\n';
  }
  for (const auto& bag : dataset.bags) out << to_canonical(bag_to_json(bag)) << '\n';
}

void save_dataset(const MILDataset& dataset, const std::filesystem::path& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_dataset(out, dataset, format);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void save_dataset(const MILDataset& dataset, const std::filesystem::path& path) {
  save_dataset(dataset, path, format_from_path(path));
}

std::string dataset_to_string(const MILDataset& dataset, DatasetFormat format) {
  std::ostringstream out;
  write_dataset(out, dataset, format);
  return out.str();
}

}  // namespace stablemil
