#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "stablemil/mil_core.hpp"

namespace stablemil {

enum class DatasetFormat { kJsonl, kCsv };

/// Picks the format from the file extension (".csv" is CSV, anything else JSONL).
DatasetFormat format_from_path(const std::filesystem::path& path);

// JSON Lines layout, one bag per line, fields in this order:
//   {"id":"b0","label":1,"instances":[[...],...],"truth":[...]|null,"background":"N1"}
// "background" is omitted when empty; "truth" is null when every truth is
// unknown. A non-empty meta map is written as a leading {"meta":{...}} line.
// Floats use 17 significant digits so load(save(x)) == x exactly.
//
// CSV layout: header "bag_id,label,f1,...,fd", one instance per row, rows of
// the same bag grouped by first appearance. No truths, no meta.

MILDataset read_dataset(std::istream& in, DatasetFormat format, const std::string& source = "<stream>");
MILDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
MILDataset load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const MILDataset& dataset, DatasetFormat format);
void save_dataset(const MILDataset& dataset, const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const MILDataset& dataset, const std::filesystem::path& path);

std::string dataset_to_string(const MILDataset& dataset, DatasetFormat format = DatasetFormat::kJsonl);

}  // namespace stablemil
