#pragma once

#include "dcwave/dynkin.hpp"
#include "dcwave/fbi.hpp"
#include "dcwave/jets.hpp"
#include "dcwave/pde.hpp"
#include "dcwave/weights.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dcwave {

using json = nlohmann::ordered_json;

json to_json(const WeightSequence& seq);
WeightSequence sequence_from_json(const json& j);
json to_json(const RegularityReport& r);

json to_json(const Jet& jet);
Jet jet_from_json(const json& j);
json to_json(const VectorFieldJet& L);
VectorFieldJet field_from_json(const json& j);
json to_json(const FormalSeries& s);
json to_json(const GrowthEstimate& g);

json to_json(const FlatnessFit& f);
json to_json(const DecayReport& r);
json to_json(const PhaseBoundReport& r);
json to_json(const ScanResult& r);
json to_json(const WfReport& r);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// %.17g formatting shared by CSV writers.
std::string fmt17(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string str() const;
};

json versions();

}  // namespace dcwave
