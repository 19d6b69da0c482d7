#pragma once

#include <string>
#include <vector>

#include "suglg/model.hpp"

namespace suglg {

struct RainfallRecord {
  std::string station;
  double precipitation;  // inch; 0 for censored stations
  double longitude;
  double latitude;
  double elevation;  // meters
  bool censored;
};

/// Fars province stations, first Wednesday of December 2012.
const std::vector<RainfallRecord>& rainfall_records();

/// 30-site dataset on planar (longitude, latitude) with constant mean.
/// Stations reporting zero are censored on [0, 0.01).
SpatialDataset embedded_rainfall();

}  // namespace suglg
